#include "spiky/spiky_body.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "spiky/cap_calculus.hpp"
#include "spiky/errors.hpp"
#include "spiky/kernels.hpp"

namespace spiky {

namespace {

constexpr double kPi = std::numbers::pi;

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < n; ++k) {
      h ^= p[k];
      h *= 0x100000001b3ULL;
    }
  }
  void f64(double x) { bytes(&x, sizeof x); }
  void i64(std::int64_t x) { bytes(&x, sizeof x); }
  void points(const PointSet& s) {
    i64(static_cast<std::int64_t>(s.size()));
    for (double x : s.raw()) f64(x);
  }
};

}  // namespace

double SpikyBody::alpha() const { return std::asin(std::min(1.0, 1.0 / bigD)); }

SpikyBody SpikyBody::unit_ball(int d) {
  if (d < 2) throw DomainError("unit_ball: dimension must be >= 2");
  SpikyBody b;
  b.dim = d;
  b.spikes = PointSet(d);
  b.bigD = 1.0;
  b.inner_radius = 1.0;
  return b;
}

SpikyBody SpikyBody::from_spikes(PointSet spikes, double bigD) {
  if (!(bigD >= 1.0) || !std::isfinite(bigD)) throw DomainError("from_spikes: D must be >= 1");
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    if (std::abs(vec::norm(spikes[i]) - 1.0) > 1e-12) throw DomainError("from_spikes: spikes must be unit vectors");
  }
  if (spikes.dim() < 2) throw DomainError("from_spikes: dimension must be >= 2");
  SpikyBody b;
  b.dim = spikes.dim();
  b.spikes = std::move(spikes);
  b.bigD = bigD;
  b.inner_radius = 1.0 / bigD;
  return b;
}

SpikyBody construct(int d, std::size_t spikes, double bigD, SeedSpec seed, int workers) {
  if (d < 2) throw DomainError("construct: dimension must be >= 2");
  if (spikes < 1) throw DomainError("construct: N must be >= 1");
  if (!(bigD > 1.0) || !std::isfinite(bigD)) throw DomainError("construct: D must be > 1");
  SpikyBody b;
  b.dim = d;
  b.spikes = uniform_cloud(d, spikes, seed, workers);
  b.bigD = bigD;
  b.inner_radius = 1.0 / bigD;
  b.seed = seed;
  return b;
}

std::uint64_t digest(const SpikyBody& body) {
  Fnv f;
  f.i64(body.dim);
  f.f64(body.bigD);
  f.points(body.spikes);
  if (body.polytopal_core) f.points(*body.polytopal_core);
  return f.h;
}

std::uint64_t digest(const DeltaNet& net) {
  Fnv f;
  f.i64(net.dim());
  f.f64(net.delta);
  f.points(net.centers);
  return f.h;
}

EventReport check_e1(const SpikyBody& body, int workers) {
  if (!(body.bigD < std::numbers::sqrt2)) {
    throw PreconditionError("check_e1: requires D < sqrt(2) so that pi - 2 alpha lies in (0, pi/2)");
  }
  const double alpha = body.alpha();
  EventReport r;
  r.id = EventId::E1;
  r.threshold_used = kPi - 2.0 * alpha;
  const auto pairs = kernels::omp::conflicting_pairs(body.spikes, std::cos(r.threshold_used) - kTieTolerance, workers);
  for (const auto& [i, j] : pairs) {
    const double dt = vec::dot(body.spikes[i], body.spikes[j]);
    const double direct = angle(body.spikes[i], body.spikes[j]);
    r.pairs.push_back({i, j, dt < 0 ? kPi - direct : direct, dt < 0});
  }
  r.occurred = !r.pairs.empty();
  return r;
}

EventReport check_e2_prime(const SpikyBody& body, const DeltaNet& net, double theta, int workers) {
  if (net.dim() != body.dim) throw DomainError("check_e2_prime: net and body dimensions differ");
  if (!(theta > 0.0)) throw DomainError("check_e2_prime: theta must be positive");
  EventReport r;
  r.id = EventId::E2Prime;
  if (theta < 6.0) r.warnings.emplace_back("theta < 6: the Chernoff tail bound does not apply");
  const double radius = body.alpha() + net.delta;
  const double p = 2.0 * cap_measure(body.dim, radius);
  const double T = static_cast<double>(body.size()) * theta * p;
  r.threshold_used = T;
  const auto counts = kernels::omp::signed_cap_counts(body.spikes, net.centers, std::cos(radius) - kTieTolerance,
                                                      workers);
  const double cut = T - kTieTolerance * std::max(1.0, T);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (!r.argmax_center || counts[c] > r.max_multiplicity) {
      r.max_multiplicity = counts[c];
      r.argmax_center = static_cast<std::uint32_t>(c);
    }
    if (counts[c] > cut) r.centers.push_back({static_cast<std::uint32_t>(c), counts[c]});
  }
  r.occurred = !r.centers.empty();
  return r;
}

std::string Certificate::label() const {
  if (!lower_bound) return "none";
  return coverage_confidence < 1.0 ? "probabilistically certified" : "certified";
}

Certificate certify(const SpikyBody& body, const DeltaNet& net, double theta, int workers) {
  Certificate c;
  c.body_digest = digest(body);
  c.net_digest = digest(net);
  c.dim = body.dim;
  c.spikes = body.size();
  c.net_size = net.size();
  c.bigD = body.bigD;
  c.alpha = body.alpha();
  c.delta = net.delta;
  c.theta = theta;
  c.e1 = check_e1(body, workers);
  c.e2prime = check_e2_prime(body, net, theta, workers);
  c.p = 2.0 * cap_measure(body.dim, c.alpha + c.delta);
  c.T = static_cast<double>(body.size()) * theta * c.p;
  c.coverage_confidence = net.coverage_confidence;
  if (!c.e1.occurred && !c.e2prime.occurred) c.lower_bound = 2.0 / (theta * c.p);
  return c;
}

std::vector<std::uint32_t> multiplicity_profile(const SpikyBody& body, const PointSet& directions, double radius,
                                                int workers) {
  if (directions.empty()) return {};
  if (directions.dim() != body.dim) throw DomainError("multiplicity_profile: dimension mismatch");
  return kernels::omp::signed_cap_counts(body.spikes, directions, std::cos(radius) - kTieTolerance, workers);
}

SpikyBody polytopal_variant(const SpikyBody& body, double core_density, SeedSpec seed) {
  if (!(core_density > 0.0 && core_density < kPi / 4)) {
    throw DomainError("polytopal_variant: core density must lie in (0, pi/4)");
  }
  NetOptions opts;
  opts.symmetric = true;
  const DeltaNet net = build_delta_net(body.dim, core_density, seed, opts);
  PointSet core(body.dim);
  core.reserve(net.size());
  std::vector<double> row(body.dim);
  for (std::size_t k = 0; k < net.size(); ++k) {
    for (int j = 0; j < body.dim; ++j) row[j] = net.centers[k][j] * body.inner_radius;
    core.push_back(row);
  }
  SpikyBody out = body;
  out.polytopal_core = std::move(core);
  out.core_density = core_density;
  return out;
}

}  // namespace spiky
