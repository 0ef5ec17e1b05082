#include "spiky/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "spiky/errors.hpp"
#include "spiky/kernels.hpp"

namespace spiky {

namespace vec {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace vec

UnitVector UnitVector::normalized(std::vector<double> v) {
  if (v.size() < 2) throw DomainError("unit vectors need dimension >= 2");
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("non-finite coordinate");
  }
  const double n = vec::norm(v);
  if (n == 0.0) throw DomainError("cannot normalize the zero vector");
  for (double& x : v) x /= n;
  return UnitVector(std::move(v));
}

UnitVector UnitVector::from_unit(std::vector<double> v) {
  if (v.size() < 2) throw DomainError("unit vectors need dimension >= 2");
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("non-finite coordinate");
  }
  if (std::abs(vec::norm(v) - 1.0) > 1e-12) throw DomainError("vector is not of unit norm");
  return UnitVector(std::move(v));
}

UnitVector UnitVector::axis(int dim, int k, double sign) {
  if (dim < 2 || k < 0 || k >= dim) throw DomainError("axis index out of range");
  std::vector<double> v(dim, 0.0);
  v[k] = sign < 0 ? -1.0 : 1.0;
  return UnitVector(std::move(v));
}

UnitVector UnitVector::operator-() const {
  std::vector<double> v = coords_;
  for (double& x : v) x = -x;
  return UnitVector(std::move(v));
}

void PointSet::push_back(std::span<const double> p) {
  if (dim_ == 0) dim_ = static_cast<int>(p.size());
  if (static_cast<int>(p.size()) != dim_) throw DomainError("point dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

void PointSet::erase(std::size_t i) {
  auto first = coords_.begin() + static_cast<std::ptrdiff_t>(i * dim_);
  coords_.erase(first, first + dim_);
}

UnitVector PointSet::unit(std::size_t i) const {
  const auto r = (*this)[i];
  return UnitVector::from_unit({r.begin(), r.end()});
}

void sample_uniform_into(std::span<double> out, Stream& rng) {
  std::normal_distribution<double> normal;
  for (;;) {
    for (double& x : out) x = normal(rng);
    const double n = vec::norm(out);
    if (n > 0.0 && std::isfinite(n)) {
      for (double& x : out) x /= n;
      return;
    }
  }
}

UnitVector sample_uniform(int d, Stream& rng) {
  if (d < 2) throw DomainError("sample_uniform: dimension must be >= 2");
  std::vector<double> v(d);
  sample_uniform_into(v, rng);
  return UnitVector::from_unit(std::move(v));
}

UnitVector sample_uniform(int d, SeedSpec seed) {
  Stream rng(seed);
  return sample_uniform(d, rng);
}

namespace {

// Rows k0 .. k0+count-1 of the cloud defined by `seed`.
PointSet cloud_range(int d, std::uint64_t k0, std::size_t count, SeedSpec seed, int workers) {
  PointSet out(d);
  out.resize(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static) num_threads(kernels::resolve_workers(workers))
  for (std::int64_t k = 0; k < n; ++k) {
    Stream rng(seed.child(k0 + static_cast<std::uint64_t>(k)));
    sample_uniform_into(out.row(static_cast<std::size_t>(k)), rng);
  }
  return out;
}

}  // namespace

PointSet uniform_cloud(int d, std::size_t count, SeedSpec seed, int workers) {
  if (d < 2) throw DomainError("uniform_cloud: dimension must be >= 2");
  return cloud_range(d, 0, count, seed, workers);
}

double angle(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("angle: dimension mismatch");
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    diff += (u[k] - v[k]) * (u[k] - v[k]);
    sum += (u[k] + v[k]) * (u[k] + v[k]);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

double angle(const UnitVector& u, const UnitVector& v) { return angle(u.coords(), v.coords()); }

double rogers_bound(int d, double delta) {
  const double n = d - 1;
  return n * n / std::pow(std::sin(delta), n);
}

CoverageReport verify_coverage(const PointSet& centers, double radius, std::uint64_t probes, SeedSpec seed,
                               int workers) {
  CoverageReport report;
  report.probes = probes;
  if (probes == 0) return report;
  const auto scan = kernels::omp::coverage_scan(centers, std::cos(radius), probes, seed, 1, workers);
  report.uncovered = scan.uncovered;
  report.worst_angle = std::acos(std::clamp(scan.worst_dot, -1.0, 1.0));
  report.pass = scan.uncovered == 0;
  if (!report.pass) {
    report.witness = sample_uniform(centers.dim(), seed.child(scan.worst_index));
    report.confidence = 0.0;
  } else {
    report.confidence = 1.0 + std::log(0.05) / static_cast<double>(probes);
  }
  return report;
}

bool is_separated(const PointSet& centers, double delta) {
  const double c = std::cos(delta);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if (vec::dot(centers[i], centers[j]) >= c) return false;
    }
  }
  return true;
}

DeltaNet build_delta_net(int d, double delta, SeedSpec seed, const NetOptions& opts) {
  if (d < 2) throw DomainError("build_delta_net: dimension must be >= 2");
  if (!(delta > 0.0 && delta < std::numbers::pi / 2)) {
    throw DomainError("build_delta_net: delta must lie in (0, pi/2)");
  }
  const auto cap = opts.size_cap.value_or(static_cast<std::size_t>(std::ceil(10.0 * rogers_bound(d, delta))));
  const double cos_delta = std::cos(delta);

  DeltaNet net;
  net.delta = delta;
  net.seed = seed;
  net.symmetric = opts.symmetric;
  net.centers = PointSet(d);

  // Candidate k is sample_uniform(seed.child(k)); batches are screened in
  // parallel against the current centers and then admitted in index order.
  std::uint64_t next = 0;
  std::uint64_t consecutive = 0;
  bool closing = false;
  int closure_rounds = 0;
  for (;;) {
    const std::uint64_t batch =
        closing ? opts.closure_batch : std::min<std::uint64_t>(4096, opts.max_consecutive_rejections - consecutive);
    if (batch == 0) break;
    const PointSet candidates = cloud_range(d, next, batch, seed, opts.workers);
    next += batch;
    const auto screened = kernels::omp::admissible(candidates, net.centers, cos_delta, opts.symmetric, opts.workers);
    const std::size_t before_batch = net.centers.size();
    std::size_t admitted = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      bool ok = screened[k] != 0;
      for (std::size_t c = before_batch; ok && c < net.centers.size(); ++c) {
        double dt = vec::dot(candidates[k], net.centers[c]);
        if (opts.symmetric) dt = std::abs(dt);
        ok = dt < cos_delta;
      }
      if (!ok) {
        ++consecutive;
        continue;
      }
      consecutive = 0;
      ++admitted;
      net.centers.push_back(candidates[k]);
      if (opts.symmetric) {
        std::vector<double> neg(candidates[k].begin(), candidates[k].end());
        for (double& x : neg) x = -x;
        net.centers.push_back(neg);
      }
      if (net.centers.size() > cap) {
        throw ResourceError("build_delta_net: net exceeds size cap " + std::to_string(cap));
      }
    }
    if (!closing) {
      if (consecutive >= opts.max_consecutive_rejections) closing = true;
    } else {
      ++closure_rounds;
      if (admitted == 0 || closure_rounds >= opts.max_closure_rounds) break;
    }
  }
  net.separation_verified = is_separated(net.centers, delta);
  return net;
}

CoverageReport verify_net_coverage(DeltaNet& net, std::uint64_t probes, SeedSpec seed, int workers) {
  auto report = verify_coverage(net.centers, net.delta, probes, seed, workers);
  net.probe_count = report.probes;
  net.coverage_confidence = report.confidence;
  return report;
}

}  // namespace spiky
