#pragma once

// Independent reference computations used only by the tests.

#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "spiky/geometry_oracle.hpp"
#include "spiky/spiky_body.hpp"

namespace oracle {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

/// Cap measure through the regularized incomplete beta function.
inline double cap_measure_ibeta(int d, double phi) {
  if (phi > std::numbers::pi / 2) return 1.0 - cap_measure_ibeta(d, std::numbers::pi - phi);
  const double s = std::sin(phi);
  return 0.5 * boost::math::ibeta((d - 1) / 2.0, 0.5, s * s);
}

/// Binomial upper tail P(X > k) through the incomplete beta function.
inline double binomial_tail_ibeta(long n, double p, double k) {
  const long first = static_cast<long>(std::floor(k)) + 1;
  if (first > n) return 0.0;
  if (first <= 0) return 1.0;
  return boost::math::ibeta(static_cast<double>(first), static_cast<double>(n - first + 1), p);
}

struct Frequency {
  double value;
  double stderr_;
};

/// Fraction of uniform points (mt19937_64 + Gaussian normalization) within
/// angle phi of e_1.
inline Frequency mc_cap_frequency(int d, double phi, std::uint64_t samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  const double c = std::cos(phi);
  std::uint64_t hits = 0;
  std::vector<double> x(d);
  for (std::uint64_t s = 0; s < samples; ++s) {
    double n2 = 0.0;
    for (auto& v : x) {
      v = g(gen);
      n2 += v * v;
    }
    hits += x[0] >= c * std::sqrt(n2);
  }
  const double q = static_cast<double>(hits) / samples;
  return {q, std::sqrt(q * (1.0 - q) / samples)};
}

inline std::vector<double> random_unit(int d, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  std::vector<double> x(d);
  double n2 = 0.0;
  for (auto& v : x) {
    v = g(gen);
    n2 += v * v;
  }
  for (auto& v : x) v /= std::sqrt(n2);
  return x;
}

/// Plain arccos of the normalized dot product.
inline double angle_acos(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return std::acos(std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0));
}

/// Brute-force count of +-X_i within `radius` of each center.
inline std::vector<std::uint32_t> recount(const spiky::SpikyBody& body, const spiky::PointSet& centers,
                                          double radius) {
  std::vector<std::uint32_t> out(centers.size(), 0);
  std::vector<double> neg(body.dim);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      for (int k = 0; k < body.dim; ++k) neg[k] = -body.spikes[i][k];
      out[c] += angle_acos(centers[c], body.spikes[i]) <= radius + 1e-9;
      out[c] += angle_acos(centers[c], neg) <= radius + 1e-9;
    }
  }
  return out;
}

/// Deterministic near-uniform directions: a fine circle grid for d = 2 and
/// a Fibonacci lattice for d = 3.
inline std::vector<std::vector<double>> dense_directions(int d, std::size_t count) {
  std::vector<std::vector<double>> out;
  if (d == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * k / count;
      out.push_back({std::cos(t), std::sin(t)});
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      out.push_back({r * std::cos(golden * k), r * std::sin(golden * k), z});
    }
  }
  return out;
}

/// min over the dense directions of h_K(w) - <p, w>.
inline double dense_margin(const spiky::SpikyBody& body, std::span<const double> p, std::size_t count) {
  double best = INFINITY;
  for (const auto& w : dense_directions(body.dim, count)) {
    double pw = 0;
    for (int k = 0; k < body.dim; ++k) pw += p[k] * w[k];
    best = std::min(best, spiky::support(body, w) - pw);
  }
  return best;
}

/// max over the dense directions of <p, w> / h_K(w).
inline double dense_gauge(const spiky::SpikyBody& body, std::span<const double> p, std::size_t count) {
  double best = 0.0;
  for (const auto& w : dense_directions(body.dim, count)) {
    double pw = 0;
    for (int k = 0; k < body.dim; ++k) pw += p[k] * w[k];
    best = std::max(best, pw / spiky::support(body, w));
  }
  return best;
}

}  // namespace oracle
