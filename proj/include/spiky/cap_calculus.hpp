#pragma once

#include <cstdint>

namespace spiky {

// Normalized spherical cap measures. Every function takes the AMBIENT
// dimension d: a cap on S^{d-1} in R^d. The intrinsic-index Omega_m(phi) on S^m
// is cap_measure(m + 1, phi).

/// Omega of the cap of angular radius phi on S^{d-1}, phi in (0, pi).
/// Relative error <= 1e-10.
double cap_measure(int d, double phi);

/// Natural log of cap_measure, usable where the measure underflows.
double log_cap_measure(int d, double phi);

/// sin^n(phi) / sqrt(2 pi (n+1)) < cap_measure(n + 1, phi) for 0 < phi < pi/2.
double bw_lower(int n, double phi);
double log_bw_lower(int n, double phi);

/// Largest angle accepted by bw_upper: arccos(1 / sqrt(n + 1)).
double bw_upper_limit(int n);

/// sin^n(phi) / (sqrt(2 pi n) cos(phi)) > cap_measure(n + 1, phi), valid for
/// 0 < phi <= arccos(1/sqrt(n+1)). Throws PreconditionError beyond that.
double bw_upper(int n, double phi);
double log_bw_upper(int n, double phi);

/// t^n * cap_measure(n + 1, phi), an upper bound for cap_measure(n + 1, t * phi)
/// when 1 < t < pi / (2 phi).
double cap_scaling_bound(int n, double phi, double t);

/// 2x/pi, the lower bound of sin(x) on [0, pi/2]; DomainError outside that range.
double jordan_lower(double x);

/// Upper bound on P(xi > N theta p), xi ~ Binom(N, p).
struct TailBound {
  std::int64_t trials = 0;
  double success_prob = 0.0;
  double threshold = 0.0;  // N * theta * p
  double log2_bound = 0.0;

  /// Natural-scale value, clamped to [0, 1]; underflows to 0 for large exponents.
  [[nodiscard]] double bound() const;
};

/// 2^(-N theta p). Throws PreconditionError for theta < 6, where the
/// inequality is not asserted.
TailBound chernoff_bound(std::int64_t trials, double p, double theta);

/// P(xi > k) for xi ~ Binom(N, p), summed exactly in extended precision with
/// compensated accumulation. k is real; the tail starts at floor(k) + 1.
double binomial_tail_exact(std::int64_t trials, double p, double k);

/// log of binomial_tail_exact, for tails below the double range.
double log_binomial_tail_exact(std::int64_t trials, double p, double k);

}  // namespace spiky
