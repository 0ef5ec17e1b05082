#pragma once

#include <cstdint>
#include <span>

#include "spiky/random.hpp"
#include "spiky/spiky_body.hpp"
#include "spiky/sphere.hpp"

namespace spiky {

enum class MarginStatus { CertifiedNegative, CertifiedPositive, Ambiguous };

struct OracleOptions {
  /// Local descents in the multistart fallback.
  int restarts = 64;
  /// |margin| at or below this is reported as ambiguous.
  double tolerance = 1e-9;
  /// Random directions evaluated to seed the multistart fallback.
  std::size_t sweep = 10000;
  /// Largest number of active sets enumerated exactly before falling back to
  /// multistart local minimization.
  std::uint64_t exhaustive_budget = 200000;
  bool force_local = false;
  std::uint64_t seed = 0x6f7261636c65ULL;
};

struct MarginResult {
  /// min over unit w of h_K(w) - <p, w>: the inradius about p when p is
  /// interior, minus the distance to K otherwise.
  double value = 0.0;
  UnitVector minimizer_direction = UnitVector::axis(2, 0);
  int restarts_used = 0;
  MarginStatus status = MarginStatus::Ambiguous;
  /// True when every active set was enumerated, making the value exact up to
  /// rounding rather than up to optimizer completeness.
  bool exhaustive = false;
};

/// h_K(w) = max(max_i |<X_i, w>|, |w| / D), or the maximum over core points
/// in place of the ball term for polytopal bodies.
double support(const SpikyBody& body, std::span<const double> w);

MarginResult membership_margin(const SpikyBody& body, std::span<const double> p, const OracleOptions& opts = {});

struct IlluminationTrace {
  bool illuminated = false;
  bool ambiguous = false;
  double best_lambda = 0.0;
  double max_margin = 0.0;
  int evaluations = 0;
};

/// Whether the ray {b + lambda u : lambda > 0} meets int K. The margin along
/// the ray is concave in lambda; it is maximized over [1/16, 2] by a 32-point
/// grid refined with golden-section search.
IlluminationTrace illuminates_at(const SpikyBody& body, std::span<const double> boundary_point, const UnitVector& u,
                                 const OracleOptions& opts = {});

/// illuminates_at for the boundary point X_i (or -X_i when `negated`).
IlluminationTrace illuminates(const SpikyBody& body, std::size_t i, const UnitVector& u,
                              const OracleOptions& opts = {}, bool negated = false);

struct GaugeResult {
  double value = 0.0;
  bool exhaustive = false;
};

/// ||p||_K = max over w of <p, w> / h_K(w).
GaugeResult gauge(const SpikyBody& body, std::span<const double> p, const OracleOptions& opts = {});

/// angle(u, -X_i) < alpha (strict, tie band 1e-12): the predicted set of
/// directions illuminating K at X_i.
bool cap_predicate(const SpikyBody& body, std::size_t i, const UnitVector& u, bool negated = false);

}  // namespace spiky
