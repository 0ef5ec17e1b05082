#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spiky/geometry_oracle.hpp"
#include "spiky/random.hpp"
#include "spiky/spiky_body.hpp"
#include "spiky/sphere.hpp"

namespace spiky {

/// Parameters of the randomized construction in R^{n+1} for a given D and n,
/// with 1/(theta p) = D^n / 36. Quantities that overflow a double are also
/// kept as natural logs.
struct Plan {
  double bigD = 0.0;
  int n = 0;
  int dim = 0;  // n + 1
  bool in_nominal_range = true;

  double alpha = 0.0;  // arcsin(1/D)
  double delta = 0.0;  // alpha / n
  double p = 0.0;      // 2 cap_measure(n+1, alpha + delta)
  double log_p = 0.0;
  double theta = 0.0;
  double log_theta = 0.0;
  /// floor((1 / (4 Omega_n(pi - 2 alpha)))^{1/2}); exact below 2^53.
  double N = 0.0;
  double log_N = 0.0;
  double T = 0.0;  // N theta p
  double log_T = 0.0;
  double lower_bound = 0.0;  // 2 / (theta p) = D^n / 18
  double log_lower_bound = 0.0;

  /// Evaluated with exact cap measures.
  struct Exact {
    bool n_positive = false;        // N >= 1
    bool n_upper = false;           // N <= (1 / (4 Omega_n(pi - 2 alpha)))^{1/2}
    bool net_tail = false;          // (n^2 / sin^n delta) 2^{-theta N p} <= 1/4
    bool theta_at_least_6 = false;  // theta >= 6
    bool combined = false;          // 1/(theta p) <= 1 / (24 n Omega_n(pi-2a)^{1/2} log2(1/delta))
    bool via_alpha_delta = false;   // 1/(theta p) <= 1 / (12 Omega_n(alpha + delta))
    bool via_alpha = false;         // 1/(theta p) <= 1 / (36 Omega_n(alpha))
    bool alpha_range = false;       // 1.11 < alpha < pi/2
    bool sin_side = false;          // sin^2(alpha + delta) > sin(pi - 2 alpha)
    friend bool operator==(const Exact&, const Exact&) = default;
  } exact;

  /// Sufficient conditions derived from the closed-form cap bounds.
  struct Sufficient {
    bool bw_upper_valid = false;      // alpha <= arccos(1/sqrt(n+1))
    bool bw_upper_to_target = false;  // sqrt(2 pi n) cos(alpha) >= 1
    bool scaling_applicable = false;  // 1 + 1/n < pi / (2 alpha)
    bool via_alpha_implies_via_alpha_delta = false;
    bool via_alpha_delta_implies_combined = false;
    friend bool operator==(const Sufficient&, const Sufficient&) = default;
  } sufficient;

  /// N >= 1 and the three defining inequalities hold.
  [[nodiscard]] bool feasible() const {
    return exact.n_positive && exact.n_upper && exact.net_tail && exact.theta_at_least_6;
  }
  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Throws DomainError for D outside (1, 1.116) unless `relaxed`, in which case
/// the plan is marked out of the nominal range.
Plan plan_parameters(double bigD, int n, bool relaxed = false);

struct ScanTable {
  double bigD = 0.0;
  std::vector<Plan> rows;
  /// Smallest n from which each flag passes for every larger scanned n.
  std::optional<int> onset_n_positive, onset_n_upper, onset_net_tail, onset_theta;
  std::optional<int> first_feasible;
  /// Smallest n from which every scanned plan is feasible.
  std::optional<int> stable_feasible;
  friend bool operator==(const ScanTable&, const ScanTable&) = default;
};

ScanTable feasibility_scan(double bigD, int n_from, int n_to, bool relaxed = false);

/// n ln n + n ln ln n + 5n; requires n >= 3.
double covering_numerator(int n);

struct CapCover {
  int dim = 0;
  double radius = 0.0;
  PointSet centers;
  CoverageReport verification;
  int repair_rounds = 0;
  /// (d ln d + d ln ln d + 5d) / cap_measure(d, radius), for d >= 3.
  std::optional<double> numerator_bound;
  friend bool operator==(const CapCover&, const CapCover&) = default;
};

struct CoverOptions {
  std::uint64_t probes = 1000000;
  std::uint64_t verify_probes = 1000000;
  /// Uncovered probes scored per greedy step.
  std::size_t candidates = 64;
  int max_repair_rounds = 16;
  std::optional<std::size_t> size_cap;
  int workers = 0;
};

/// Greedy covering of S^{d-1} by caps of `radius`: each step adds the
/// candidate covering the most uncovered probes; fresh probe batches then
/// repair any gaps until one batch is fully covered.
CapCover greedy_cap_cover(int d, double radius, SeedSpec seed, const CoverOptions& opts = {});

struct UpperBound {
  double value = 0.0;
  double log_value = 0.0;
  bool formula = true;
  /// Covering count reported instead of the formula for n < 3.
  std::optional<std::size_t> cover_count;
};

/// Upper bound on i(K) for (1/D)B^n in K in B^n:
/// (n ln n + n ln ln n + 5n) / cap_measure(n, arcsin(1/D)).
UpperBound illumination_upper_bound(double bigD, int n, SeedSpec seed = {});

/// Vertices of a regular simplex inscribed in S^{d-1}.
PointSet simplex_directions(int d);

struct CoverCheck {
  bool pass = false;
  std::size_t cover_size = 0;
  /// Spike witnesses (index, negated) with no center within alpha of -(+-X_i).
  std::vector<std::pair<std::size_t, bool>> spike_failures;
  std::size_t ball_probes = 0;
  std::size_t ball_failures = 0;
  std::optional<UnitVector> ball_witness;
  std::size_t oracle_checked = 0;
  std::size_t oracle_disagreements = 0;
};

struct IlluminateOptions {
  std::size_t ball_probes = 1000;
  std::size_t oracle_samples = 8;
  SeedSpec seed{0x696c6c, 0};
  OracleOptions oracle;
};

/// Checks that the cover centers, used as directions, illuminate every spike
/// and a sample of boundary points. Requires cover.radius <= alpha.
CoverCheck illuminate_with_cover(const SpikyBody& body, const CapCover& cover, const IlluminateOptions& opts = {});

struct ParameterSum {
  double sum = 0.0;
  std::size_t points = 0;
  std::vector<double> gauges;
};

/// Sum of ||p||_K over a point set that illuminates every +-X_i from outside K.
/// Throws InvalidSetError (naming a witness) otherwise.
ParameterSum illumination_parameter_sum(const SpikyBody& body, const PointSet& points,
                                        const OracleOptions& opts = {});

/// Sum of ||p||_K over a point set whose convex hull contains K (checked on
/// the spikes and on `probes` support directions).
ParameterSum vertex_index_sum(const SpikyBody& body, const PointSet& points, std::size_t probes = 10000,
                              SeedSpec seed = {0x7665696e, 0}, const OracleOptions& opts = {});

}  // namespace spiky
