#include "spiky/bounds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spiky/cap_calculus.hpp"
#include "spiky/errors.hpp"
#include "spiky/kernels.hpp"

namespace spiky {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> row_vector(std::span<const double> r) { return {r.begin(), r.end()}; }

}  // namespace

Plan plan_parameters(double bigD, int n, bool relaxed) {
  if (n < 2) throw DomainError("plan_parameters: n must be >= 2");
  const bool in_range = bigD > 1.0 && bigD < 1.116;
  if (!in_range && !relaxed) throw DomainError("plan_parameters: D must lie in (1, 1.116)");
  if (!(bigD > 1.0 && bigD < std::numbers::sqrt2)) throw DomainError("plan_parameters: D must lie in (1, sqrt(2))");

  Plan pl;
  pl.bigD = bigD;
  pl.n = n;
  pl.dim = n + 1;
  pl.in_nominal_range = in_range;
  pl.alpha = std::asin(1.0 / bigD);
  pl.delta = pl.alpha / n;

  const int d = n + 1;
  const double log_D = std::log(bigD);
  const double log_omega_conflict = log_cap_measure(d, kPi - 2.0 * pl.alpha);
  const double log_omega_grown = log_cap_measure(d, pl.alpha + pl.delta);
  const double log_omega_alpha = log_cap_measure(d, pl.alpha);

  pl.log_p = std::log(2.0) + log_omega_grown;
  pl.p = std::exp(pl.log_p);
  // 1 / (theta p) = D^n / 36.
  pl.log_theta = std::log(36.0) - pl.log_p - n * log_D;
  pl.theta = std::exp(pl.log_theta);

  const double log_n_real = -0.5 * (std::log(4.0) + log_omega_conflict);
  if (log_n_real < 53.0 * std::log(2.0)) {
    double N = std::floor(std::exp(log_n_real));
    // Guard the floor against a one-ulp overshoot of exp.
    while (N >= 1.0 && std::log(4.0) + log_omega_conflict + 2.0 * std::log(N) > 0.0) N -= 1.0;
    pl.N = N;
    pl.log_N = N >= 1.0 ? std::log(N) : -INFINITY;
  } else {
    pl.log_N = log_n_real;
    pl.N = std::exp(log_n_real);
  }
  pl.log_T = pl.log_N + std::log(36.0) - n * log_D;
  pl.T = std::exp(pl.log_T);
  pl.log_lower_bound = n * log_D - std::log(18.0);
  pl.lower_bound = std::exp(pl.log_lower_bound);

  // log(1 / (theta p)).
  const double log_target = n * log_D - std::log(36.0);
  auto& ex = pl.exact;
  ex.n_positive = pl.N >= 1.0;
  ex.n_upper = ex.n_positive && std::log(4.0) + log_omega_conflict + 2.0 * pl.log_N <= 0.0;
  ex.net_tail = ex.n_positive &&
                2.0 * std::log(static_cast<double>(n)) - n * std::log(std::sin(pl.delta)) - pl.T * std::log(2.0) <=
                    -std::log(4.0);
  ex.theta_at_least_6 = pl.log_theta >= std::log(6.0);
  ex.combined = log_target <= -(std::log(24.0) + std::log(static_cast<double>(n)) + 0.5 * log_omega_conflict +
                                std::log(std::log2(1.0 / pl.delta)));
  ex.via_alpha_delta = log_target <= -(std::log(12.0) + log_omega_grown);
  ex.via_alpha = log_target <= -(std::log(36.0) + log_omega_alpha);
  ex.alpha_range = pl.alpha > 1.11 && pl.alpha < kPi / 2;
  ex.sin_side = std::pow(std::sin(pl.alpha + pl.delta), 2) > std::sin(kPi - 2.0 * pl.alpha);

  auto& su = pl.sufficient;
  su.bw_upper_valid = pl.alpha <= bw_upper_limit(n);
  su.bw_upper_to_target = std::sqrt(2.0 * kPi * n) * std::cos(pl.alpha) >= 1.0;
  su.scaling_applicable = 1.0 + 1.0 / n < kPi / (2.0 * pl.alpha);
  // Omega(alpha + delta) < (1 + 1/n)^n Omega(alpha) < 3 Omega(alpha).
  su.via_alpha_implies_via_alpha_delta = su.scaling_applicable && std::pow(1.0 + 1.0 / n, n) <= 3.0;
  // 12 Omega(alpha + delta) >= 24 n log2(1/delta) Omega(pi - 2 alpha)^{1/2}
  // through the lower bound at alpha + delta and the upper bound at pi - 2 alpha.
  const double conflict = kPi - 2.0 * pl.alpha;
  if (pl.alpha + pl.delta < kPi / 2 && conflict <= bw_upper_limit(n)) {
    const double lhs = std::log(12.0) + log_bw_lower(n, pl.alpha + pl.delta);
    const double rhs = std::log(24.0) + std::log(static_cast<double>(n)) + std::log(std::log2(1.0 / pl.delta)) +
                       0.5 * log_bw_upper(n, conflict);
    su.via_alpha_delta_implies_combined = ex.sin_side && lhs >= rhs;
  }
  return pl;
}

ScanTable feasibility_scan(double bigD, int n_from, int n_to, bool relaxed) {
  if (n_from < 2 || n_to < n_from) throw DomainError("feasibility_scan: need 2 <= n_from <= n_to");
  ScanTable table;
  table.bigD = bigD;
  for (int n = n_from; n <= n_to; ++n) table.rows.push_back(plan_parameters(bigD, n, relaxed));
  const auto onset = [&](auto flag) -> std::optional<int> {
    std::optional<int> first;
    for (auto it = table.rows.rbegin(); it != table.rows.rend(); ++it) {
      if (!flag(*it)) break;
      first = it->n;
    }
    return first;
  };
  table.onset_n_positive = onset([](const Plan& p) { return p.exact.n_positive; });
  table.onset_n_upper = onset([](const Plan& p) { return p.exact.n_upper; });
  table.onset_net_tail = onset([](const Plan& p) { return p.exact.net_tail; });
  table.onset_theta = onset([](const Plan& p) { return p.exact.theta_at_least_6; });
  table.stable_feasible = onset([](const Plan& p) { return p.feasible(); });
  for (const auto& row : table.rows) {
    if (row.feasible()) {
      table.first_feasible = row.n;
      break;
    }
  }
  return table;
}

double covering_numerator(int n) {
  if (n < 3) throw DomainError("covering_numerator: n ln ln n needs n >= 3");
  const double x = n;
  return x * std::log(x) + x * std::log(std::log(x)) + 5.0 * x;
}

CapCover greedy_cap_cover(int d, double radius, SeedSpec seed, const CoverOptions& opts) {
  if (d < 2) throw DomainError("greedy_cap_cover: dimension must be >= 2");
  if (!(radius > 0.0 && radius < kPi / 2)) throw DomainError("greedy_cap_cover: radius must lie in (0, pi/2)");
  const auto cap = opts.size_cap.value_or(static_cast<std::size_t>(std::ceil(10.0 * rogers_bound(d, radius))));
  const double cos_r = std::cos(radius);

  CapCover cover;
  cover.dim = d;
  cover.radius = radius;
  cover.centers = PointSet(d);
  const auto add_center = [&](std::span<const double> c) {
    cover.centers.push_back(c);
    if (cover.centers.size() > cap) {
      throw ResourceError("greedy_cap_cover: cover exceeds size cap " + std::to_string(cap));
    }
  };

  const PointSet targets = uniform_cloud(d, opts.probes, seed.child(0), opts.workers);
  std::vector<std::uint8_t> covered(targets.size(), 0);
  std::uint64_t remaining = targets.size();
  std::size_t scan_from = 0;
  while (remaining > 0) {
    PointSet candidates(d);
    for (std::size_t t = scan_from; t < targets.size() && candidates.size() < opts.candidates; ++t) {
      if (covered[t]) {
        if (candidates.empty()) scan_from = t + 1;
        continue;
      }
      candidates.push_back(targets[t]);
    }
    const auto gains = kernels::omp::coverage_gains(candidates, targets, covered, cos_r, opts.workers);
    const auto best = static_cast<std::size_t>(std::max_element(gains.begin(), gains.end()) - gains.begin());
    add_center(candidates[best]);
    remaining -= kernels::omp::mark_covered(candidates[best], targets, covered, cos_r, opts.workers);
  }

  for (int round = 0;; ++round) {
    const SeedSpec batch_seed = seed.child(1000 + static_cast<std::uint64_t>(round));
    const auto scan =
        kernels::omp::coverage_scan(cover.centers, cos_r, opts.verify_probes, batch_seed, 256, opts.workers);
    cover.verification.probes = opts.verify_probes;
    cover.verification.uncovered = scan.uncovered;
    cover.verification.worst_angle = std::acos(std::clamp(scan.worst_dot, -1.0, 1.0));
    cover.verification.pass = scan.uncovered == 0;
    if (cover.verification.pass) {
      cover.verification.witness.reset();
      cover.verification.confidence = 1.0 + std::log(0.05) / static_cast<double>(opts.verify_probes);
      break;
    }
    cover.verification.witness = sample_uniform(d, batch_seed.child(scan.worst_index));
    cover.verification.confidence = 0.0;
    if (round >= opts.max_repair_rounds) break;
    ++cover.repair_rounds;
    // Each uncovered probe not yet covered by this round's additions becomes a center.
    const std::size_t before = cover.centers.size();
    for (const auto k : scan.uncovered_indices) {
      const UnitVector u = sample_uniform(d, batch_seed.child(k));
      bool hit = false;
      for (std::size_t c = before; c < cover.centers.size() && !hit; ++c) {
        hit = vec::dot(u.coords(), cover.centers[c]) >= cos_r;
      }
      if (!hit) add_center(u.coords());
    }
  }
  if (d >= 3) cover.numerator_bound = covering_numerator(d) / cap_measure(d, radius);
  return cover;
}

UpperBound illumination_upper_bound(double bigD, int n, SeedSpec seed) {
  if (!(bigD > 1.0) || !std::isfinite(bigD)) throw DomainError("illumination_upper_bound: D must be > 1");
  if (n < 2) throw DomainError("illumination_upper_bound: n must be >= 2");
  const double alpha = std::asin(1.0 / bigD);
  UpperBound ub;
  if (n < 3) {
    // n ln ln n is not positive here; report a constructed covering instead.
    CoverOptions opts;
    opts.probes = 100000;
    opts.verify_probes = 100000;
    const auto cover = greedy_cap_cover(n, alpha * (1.0 - 1e-9), seed, opts);
    ub.formula = false;
    ub.cover_count = cover.centers.size();
    ub.value = static_cast<double>(cover.centers.size());
    ub.log_value = std::log(ub.value);
    return ub;
  }
  ub.log_value = std::log(covering_numerator(n)) - log_cap_measure(n, alpha);
  ub.value = std::exp(ub.log_value);
  return ub;
}

PointSet simplex_directions(int d) {
  if (d < 2) throw DomainError("simplex_directions: dimension must be >= 2");
  // Centered standard basis of R^{d+1}, expressed in an orthonormal basis of
  // the hyperplane orthogonal to (1, ..., 1).
  const int m = d + 1;
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
  Eigen::MatrixXd B(m, d);
  for (int k = 0; k < d; ++k) B.col(k) = V.col(k);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, d);
  PointSet out(d);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd c = Q.transpose() * V.col(i);
    c.normalize();
    out.push_back(std::span<const double>(c.data(), static_cast<std::size_t>(d)));
  }
  return out;
}

CoverCheck illuminate_with_cover(const SpikyBody& body, const CapCover& cover, const IlluminateOptions& opts) {
  if (cover.dim != body.dim) throw DomainError("illuminate_with_cover: dimension mismatch");
  const double alpha = body.alpha();
  if (cover.radius > alpha) {
    throw PreconditionError("illuminate_with_cover: cover radius must not exceed arcsin(1/D)");
  }
  const int d = body.dim;
  CoverCheck check;
  check.cover_size = cover.centers.size();
  const auto piercing_center = [&](std::span<const double> target) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < cover.centers.size(); ++c) {
      if (angle(cover.centers[c], target) < alpha - kTieTolerance) return c;
    }
    return std::nullopt;
  };
  std::vector<double> target(d);
  for (std::size_t i = 0; i < body.size(); ++i) {
    for (const bool negated : {false, true}) {
      // Directions illuminating +-X_i form the open cap around -(+-X_i).
      for (int k = 0; k < d; ++k) target[k] = negated ? body.spikes[i][k] : -body.spikes[i][k];
      const auto c = piercing_center(target);
      if (!c) {
        check.spike_failures.emplace_back(i, negated);
        continue;
      }
      if (check.oracle_checked < opts.oracle_samples) {
        ++check.oracle_checked;
        if (!illuminates(body, i, cover.centers.unit(*c), opts.oracle, negated).illuminated) {
          ++check.oracle_disagreements;
        }
      }
    }
  }
  // Boundary points b = v / ||v||_K: every direction within arcsin(r/|b|) >= alpha
  // of -v illuminates K at b.
  const PointSet probes = uniform_cloud(d, opts.ball_probes, opts.seed);
  std::size_t oracle_ball = 0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    ++check.ball_probes;
    for (int j = 0; j < d; ++j) target[j] = -probes[k][j];
    const auto c = piercing_center(target);
    if (!c) {
      ++check.ball_failures;
      if (!check.ball_witness) check.ball_witness = probes.unit(k);
      continue;
    }
    if (oracle_ball < opts.oracle_samples) {
      ++oracle_ball;
      ++check.oracle_checked;
      const double g = gauge(body, probes[k], opts.oracle).value;
      std::vector<double> b = row_vector(probes[k]);
      for (double& x : b) x /= g;
      if (!illuminates_at(body, b, cover.centers.unit(*c), opts.oracle).illuminated) ++check.oracle_disagreements;
    }
  }
  check.pass = check.spike_failures.empty() && check.ball_failures == 0 && check.oracle_disagreements == 0;
  return check;
}

ParameterSum illumination_parameter_sum(const SpikyBody& body, const PointSet& points, const OracleOptions& opts) {
  if (points.empty()) throw InvalidSetError("illumination_parameter_sum: empty point set");
  if (points.dim() != body.dim) throw DomainError("illumination_parameter_sum: dimension mismatch");
  ParameterSum out;
  out.points = points.size();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double g = gauge(body, points[k], opts).value;
    if (!(g > 1.0)) {
      std::ostringstream os;
      os << "illumination_parameter_sum: point " << k << " is not outside K (gauge " << g << ")";
      throw InvalidSetError(os.str());
    }
    out.gauges.push_back(g);
    out.sum += g;
  }
  std::vector<double> b(body.dim);
  std::vector<double> dir(body.dim);
  for (std::size_t i = 0; i < body.size(); ++i) {
    for (const bool negated : {false, true}) {
      for (int j = 0; j < body.dim; ++j) b[j] = negated ? -body.spikes[i][j] : body.spikes[i][j];
      bool lit = false;
      for (std::size_t k = 0; k < points.size() && !lit; ++k) {
        // A point source p lights b along the direction b - p.
        for (int j = 0; j < body.dim; ++j) dir[j] = b[j] - points[k][j];
        if (vec::norm(dir) == 0.0) continue;
        lit = cap_predicate(body, i, UnitVector::normalized(dir), negated);
      }
      if (!lit) {
        std::ostringstream os;
        os << "illumination_parameter_sum: spike " << (negated ? "-X_" : "X_") << i << " is not illuminated";
        throw InvalidSetError(os.str());
      }
    }
  }
  return out;
}

ParameterSum vertex_index_sum(const SpikyBody& body, const PointSet& points, std::size_t probes, SeedSpec seed,
                              const OracleOptions& opts) {
  if (points.empty()) throw InvalidSetError("vertex_index_sum: empty point set");
  if (points.dim() != body.dim) throw DomainError("vertex_index_sum: dimension mismatch");
  const auto hull_support = [&](std::span<const double> w) {
    double h = -INFINITY;
    for (std::size_t k = 0; k < points.size(); ++k) h = std::max(h, vec::dot(points[k], w));
    return h;
  };
  PointSet directions = uniform_cloud(body.dim, probes, seed);
  for (std::size_t i = 0; i < body.size(); ++i) {
    directions.push_back(body.spikes[i]);
    std::vector<double> neg = row_vector(body.spikes[i]);
    for (double& x : neg) x = -x;
    directions.push_back(neg);
  }
  for (std::size_t k = 0; k < directions.size(); ++k) {
    if (support(body, directions[k]) > hull_support(directions[k]) + 1e-12) {
      throw InvalidSetError("vertex_index_sum: convex hull of the points does not contain K");
    }
  }
  ParameterSum out;
  out.points = points.size();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double g = gauge(body, points[k], opts).value;
    out.gauges.push_back(g);
    out.sum += g;
  }
  return out;
}

}  // namespace spiky
