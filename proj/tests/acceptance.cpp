// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spiky/bounds.hpp"
#include "spiky/cap_calculus.hpp"
#include "spiky/errors.hpp"
#include "spiky/geometry_oracle.hpp"
#include "spiky/harness.hpp"
#include "spiky/serialization.hpp"

using namespace spiky;
using oracle::BigFloat;
constexpr double kPi = std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SpikyBody clean_body(int d, std::size_t n, double D, std::uint64_t master) {
  for (std::uint64_t s = 0;; ++s) {
    SpikyBody b = construct(d, n, D, SeedSpec{master, s});
    if (!check_e1(b).occurred) return b;
  }
}

ExperimentConfig base(ExperimentKind kind, std::uint64_t seed) {
  ExperimentConfig c;
  c.kind = kind;
  c.master_seed = seed;
  c.keep_records = false;
  return c;
}

// Counts +-X_i within `radius` of y by plain arccos; `closed` includes the rim.
std::uint32_t naive_multiplicity(const SpikyBody& b, std::span<const double> y, double radius, bool closed) {
  std::uint32_t m = 0;
  std::vector<double> neg(b.dim);
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (int k = 0; k < b.dim; ++k) neg[k] = -b.spikes[i][k];
    for (const auto& x : {std::vector<double>(b.spikes[i].begin(), b.spikes[i].end()), neg}) {
      const double a = oracle::angle_acos(y, x);
      m += closed ? a <= radius : a < radius;
    }
  }
  return m;
}

// --- 1 ---------------------------------------------------------------------
Outcome cap_bounds_grid() {
  Outcome o;
  int lower = 0, upper = 0, scaling = 0, violations = 0;
  for (int n = 1; n <= 50; ++n) {
    for (int k = 1; k <= 100; ++k) {
      const double phi = (kPi / 2) * k / 101;
      const double v = cap_measure(n + 1, phi);
      ++lower;
      violations += !(bw_lower(n, phi) < v);
      if (phi <= bw_upper_limit(n)) {
        ++upper;
        violations += !(v < bw_upper(n, phi));
      }
      // Scaling by t in (1, pi / (2 phi)); on the circle it is an equality.
      for (const double frac : {0.25, 0.5, 0.9}) {
        const double t = 1.0 + frac * (kPi / (2 * phi) - 1.0);
        if (!(t > 1.0) || t * phi >= kPi / 2) continue;
        ++scaling;
        violations += !(cap_measure(n + 1, t * phi) <= cap_scaling_bound(n, phi, t) * (1 + 1e-12));
      }
    }
  }
  o.require(violations == 0, fmt("%d violations", violations));
  o.detail = fmt("%d lower, %d upper, %d scaling checks, %d violations", lower, upper, scaling, violations);
  o.pass = violations == 0;
  return o;
}

// --- 2 ---------------------------------------------------------------------
Outcome cap_measure_agreement() {
  Outcome o;
  double worst = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double phi = kPi * k / 1000;
    const double s = std::sin(phi / 2);
    const double circle = phi / kPi;
    const double sphere = s * s;
    worst = std::max(worst, std::abs(cap_measure(2, phi) - circle) / circle);
    worst = std::max(worst, std::abs(cap_measure(3, phi) - sphere) / sphere);
  }
  o.require(worst <= 1e-10, fmt("closed-form relative error %.3g", worst));

  const std::vector<double> phis{0.3, 0.8, 1.2, 1.5707963267948966, 2.2};
  double worst_z = 0.0;
  for (int d : {4, 8}) {
    std::mt19937_64 gen(0x5eed0000u + d);
    std::normal_distribution<double> g;
    std::vector<std::uint64_t> hits(phis.size(), 0);
    const std::uint64_t samples = 10'000'000;
    std::vector<double> x(d);
    for (std::uint64_t s = 0; s < samples; ++s) {
      double n2 = 0.0;
      for (auto& v : x) {
        v = g(gen);
        n2 += v * v;
      }
      const double c = x[0] / std::sqrt(n2);
      for (std::size_t j = 0; j < phis.size(); ++j) hits[j] += c >= std::cos(phis[j]);
    }
    for (std::size_t j = 0; j < phis.size(); ++j) {
      const double q = cap_measure(d, phis[j]);
      const double f = static_cast<double>(hits[j]) / samples;
      const double z = std::abs(f - q) / std::sqrt(q * (1 - q) / samples);
      worst_z = std::max(worst_z, z);
      o.require(z <= 4.0, fmt("d=%d phi=%.3f off by %.2f sigma", d, phis[j], z));
    }
  }
  if (o.pass) o.detail = fmt("closed forms within %.2g relative, Monte Carlo within %.2f sigma", worst, worst_z);
  return o;
}

// --- 3 ---------------------------------------------------------------------
Outcome chernoff_suite() {
  Outcome o;
  ExperimentConfig c = base(ExperimentKind::McChernoff, 0xc4e7);
  c.spikes = {20, 40, 60, 80, 100, 120, 140, 160, 180, 200};
  c.success_probs = {0.002, 0.01, 0.03, 0.08, 0.16};
  c.theta = 6.0;
  c.trials = 1'000'000;
  int exact_checks = 0;
  for (const auto N : c.spikes) {
    for (const double p : c.success_probs) {
      const double T = 6.0 * N * p;
      const double exact = binomial_tail_exact(static_cast<std::int64_t>(N), p, T);
      const double ref = oracle::binomial_tail_ibeta(static_cast<long>(N), p, T);
      ++exact_checks;
      o.require(exact <= chernoff_bound(static_cast<std::int64_t>(N), p, 6.0).bound(),
                fmt("exact tail above 2^(-6Np) at N=%d p=%g", static_cast<int>(N), p));
      o.require(std::abs(exact - ref) <= 1e-9 * ref + 1e-300,
                fmt("exact tail disagrees with incomplete beta at N=%d p=%g", static_cast<int>(N), p));
    }
  }
  const auto r = run_campaign(c);
  int failing = 0;
  for (const auto& claim : r.claims) failing += !claim.pass;
  o.require(r.claims.size() == 100, fmt("expected 100 claims, got %zu", r.claims.size()));
  o.require(failing == 0, fmt("%d empirical claims fail", failing));
  o.require(!r.partial_failure, "trial errors");
  if (o.pass) o.detail = fmt("%d grid points, %zu empirical claims at 1e6 trials", exact_checks, r.claims.size());
  return o;
}

// --- 4 ---------------------------------------------------------------------
Outcome e1_bound() {
  Outcome o;
  ExperimentConfig c = base(ExperimentKind::McE1, 0xe1);
  c.dims = {3};
  c.spikes = {2, 5, 10};
  c.bigD = 1.1;
  c.trials = 100000;
  const auto r = run_campaign(c);
  o.require(r.claims.size() == 4, fmt("expected 4 claims, got %zu", r.claims.size()));
  std::string summary;
  for (const auto& claim : r.claims) {
    o.require(claim.pass, fmt("cell %d: %s (%.4f vs %.4f)", static_cast<int>(claim.cell), claim.name.c_str(),
                              claim.empirical, claim.bound));
    if (claim.relation == "==") summary = fmt("N=2: %.4f vs exact %.4f", claim.empirical, claim.bound);
  }
  // The exact pair probability is checked against an independent cap measure.
  const double alpha = std::asin(1 / 1.1);
  const double exact = 2 * oracle::cap_measure_ibeta(3, kPi - 2 * alpha);
  for (const auto& claim : r.claims) {
    if (claim.relation == "==") o.require(std::abs(claim.bound - exact) <= 1e-12, "pair probability mismatch");
  }
  if (o.pass) o.detail = summary + ", all bounds hold";
  return o;
}

// --- 5 ---------------------------------------------------------------------
Outcome fact_cap() {
  Outcome o;
  std::string summary;
  for (const double D : {1.05, 1.1}) {
    ExperimentConfig c = base(ExperimentKind::FactCap, 0xfac7);
    c.dims = {3, 4};
    c.spikes = {3};
    c.bigD = D;
    c.trials = 600;
    c.probes_per_trial = 8;
    const auto r = run_campaign(c);
    for (const auto& s : r.cells) {
      o.require(s.disagreements == 0, fmt("d=%d D=%.2f: %d disagreements", s.dim, D, static_cast<int>(s.disagreements)));
      o.require(s.agreements >= 1000, fmt("d=%d D=%.2f: only %d probes", s.dim, D, static_cast<int>(s.agreements)));
      summary += fmt("%s(d=%d,D=%.2f):%d/%d", summary.empty() ? "" : " ", s.dim, D,
                     static_cast<int>(s.agreements), static_cast<int>(s.agreements + s.disagreements));
    }
    o.require(!r.partial_failure, "trial errors");
  }
  if (o.pass) o.detail = summary;
  return o;
}

// --- 6 ---------------------------------------------------------------------
Outcome certificate_soundness(std::vector<double>& per_body_seconds) {
  Outcome o;
  struct Case {
    int d;
    std::size_t n;
    std::uint64_t seed;
  };
  int emitted = 0, refused = 0;
  for (const Case cs : {Case{3, 3, 1}, Case{3, 4, 2}, Case{4, 5, 3}, Case{5, 8, 4}, Case{5, 200, 5}}) {
    const auto start = std::chrono::steady_clock::now();
    const double D = 1.1;
    const SpikyBody body = cs.n == 200 ? construct(cs.d, cs.n, D, SeedSpec{cs.seed, 0}) : clean_body(cs.d, cs.n, D, cs.seed);
    const double alpha = body.alpha();
    DeltaNet net = build_delta_net(cs.d, alpha / (cs.d - 1), SeedSpec{cs.seed, 100});
    verify_net_coverage(net, 100000, SeedSpec{cs.seed, 101});
    const Certificate cert = certify(body, net, 6.0);
    if (!cert.lower_bound) {
      ++refused;
      // A refusal must be backed by a genuine witness.
      if (cert.e1.occurred && !cert.e1.pairs.empty()) {
        for (const auto& w : cert.e1.pairs) {
          std::vector<double> neg(body.spikes[w.i].begin(), body.spikes[w.i].end());
          for (auto& v : neg) v = -v;
          const double a = std::min(oracle::angle_acos(body.spikes[w.i], body.spikes[w.j]),
                                    oracle::angle_acos(neg, body.spikes[w.j]));
          o.require(a <= kPi - 2 * alpha + 1e-9, "bogus E1 witness");
        }
      } else {
        o.require(cert.e2prime.occurred, "certificate refused without an event");
      }
    } else {
      ++emitted;
      const double p = 2 * oracle::cap_measure_ibeta(cs.d, alpha + cert.delta);
      o.require(std::abs(*cert.lower_bound - 2 / (6.0 * p)) <= 1e-9 * *cert.lower_bound, "lower bound is not 2/(theta p)");
      std::uint32_t worst = 0;
      for (std::size_t k = 0; k < net.centers.size(); ++k) {
        worst = std::max(worst, naive_multiplicity(body, net.centers[k], alpha + cert.delta, true));
      }
      o.require(worst == cert.e2prime.max_multiplicity,
                fmt("d=%d: recount %u vs reported %u", cs.d, worst, cert.e2prime.max_multiplicity));
      o.require(worst <= cert.T, "net multiplicity above T");
      std::mt19937_64 gen(cs.seed);
      std::uint32_t sweep = 0;
      for (int k = 0; k < 100000; ++k) {
        const auto u = oracle::random_unit(cs.d, gen);
        sweep = std::max(sweep, naive_multiplicity(body, u, alpha, false));
      }
      o.require(sweep <= cert.T, fmt("d=%d: direction sees %u > T spikes", cs.d, sweep));
    }
    per_body_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  o.require(emitted > 0, "no certificate emitted");
  if (o.pass) o.detail = fmt("%d certificates recounted and swept, %d refusals with witnesses", emitted, refused);
  return o;
}

// --- 7 ---------------------------------------------------------------------
Outcome planner_regime() {
  Outcome o;
  // 1/18 against 1/20 as integers: 20 > 18.
  o.require(BigFloat(1) / 18 > BigFloat(1) / 20 && 20 > 18, "1/18 < 1/20");
  for (int n = 2; n <= 2000; ++n) {
    const Plan p = plan_parameters(1.1, n);
    const BigFloat exact = boost::multiprecision::pow(BigFloat(1.1), n) / 18;
    const double log_exact = boost::multiprecision::log(exact).convert_to<double>();
    if (std::abs(p.log_lower_bound - log_exact) > 1e-12 * std::max(1.0, std::abs(log_exact))) {
      o.require(false, fmt("lower bound off at n=%d", n));
      break;
    }
    if (!(p.log_lower_bound >= std::log(0.05) + n * std::log(1.1))) {
      o.require(false, fmt("below 0.05 D^n at n=%d", n));
      break;
    }
  }
  const ScanTable t = feasibility_scan(1.1, 2, 2000);
  o.require(t.first_feasible == 2 && t.stable_feasible == 2, "onset moved from the pinned n = 2");
  if (t.first_feasible) {
    const Plan& on = t.rows.at(*t.first_feasible - 2);
    const int n = on.n;
    const double omega = oracle::cap_measure_ibeta(n + 1, kPi - 2 * on.alpha);
    const double pp = 2 * oracle::cap_measure_ibeta(n + 1, on.alpha + on.delta);
    o.require(on.N >= 1.0, "N < 1 at onset");
    o.require(on.N <= std::sqrt(1 / (4 * omega)) * (1 + 1e-12), "N above the E1 limit at onset");
    o.require(2 * std::log(n) - n * std::log(std::sin(on.delta)) - on.N * on.theta * pp * std::log(2.0) <=
                  -std::log(4.0) + 1e-9,
              "net tail condition fails at onset");
    o.require(on.theta >= 6.0, "theta < 6 at onset");
  }
  const Plan p2 = plan_parameters(1.1, 2);
  o.require(p2.alpha == 0x1.241ee92709dcap+0 && p2.delta == 0x1.241ee92709dcap-1 && p2.N == 1.0 &&
                p2.p == 0x1.23f02b0bd3e7cp+0 && p2.theta == 0x1.a16eb5a95d92dp+4 && p2.T == 0x1.dc08767ab5f32p+4 &&
                p2.lower_bound == 0x1.13579be02468dp-4,
            "pinned n = 2 plan changed");
  const Plan p100 = plan_parameters(1.1, 100);
  o.require(p100.N == 0x1.0c02fp+21 && p100.lower_bound == 0x1.7ecb772cd187dp+9, "pinned n = 100 plan changed");
  o.require(plan_parameters(1.1, 5).N == 2.0, "pinned n = 5 plan changed");
  o.require(feasibility_scan(1.115, 2, 600).stable_feasible == 559, "pinned D = 1.115 onset changed");
  if (o.pass) o.detail = "lower bound D^n/18 for n <= 2000, onset n = 2 at D = 1.1 (559 at D = 1.115)";
  return o;
}

// --- 8 ---------------------------------------------------------------------
Outcome covering_consistency() {
  Outcome o;
  const double D = 1.1;
  const double alpha = std::asin(1 / D);
  std::string summary;
  for (int d : {3, 4, 5}) {
    CoverOptions opts;
    opts.probes = 200000;
    opts.verify_probes = 1000000;
    const CapCover cover = greedy_cap_cover(d, alpha, SeedSpec{0xc0e7, static_cast<std::uint64_t>(d)}, opts);
    const double limit = covering_numerator(d) / oracle::cap_measure_ibeta(d, alpha);
    o.require(cover.verification.pass, fmt("d=%d cover not verified", d));
    o.require(static_cast<double>(cover.centers.size()) <= limit, fmt("d=%d cover above the bound", d));
    const SpikyBody body = clean_body(d, d == 3 ? 3 : 4, D, 0xc0e7 + d);
    const CoverCheck check = illuminate_with_cover(body, cover);
    o.require(check.pass && check.oracle_disagreements == 0, fmt("d=%d cover fails to illuminate", d));
    DeltaNet net = build_delta_net(d, alpha / (d - 1), SeedSpec{0xc0e7, 10u + d});
    verify_net_coverage(net, 100000, SeedSpec{0xc0e7, 20u + d});
    const Certificate cert = certify(body, net, 6.0);
    const UpperBound ub = illumination_upper_bound(D, d);
    if (cert.lower_bound) {
      o.require(ub.value >= *cert.lower_bound, fmt("d=%d upper bound below certified lower bound", d));
      o.require(static_cast<double>(cover.centers.size()) >= *cert.lower_bound, fmt("d=%d cover below lower bound", d));
    }
    summary += fmt("%sd=%d: %zu caps (bound %.0f)", summary.empty() ? "" : ", ", d, cover.centers.size(), limit);
  }
  if (o.pass) o.detail = summary;
  return o;
}

// --- 9 ---------------------------------------------------------------------
Outcome smooth_baseline() {
  Outcome o;
  int probes = 0, lit = 0;
  for (int d : {3, 4, 5}) {
    const SpikyBody ball = SpikyBody::unit_ball(d);
    const PointSet simplex = simplex_directions(d);
    std::mt19937_64 gen(0xba11 + d);
    for (int k = 0; k < 1000; ++k) {
      const auto b = oracle::random_unit(d, gen);
      ++probes;
      bool any = false;
      for (std::size_t j = 0; j < simplex.size() && !any; ++j) {
        const auto u = UnitVector::normalized(std::vector<double>(simplex[j].begin(), simplex[j].end()));
        const auto trace = illuminates_at(ball, b, u);
        any = trace.illuminated && !trace.ambiguous;
      }
      lit += any;
    }
  }
  o.require(lit == probes, fmt("%d of %d boundary points unlit", probes - lit, probes));
  if (o.pass) o.detail = fmt("%d/%d boundary probes illuminated", lit, probes);
  return o;
}

// --- 10 --------------------------------------------------------------------
Outcome application_inequality() {
  Outcome o;
  const SpikyBody body = clean_body(3, 3, 1.1, 0xa991);
  DeltaNet net = build_delta_net(3, body.alpha() / 2, SeedSpec{0xa991, 1});
  verify_net_coverage(net, 100000, SeedSpec{0xa991, 2});
  const Certificate cert = certify(body, net, 6.0);
  o.require(cert.lower_bound.has_value(), "body not certified");
  for (const double scale : {2.0, 3.5}) {
    PointSet pts(3);
    for (std::size_t i = 0; i < body.size(); ++i) {
      std::vector<double> p(3);
      for (int k = 0; k < 3; ++k) p[k] = scale * body.spikes[i][k];
      pts.push_back(p);
      for (auto& x : p) x = -x;
      pts.push_back(p);
    }
    const ParameterSum s = illumination_parameter_sum(body, pts);
    o.require(s.sum >= static_cast<double>(s.points), "parameter sum below point count");
    if (cert.lower_bound) o.require(static_cast<double>(s.points) >= *cert.lower_bound, "point count below lower bound");
  }
  double worst = 0.0;
  for (int n : {2, 3, 4, 5, 8}) {
    PointSet pts(n);
    for (int k = 0; k < n; ++k) {
      std::vector<double> v(n, 0.0);
      v[k] = std::sqrt(static_cast<double>(n));
      pts.push_back(v);
      v[k] = -v[k];
      pts.push_back(v);
    }
    const ParameterSum s = vertex_index_sum(SpikyBody::unit_ball(n), pts, 20000);
    const double target = 2 * n * std::sqrt(static_cast<double>(n));
    worst = std::max(worst, std::abs(s.sum - target) / target);
  }
  // Equal up to the rounding of sqrt(n).
  o.require(worst <= 4 * std::numeric_limits<double>::epsilon(), fmt("cross-polytope sum off by %.3g", worst));
  if (o.pass) o.detail = fmt("parameter sums >= points >= %.3g; cross-polytope 2n^1.5 within %.1g", *cert.lower_bound, worst);
  return o;
}

// --- 11 --------------------------------------------------------------------
Outcome reproducibility() {
  Outcome o;
  std::vector<ExperimentConfig> configs;
  auto add = [&](ExperimentKind kind, auto tweak) {
    ExperimentConfig c = base(kind, 0x5151);
    c.keep_records = true;
    tweak(c);
    configs.push_back(c);
  };
  add(ExperimentKind::McE1, [](auto& c) {
    c.spikes = {2, 5};
    c.trials = 20000;
  });
  add(ExperimentKind::McE2, [](auto& c) {
    c.spikes = {8};
    c.trials = 100;
    c.delta_policy = "explicit";
    c.delta = 0.4;
    c.probes = 5000;
  });
  add(ExperimentKind::McChernoff, [](auto& c) {
    c.spikes = {50, 200};
    c.trials = 50000;
  });
  add(ExperimentKind::FactCap, [](auto& c) {
    c.spikes = {3};
    c.trials = 60;
  });
  add(ExperimentKind::EndToEnd, [](auto& c) {
    c.spikes = {3};
    c.trials = 30;
    c.delta_policy = "explicit";
    c.delta = 0.4;
    c.probes = 5000;
  });
  add(ExperimentKind::Scan, [](auto& c) { c.n_to = 300; });
  add(ExperimentKind::CoverBench, [](auto& c) {
    c.trials = 3;
    c.probes = 20000;
  });
  for (auto c : configs) {
    c.workers = 1;
    const std::string ref = report_to_json(run_campaign(c)).dump();
    for (int w : {4, 16}) {
      c.workers = w;
      o.require(report_to_json(run_campaign(c)).dump() == ref,
                fmt("%s differs at %d workers", std::string(kind_name(c.kind)).c_str(), w));
    }
  }
  if (o.pass) o.detail = fmt("%zu campaign kinds identical at 1, 4 and 16 workers", configs.size());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  std::vector<double> body_seconds;
  const std::vector<Criterion> criteria{
      {1, "cap bounds grid", 10, cap_bounds_grid},
      {2, "cap measure agreement", 60, cap_measure_agreement},
      {3, "binomial tail suite", 120, chernoff_suite},
      {4, "E1 probability bound", 120, e1_bound},
      {5, "illumination cap equivalence", 300, fact_cap},
      {6, "certificate soundness", 0, [&] { return certificate_soundness(body_seconds); }},
      {7, "planner regime", 60, planner_regime},
      {8, "covering upper bound", 600, covering_consistency},
      {9, "smooth body baseline", 60, smooth_baseline},
      {10, "parameter sum gap", 60, application_inequality},
      {11, "worker-count reproducibility", 0, reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget > 0 && seconds > c.budget) o.require(false, fmt("took %.1f s, budget %.0f s", seconds, c.budget));
    if (c.id == 6) {
      for (const double s : body_seconds) {
        if (s > 120) o.require(false, fmt("a body took %.1f s, budget 120 s", s));
      }
    }
    failures += !o.pass;
    std::printf("%s  %2d  %-30s %7.1f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
