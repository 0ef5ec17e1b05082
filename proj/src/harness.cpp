#include "spiky/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "spiky/cap_calculus.hpp"
#include "spiky/errors.hpp"
#include "spiky/geometry_oracle.hpp"
#include "spiky/kernels.hpp"

namespace spiky {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::McE1, "mc-e1"},         {ExperimentKind::McE2, "mc-e2"},
    {ExperimentKind::McChernoff, "mc-chernoff"}, {ExperimentKind::FactCap, "factcap"},
    {ExperimentKind::EndToEnd, "end-to-end"}, {ExperimentKind::Scan, "scan"},
    {ExperimentKind::CoverBench, "cover-bench"},
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double uniform01(Stream& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

bool uses_bodies(ExperimentKind k) {
  return k == ExperimentKind::McE1 || k == ExperimentKind::McE2 || k == ExperimentKind::FactCap ||
         k == ExperimentKind::EndToEnd;
}

bool uses_net(ExperimentKind k) { return k == ExperimentKind::McE2 || k == ExperimentKind::EndToEnd; }

// Everything a trial needs that does not depend on the trial.
struct Cell {
  CellSummary summary;
  std::optional<DeltaNet> net;
  double tail = 0.0;  // P(Bin(N, p) > T) with the event's tie band
};

double delta_for(const ExperimentConfig& c, int d) {
  return c.delta_policy == "explicit" ? c.delta : std::asin(1.0 / c.bigD) / (d - 1);
}

std::vector<Cell> make_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  if (c.kind == ExperimentKind::McChernoff) {
    for (const auto N : c.spikes) {
      for (const double p : c.success_probs) {
        Cell cell;
        cell.summary.spikes = N;
        cell.summary.success_prob = p;
        cell.summary.p = p;
        cell.summary.T = static_cast<double>(N) * c.theta * p;
        cells.push_back(std::move(cell));
      }
    }
    return cells;
  }
  if (c.kind == ExperimentKind::CoverBench) {
    for (const int d : c.dims) {
      Cell cell;
      cell.summary.dim = d;
      cell.summary.alpha = std::asin(1.0 / c.bigD);
      cells.push_back(std::move(cell));
    }
    return cells;
  }
  if (!uses_bodies(c.kind)) return cells;
  for (const int d : c.dims) {
    for (const auto N : c.spikes) {
      Cell cell;
      auto& s = cell.summary;
      s.dim = d;
      s.spikes = N;
      s.alpha = std::asin(1.0 / c.bigD);
      s.delta = delta_for(c, d);
      if (s.alpha + s.delta < kPi) {
        s.p = 2.0 * cap_measure(d, s.alpha + s.delta);
        s.T = static_cast<double>(N) * c.theta * s.p;
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void prepare_nets(const ExperimentConfig& c, std::vector<Cell>& cells) {
  if (!uses_net(c.kind)) return;
  const int workers = kernels::resolve_workers(c.workers);
  // Cells with the same (d, delta) share one net.
  for (std::size_t k = 0; k < cells.size(); ++k) {
    auto& s = cells[k].summary;
    for (std::size_t j = 0; j < k; ++j) {
      if (cells[j].summary.dim == s.dim && cells[j].summary.delta == s.delta) cells[k].net = cells[j].net;
    }
    if (!cells[k].net) {
      NetOptions opts;
      opts.max_consecutive_rejections = c.net_rejections;
      opts.workers = workers;
      const SeedSpec seed = SeedSpec{c.master_seed, 0}.child(0x6e6574).child(static_cast<std::uint64_t>(s.dim));
      DeltaNet net = build_delta_net(s.dim, s.delta, seed, opts);
      verify_net_coverage(net, c.probes, seed.child(1), workers);
      cells[k].net = std::move(net);
    }
    s.net_size = cells[k].net->size();
    if (s.alpha + s.delta <= kPi / 2) {
      const double k_tie = std::max(0.0, s.T - kTieTolerance * std::max(1.0, s.T));
      cells[k].tail = binomial_tail_exact(static_cast<std::int64_t>(s.spikes), s.p, k_tie);
    }
  }
}

// Unit vector at angle phi from `center`, rotated toward a uniform tangent direction.
std::vector<double> at_angle(std::span<const double> center, double phi, Stream& rng) {
  const int d = static_cast<int>(center.size());
  std::vector<double> t(d);
  double nt = 0.0;
  while (nt < 1e-6) {
    sample_uniform_into(t, rng);
    const double c = vec::dot(t, center);
    for (int k = 0; k < d; ++k) t[k] -= c * center[k];
    nt = vec::norm(t);
  }
  std::vector<double> u(d);
  for (int k = 0; k < d; ++k) u[k] = std::cos(phi) * center[k] + std::sin(phi) * t[k] / nt;
  return u;
}

void run_trial(const ExperimentConfig& c, const Cell& cell, SeedSpec seed, TrialRecord& r) {
  const auto& s = cell.summary;
  switch (c.kind) {
    case ExperimentKind::McE1: {
      const auto body = construct(s.dim, s.spikes, c.bigD, seed.child(0), 1);
      r.e1 = check_e1(body, 1).occurred;
      break;
    }
    case ExperimentKind::McE2: {
      const auto body = construct(s.dim, s.spikes, c.bigD, seed.child(0), 1);
      const auto e2 = check_e2_prime(body, *cell.net, c.theta, 1);
      r.e2prime = e2.occurred;
      r.max_multiplicity = e2.max_multiplicity;
      break;
    }
    case ExperimentKind::McChernoff: {
      // Bernoulli successes located by geometric gaps.
      Stream rng(seed.child(0));
      const double log_q = std::log1p(-s.success_prob);
      std::int64_t pos = 0;
      std::int64_t count = 0;
      for (;;) {
        double u = uniform01(rng);
        while (u == 0.0) u = uniform01(rng);
        const double gap = std::floor(std::log(u) / log_q);
        if (gap >= static_cast<double>(s.spikes)) break;
        pos += static_cast<std::int64_t>(gap) + 1;
        if (pos > static_cast<std::int64_t>(s.spikes)) break;
        ++count;
      }
      r.value = count;
      break;
    }
    case ExperimentKind::FactCap: {
      const auto body = construct(s.dim, s.spikes, c.bigD, seed.child(0), 1);
      r.e1 = check_e1(body, 1).occurred;
      if (*r.e1) break;
      OracleOptions oracle;
      for (std::uint64_t k = 0; k < c.probes_per_trial; ++k) {
        Stream rng(seed.child(1 + k));
        const std::size_t i = rng() % body.size();
        const bool negated = (rng() & 1) != 0;
        std::vector<double> center(s.dim);
        for (int j = 0; j < s.dim; ++j) center[j] = negated ? body.spikes[i][j] : -body.spikes[i][j];
        const double phi = s.alpha + 0.35 * (2.0 * uniform01(rng) - 1.0);
        const auto u = UnitVector::normalized(at_angle(center, phi, rng));
        ++r.probes;
        if (std::abs(angle(u.coords(), center) - s.alpha) < 1e-3) {
          ++r.boundary_band;
          continue;
        }
        const bool predicted = cap_predicate(body, i, u, negated);
        const auto trace = illuminates(body, i, u, oracle, negated);
        if (trace.illuminated == predicted && !trace.ambiguous) {
          ++r.agreements;
        } else {
          ++r.disagreements;
        }
      }
      break;
    }
    case ExperimentKind::EndToEnd: {
      const auto body = construct(s.dim, s.spikes, c.bigD, seed.child(0), 1);
      const auto cert = certify(body, *cell.net, c.theta, 1);
      r.e1 = cert.e1.occurred;
      r.e2prime = cert.e2prime.occurred;
      r.max_multiplicity = cert.e2prime.max_multiplicity;
      r.certificate = cert.lower_bound.has_value();
      if (r.certificate) {
        // No direction may see more than T spikes through open alpha-caps.
        const auto probes = uniform_cloud(s.dim, c.probes, seed.child(2), 1);
        const auto counts = kernels::omp::signed_cap_counts(body.spikes, probes, std::cos(s.alpha), 1);
        r.probes = probes.size();
        r.value = std::count_if(counts.begin(), counts.end(), [&](std::uint32_t m) { return m > cert.T; });
      }
      break;
    }
    case ExperimentKind::CoverBench: {
      CoverOptions opts;
      opts.probes = c.probes;
      opts.verify_probes = c.probes;
      opts.workers = 1;
      const auto cover = greedy_cap_cover(s.dim, s.alpha, seed.child(0), opts);
      r.value = static_cast<std::int64_t>(cover.centers.size());
      r.certificate = cover.verification.pass;
      r.probes = cover.verification.probes;
      break;
    }
    case ExperimentKind::Scan:
      break;
  }
}

ClaimRow proportion_claim(std::string name, std::uint64_t cell, std::string relation, double bound, std::uint64_t k,
                          std::uint64_t n) {
  ClaimRow row;
  row.name = std::move(name);
  row.cell = cell;
  row.relation = std::move(relation);
  row.bound = bound;
  row.empirical = static_cast<double>(k) / static_cast<double>(n);
  std::tie(row.ci_low, row.ci_high) = wilson_interval(k, n);
  row.stderr_ = bound_stderr(bound, n);
  if (row.relation == "==") {
    row.pass = std::abs(row.empirical - row.bound) <= 4.0 * row.stderr_;
  } else {
    row.pass = row.empirical <= row.bound + 4.0 * row.stderr_;
  }
  return row;
}

ClaimRow count_claim(std::string name, std::uint64_t cell, double bound, double empirical, bool extra_ok = true) {
  ClaimRow row;
  row.name = std::move(name);
  row.cell = cell;
  row.bound = bound;
  row.empirical = empirical;
  row.ci_low = row.ci_high = empirical;
  row.pass = extra_ok && empirical <= bound;
  return row;
}

void accumulate(const ExperimentConfig& c, CellSummary& s, const std::vector<TrialRecord>& records) {
  for (const auto& r : records) {
    ++s.trials;
    if (!r.error.empty()) {
      ++s.errors;
      continue;
    }
    s.e1_count += r.e1.value_or(false);
    s.e2_count += r.e2prime.value_or(false);
    s.success_count += r.certificate;
    s.probes += r.probes;
    s.agreements += r.agreements;
    s.disagreements += r.disagreements;
    s.boundary_band += r.boundary_band;
    s.max_value = std::max(s.max_value, r.value);
    if (c.kind == ExperimentKind::McChernoff) s.exceed_count += static_cast<double>(r.value) > s.T;
    if (c.kind == ExperimentKind::EndToEnd) s.exceed_count += static_cast<std::uint64_t>(r.value);
  }
}

void add_claims(const ExperimentConfig& c, const std::vector<Cell>& cells, CampaignReport& report) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& s = cells[k].summary;
    const std::uint64_t n = s.trials - s.errors;
    if (n == 0) continue;
    const double N = static_cast<double>(s.spikes);
    switch (c.kind) {
      case ExperimentKind::McE1:
      case ExperimentKind::EndToEnd: {
        const double omega = cap_measure(s.dim, kPi - 2.0 * s.alpha);
        report.claims.push_back(
            proportion_claim("P(E1) <= N^2 Omega(pi - 2 alpha)", k, "<=", N * N * omega, s.e1_count, n));
        if (c.kind == ExperimentKind::McE1 && s.spikes == 2) {
          report.claims.push_back(proportion_claim("P(E1) == 2 Omega(pi - 2 alpha)", k, "==", 2.0 * omega,
                                                   s.e1_count, n));
        }
        if (c.kind == ExperimentKind::McE1) break;
        [[fallthrough]];
      }
      case ExperimentKind::McE2: {
        if (s.alpha + s.delta <= kPi / 2) {
          const double bound = std::min(1.0, static_cast<double>(s.net_size) * cells[k].tail);
          report.claims.push_back(
              proportion_claim("P(E2') <= |net| P(Bin(N, p) > T)", k, "<=", bound, s.e2_count, n));
        }
        if (c.kind == ExperimentKind::EndToEnd) {
          report.claims.push_back(count_claim("directions seeing more than T spikes", k, 0.0,
                                              static_cast<double>(s.exceed_count)));
        }
        break;
      }
      case ExperimentKind::McChernoff: {
        const auto trials = static_cast<std::int64_t>(s.spikes);
        report.claims.push_back(proportion_claim("P(xi > N theta p) <= exact tail", k, "<=",
                                                 binomial_tail_exact(trials, s.success_prob, s.T), s.exceed_count,
                                                 n));
        if (c.theta >= 6.0) {
          report.claims.push_back(proportion_claim("P(xi > N theta p) <= 2^(-N theta p)", k, "<=",
                                                   chernoff_bound(trials, s.success_prob, c.theta).bound(),
                                                   s.exceed_count, n));
        }
        break;
      }
      case ExperimentKind::FactCap:
        report.claims.push_back(
            count_claim("illuminates disagrees with cap_predicate", k, 0.0, static_cast<double>(s.disagreements)));
        break;
      case ExperimentKind::CoverBench:
        report.claims.push_back(count_claim("cover size <= covering numerator / Omega(alpha)", k,
                                            covering_numerator(s.dim) / cap_measure(s.dim, s.alpha),
                                            static_cast<double>(s.max_value), s.success_count == n));
        break;
      case ExperimentKind::Scan:
        break;
    }
  }
}

}  // namespace

std::string_view kind_name(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  for (const auto& [kind, n] : kKinds) {
    if (n == name) return kind;
  }
  throw SchemaError("unknown experiment kind: " + std::string(name));
}

Json config_to_json(const ExperimentConfig& c) {
  Json probs = Json::array();
  for (const double p : c.success_probs) probs.push_back(hex_double(p));
  return {{"schema", schema::kConfig},
          {"kind", kind_name(c.kind)},
          {"dims", c.dims},
          {"spikes", c.spikes},
          {"bigD", hex_double(c.bigD)},
          {"theta", hex_double(c.theta)},
          {"delta_policy", c.delta_policy},
          {"delta", hex_double(c.delta)},
          {"trials", c.trials},
          {"master_seed", c.master_seed},
          {"success_probs", probs},
          {"probes", c.probes},
          {"probes_per_trial", c.probes_per_trial},
          {"net_rejections", c.net_rejections},
          {"n_from", c.n_from},
          {"n_to", c.n_to},
          {"keep_records", c.keep_records},
          {"record_timing", c.record_timing}};
}

ExperimentConfig config_from_json(const Json& j) {
  expect_schema(j, schema::kConfig);
  ExperimentConfig c;
  try {
    c.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("dims")) c.dims = j["dims"].get<std::vector<int>>();
    if (j.contains("spikes")) c.spikes = j["spikes"].get<std::vector<std::uint64_t>>();
    if (j.contains("bigD")) c.bigD = parse_hex_double(j["bigD"]);
    if (j.contains("theta")) c.theta = parse_hex_double(j["theta"]);
    c.delta_policy = j.value("delta_policy", c.delta_policy);
    if (j.contains("delta")) c.delta = parse_hex_double(j["delta"]);
    c.trials = j.value("trials", c.trials);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("success_probs")) c.success_probs = parse_hex_vector(j["success_probs"]);
    c.probes = j.value("probes", c.probes);
    c.probes_per_trial = j.value("probes_per_trial", c.probes_per_trial);
    c.net_rejections = j.value("net_rejections", c.net_rejections);
    c.n_from = j.value("n_from", c.n_from);
    c.n_to = j.value("n_to", c.n_to);
    c.keep_records = j.value("keep_records", c.keep_records);
    c.record_timing = j.value("record_timing", c.record_timing);
    if (j.contains("outputs")) {
      c.output_json = j["outputs"].value("json", "");
      c.output_csv = j["outputs"].value("csv", "");
    }
    c.workers = j.value("workers", 0);
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& m) { throw DomainError("config: " + m); };
  if (c.workers < 0) fail("workers must be >= 0");
  if (c.kind == ExperimentKind::Scan) {
    if (!(c.bigD > 1.0 && c.bigD < std::numbers::sqrt2)) fail("bigD must lie in (1, sqrt 2)");
    if (c.n_from < 2 || c.n_to < c.n_from) fail("need 2 <= n_from <= n_to");
    return;
  }
  if (c.kind == ExperimentKind::McChernoff) {
    if (c.spikes.empty() || c.success_probs.empty()) fail("spikes and success_probs must be non-empty");
    for (const auto N : c.spikes) {
      if (N < 1) fail("N must be >= 1");
    }
    for (const double p : c.success_probs) {
      if (!(p > 0.0 && p < 1.0)) fail("success probabilities must lie in (0, 1)");
    }
    if (!(c.theta > 0.0)) fail("theta must be positive");
    return;
  }
  if (c.dims.empty()) fail("dims must be non-empty");
  for (const int d : c.dims) {
    if (d < 2) fail("dimensions must be >= 2");
  }
  if (c.kind == ExperimentKind::CoverBench) {
    if (!(c.bigD > 1.0 && std::isfinite(c.bigD))) fail("bigD must be > 1");
    for (const int d : c.dims) {
      if (d < 3) fail("cover-bench needs dimensions >= 3");
    }
    return;
  }
  if (c.spikes.empty()) fail("spikes must be non-empty");
  for (const auto N : c.spikes) {
    if (N < 1) fail("N must be >= 1");
  }
  if (!(c.bigD > 1.0 && c.bigD < std::numbers::sqrt2)) fail("bigD must lie in (1, sqrt 2)");
  if (!(c.theta > 0.0)) fail("theta must be positive");
  if (c.delta_policy == "explicit") {
    if (!(c.delta > 0.0 && c.delta < kPi / 2)) fail("explicit delta must lie in (0, pi/2)");
  } else if (c.delta_policy != "alpha/n") {
    fail("delta_policy must be alpha/n or explicit");
  }
  if (c.probes < 1) fail("probes must be >= 1");
}

std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a(config_to_json(c).dump()); }

bool CampaignReport::all_pass() const {
  return std::all_of(claims.begin(), claims.end(), [](const ClaimRow& r) { return r.pass; });
}

std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double mid = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The interval reaches the end points exactly at k = 0 and k = n.
  return {k == 0 ? 0.0 : std::max(0.0, mid - half), k == n ? 1.0 : std::min(1.0, mid + half)};
}

double bound_stderr(double bound, std::uint64_t n) {
  if (n == 0) return 0.0;
  const double q = std::clamp(bound, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(n));
}

CampaignReport run_campaign(const ExperimentConfig& config) { return run_campaign(config, nullptr); }

CampaignReport run_campaign(const ExperimentConfig& config, const TrialHook& before_trial) {
  validate(config);
  CampaignReport report;
  report.config = config;
  report.config_hash = config_hash(config);
  if (config.kind == ExperimentKind::Scan) {
    report.scan = feasibility_scan(config.bigD, config.n_from, config.n_to, true);
    return report;
  }
  if (config.trials == 0) return report;

  auto cells = make_cells(config);
  prepare_nets(config, cells);
  const int workers = kernels::resolve_workers(config.workers);
  const std::uint64_t per_cell = config.trials;
  std::vector<TrialRecord> records(per_cell);

  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(per_cell); ++t) {
      auto& r = records[t];
      r = TrialRecord{};
      r.cell = cell;
      r.stream_id = static_cast<std::uint64_t>(t);
      const auto start = std::chrono::steady_clock::now();
      try {
        if (before_trial) before_trial(cell, r.stream_id);
        run_trial(config, cells[cell], SeedSpec{config.master_seed, r.stream_id}.child(cell), r);
      } catch (const std::exception& e) {
        r.error = e.what();
        if (r.error.empty()) r.error = "unknown failure";
      }
      if (config.record_timing) {
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    }
    accumulate(config, cells[cell].summary, records);
    for (const auto& r : records) {
      report.partial_failure = report.partial_failure || !r.error.empty();
      if (config.kind == ExperimentKind::CoverBench && config.keep_records && r.error.empty()) {
        // Covers are cheap to rebuild from their seeds; keep them for inspection.
        CoverOptions opts;
        opts.probes = config.probes;
        opts.verify_probes = config.probes;
        opts.workers = workers;
        const auto& s = cells[cell].summary;
        report.covers.push_back(greedy_cap_cover(
            s.dim, s.alpha, SeedSpec{config.master_seed, r.stream_id}.child(cell).child(0), opts));
      }
    }
    if (config.keep_records) report.records.insert(report.records.end(), records.begin(), records.end());
  }
  for (const auto& cell : cells) report.cells.push_back(cell.summary);
  add_claims(config, cells, report);
  return report;
}

namespace {

Json cell_to_json(const CellSummary& s) {
  return {{"dimension", s.dim},         {"spikes", s.spikes},
          {"success_prob", hex_double(s.success_prob)},
          {"alpha", hex_double(s.alpha)}, {"delta", hex_double(s.delta)},
          {"p", hex_double(s.p)},       {"T", hex_double(s.T)},
          {"net_size", s.net_size},     {"trials", s.trials},
          {"errors", s.errors},         {"e1_count", s.e1_count},
          {"e2_count", s.e2_count},     {"success_count", s.success_count},
          {"exceed_count", s.exceed_count}, {"probes", s.probes},
          {"agreements", s.agreements}, {"disagreements", s.disagreements},
          {"boundary_band", s.boundary_band}, {"max_value", s.max_value}};
}

CellSummary cell_from_json(const Json& j) {
  CellSummary s;
  s.dim = j.at("dimension").get<int>();
  s.spikes = j.at("spikes").get<std::uint64_t>();
  s.success_prob = parse_hex_double(j.at("success_prob"));
  s.alpha = parse_hex_double(j.at("alpha"));
  s.delta = parse_hex_double(j.at("delta"));
  s.p = parse_hex_double(j.at("p"));
  s.T = parse_hex_double(j.at("T"));
  s.net_size = j.at("net_size").get<std::uint64_t>();
  s.trials = j.at("trials").get<std::uint64_t>();
  s.errors = j.at("errors").get<std::uint64_t>();
  s.e1_count = j.at("e1_count").get<std::uint64_t>();
  s.e2_count = j.at("e2_count").get<std::uint64_t>();
  s.success_count = j.at("success_count").get<std::uint64_t>();
  s.exceed_count = j.at("exceed_count").get<std::uint64_t>();
  s.probes = j.at("probes").get<std::uint64_t>();
  s.agreements = j.at("agreements").get<std::uint64_t>();
  s.disagreements = j.at("disagreements").get<std::uint64_t>();
  s.boundary_band = j.at("boundary_band").get<std::uint64_t>();
  s.max_value = j.at("max_value").get<std::int64_t>();
  return s;
}

Json claim_to_json(const ClaimRow& r) {
  return {{"name", r.name},
          {"cell", r.cell},
          {"relation", r.relation},
          {"bound", hex_double(r.bound)},
          {"empirical", hex_double(r.empirical)},
          {"ci", {hex_double(r.ci_low), hex_double(r.ci_high)}},
          {"stderr", hex_double(r.stderr_)},
          {"pass", r.pass}};
}

ClaimRow claim_from_json(const Json& j) {
  ClaimRow r;
  r.name = j.at("name").get<std::string>();
  r.cell = j.at("cell").get<std::uint64_t>();
  r.relation = j.at("relation").get<std::string>();
  r.bound = parse_hex_double(j.at("bound"));
  r.empirical = parse_hex_double(j.at("empirical"));
  r.ci_low = parse_hex_double(j.at("ci").at(0));
  r.ci_high = parse_hex_double(j.at("ci").at(1));
  r.stderr_ = parse_hex_double(j.at("stderr"));
  r.pass = j.at("pass").get<bool>();
  return r;
}

Json optional_bool(const std::optional<bool>& b) { return b ? Json(*b) : Json(nullptr); }

Json record_to_json(const TrialRecord& r) {
  Json j = {{"cell", r.cell},
            {"stream_id", r.stream_id},
            {"e1", optional_bool(r.e1)},
            {"e2prime", optional_bool(r.e2prime)},
            {"max_multiplicity", r.max_multiplicity},
            {"certificate", r.certificate},
            {"value", r.value},
            {"probes", r.probes},
            {"agreements", r.agreements},
            {"disagreements", r.disagreements},
            {"boundary_band", r.boundary_band}};
  if (r.wall_seconds != 0.0) j["wall_seconds"] = hex_double(r.wall_seconds);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

TrialRecord record_from_json(const Json& j) {
  TrialRecord r;
  r.cell = j.at("cell").get<std::uint64_t>();
  r.stream_id = j.at("stream_id").get<std::uint64_t>();
  if (!j.at("e1").is_null()) r.e1 = j.at("e1").get<bool>();
  if (!j.at("e2prime").is_null()) r.e2prime = j.at("e2prime").get<bool>();
  r.max_multiplicity = j.at("max_multiplicity").get<std::uint32_t>();
  r.certificate = j.at("certificate").get<bool>();
  r.value = j.at("value").get<std::int64_t>();
  r.probes = j.at("probes").get<std::uint64_t>();
  r.agreements = j.at("agreements").get<std::uint64_t>();
  r.disagreements = j.at("disagreements").get<std::uint64_t>();
  r.boundary_band = j.at("boundary_band").get<std::uint64_t>();
  if (j.contains("wall_seconds")) r.wall_seconds = parse_hex_double(j["wall_seconds"]);
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_bool(const std::optional<bool>& b) {
  if (!b) return "";
  return *b ? "1" : "0";
}

}  // namespace

Json report_to_json(const CampaignReport& r) {
  Json j = {{"schema", schema::kReport},
            {"library_version", kLibraryVersion},
            {"rng", kRngAlgorithm},
            {"config", config_to_json(r.config)},
            {"config_hash", hex_u64(r.config_hash)},
            {"master_seed", r.config.master_seed},
            {"partial_failure", r.partial_failure},
            {"all_pass", r.all_pass()}};
  Json cells = Json::array();
  for (const auto& s : r.cells) cells.push_back(cell_to_json(s));
  j["cells"] = cells;
  Json claims = Json::array();
  for (const auto& c : r.claims) claims.push_back(claim_to_json(c));
  j["claims"] = claims;
  Json records = Json::array();
  for (const auto& t : r.records) records.push_back(record_to_json(t));
  j["records"] = records;
  j["scan"] = r.scan ? scan_to_json(*r.scan) : Json(nullptr);
  Json covers = Json::array();
  for (const auto& c : r.covers) covers.push_back(cover_to_json(c));
  j["covers"] = covers;
  return j;
}

CampaignReport report_from_json(const Json& j) {
  expect_schema(j, schema::kReport);
  CampaignReport r;
  try {
    r.config = config_from_json(j.at("config"));
    r.config_hash = parse_hex_u64(j.at("config_hash"));
    if (r.config_hash != config_hash(r.config)) throw SchemaError("report: config hash mismatch");
    r.partial_failure = j.at("partial_failure").get<bool>();
    for (const auto& s : j.at("cells")) r.cells.push_back(cell_from_json(s));
    for (const auto& c : j.at("claims")) r.claims.push_back(claim_from_json(c));
    for (const auto& t : j.at("records")) r.records.push_back(record_from_json(t));
    if (!j.at("scan").is_null()) r.scan = scan_from_json(j.at("scan"));
    for (const auto& c : j.at("covers")) r.covers.push_back(cover_from_json(c));
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("report: ") + e.what());
  }
  return r;
}

std::string records_csv(const CampaignReport& r) {
  std::ostringstream os;
  if (r.scan) {
    os << "n,dimension,alpha,delta,p,theta,N,log_N,T,lower_bound,n_positive,n_upper,net_tail,theta_at_least_6,"
          "feasible\n";
    for (const auto& p : r.scan->rows) {
      os << p.n << ',' << p.dim << ',' << g17(p.alpha) << ',' << g17(p.delta) << ',' << g17(p.p) << ','
         << g17(p.theta) << ',' << g17(p.N) << ',' << g17(p.log_N) << ',' << g17(p.T) << ',' << g17(p.lower_bound)
         << ',' << p.exact.n_positive << ',' << p.exact.n_upper << ',' << p.exact.net_tail << ','
         << p.exact.theta_at_least_6 << ',' << p.feasible() << '\n';
    }
    return os.str();
  }
  os << "cell,stream_id,e1,e2prime,max_multiplicity,certificate,value,probes,agreements,disagreements,"
        "boundary_band,wall_seconds,error\n";
  for (const auto& t : r.records) {
    std::string err = t.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << t.cell << ',' << t.stream_id << ',' << csv_bool(t.e1) << ',' << csv_bool(t.e2prime) << ','
       << t.max_multiplicity << ',' << t.certificate << ',' << t.value << ',' << t.probes << ',' << t.agreements
       << ',' << t.disagreements << ',' << t.boundary_band << ',' << g17(t.wall_seconds) << ',' << err << '\n';
  }
  return os.str();
}

std::string claims_csv(const CampaignReport& r) {
  std::ostringstream os;
  os << "name,cell,dimension,spikes,relation,bound,empirical,ci_low,ci_high,stderr,pass\n";
  for (const auto& c : r.claims) {
    const auto& s = r.cells.at(c.cell);
    os << '"' << c.name << "\"," << c.cell << ',' << s.dim << ',' << s.spikes << ',' << c.relation << ','
       << g17(c.bound) << ',' << g17(c.empirical) << ',' << g17(c.ci_low) << ',' << g17(c.ci_high) << ','
       << g17(c.stderr_) << ',' << c.pass << '\n';
  }
  return os.str();
}

std::string omega_csv(const std::vector<int>& dims, int points) {
  if (points < 1) throw DomainError("omega_csv: need at least one grid point");
  std::ostringstream os;
  os << "dimension,phi,omega\n";
  for (const int d : dims) {
    for (int k = 1; k <= points; ++k) {
      const double phi = kPi * k / (points + 1);
      os << d << ',' << g17(phi) << ',' << g17(cap_measure(d, phi)) << '\n';
    }
  }
  return os.str();
}

void emit_report(const CampaignReport& r, const std::string& json_path, const std::string& csv_path) {
  if (!json_path.empty()) write_json(json_path, report_to_json(r));
  if (!csv_path.empty()) {
    write_text(csv_path, records_csv(r));
    std::filesystem::path claims(csv_path);
    claims.replace_filename(claims.stem().string() + "_claims.csv");
    write_text(claims, claims_csv(r));
  }
}

}  // namespace spiky
