// Command-line front end for the spiky library.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "spiky/bounds.hpp"
#include "spiky/cap_calculus.hpp"
#include "spiky/errors.hpp"
#include "spiky/geometry_oracle.hpp"
#include "spiky/harness.hpp"
#include "spiky/serialization.hpp"

using namespace spiky;

namespace {

struct Common {
  std::vector<int> dims{3};
  std::vector<std::uint64_t> spikes{2};
  double bigD = 1.1;
  double theta = 6.0;
  double delta = 0.0;  // zero selects alpha / n
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  int workers = 0;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* app, Common& c, bool multi) {
  if (multi) {
    app->add_option("--dim", c.dims, "ambient dimension(s) d")->capture_default_str();
    app->add_option("--spikes", c.spikes, "number(s) of spikes N")->capture_default_str();
  } else {
    app->add_option("--dim", c.dims, "ambient dimension d")->expected(1)->capture_default_str();
    app->add_option("--spikes", c.spikes, "number of spikes N")->expected(1)->capture_default_str();
  }
  app->add_option("--bigD", c.bigD, "D > 1; inner radius is 1/D")->capture_default_str();
  app->add_option("--theta", c.theta, "multiplicity factor theta")->capture_default_str();
  app->add_option("--delta", c.delta, "net radius (default alpha / (d - 1))");
  app->add_option("--trials", c.trials, "Monte Carlo trials per cell")->capture_default_str();
  app->add_option("--seed", c.seed, "master seed")->capture_default_str();
  app->add_option("--workers", c.workers, "OpenMP threads (0 = all)")->capture_default_str();
  app->add_option("--out", c.out, "output file (default stdout)");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text(c.out, text);
  }
}

void emit_json(const Common& c, const Json& j) { emit(c, j.dump(2) + "\n"); }

double delta_of(const Common& c, int d) { return c.delta > 0.0 ? c.delta : std::asin(1.0 / c.bigD) / (d - 1); }

std::vector<double> parse_vector(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.empty()) throw DomainError("empty vector: " + s);
  return v;
}

std::string summary_table(const CampaignReport& r) {
  std::ostringstream os;
  os << "campaign " << kind_name(r.config.kind) << "  config " << hex_u64(r.config_hash) << "  seed "
     << r.config.master_seed << "\n";
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const auto& s = r.cells[k];
    os << "  cell " << k << ": d=" << s.dim << " N=" << s.spikes << " trials=" << s.trials << " errors=" << s.errors
       << " E1=" << s.e1_count << " E2'=" << s.e2_count << " certified=" << s.success_count << "\n";
  }
  for (const auto& c : r.claims) {
    char line[256];
    std::snprintf(line, sizeof line, "  [%s] cell %llu  %s: empirical %.6g %s bound %.6g (stderr %.3g)\n",
                  c.pass ? "PASS" : "FAIL", static_cast<unsigned long long>(c.cell), c.name.c_str(), c.empirical,
                  c.relation.c_str(), c.bound, c.stderr_);
    os << line;
  }
  if (r.scan) {
    const auto show = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string("none"); };
    os << "  first feasible n: " << show(r.scan->first_feasible)
       << ", feasible for all larger scanned n from: " << show(r.scan->stable_feasible) << "\n";
  }
  if (r.partial_failure) os << "  some trials failed; see records\n";
  return os.str();
}

int finish_campaign(const Common& c, const ExperimentConfig& cfg) {
  const auto report = run_campaign(cfg);
  const std::string json_out = !cfg.output_json.empty() ? cfg.output_json : (c.format == "json" ? c.out : "");
  const std::string csv_out = !cfg.output_csv.empty() ? cfg.output_csv : (c.format == "csv" ? c.out : "");
  emit_report(report, json_out, csv_out);
  std::cerr << summary_table(report);
  if (json_out.empty() && csv_out.empty()) {
    std::cout << (c.format == "csv" ? records_csv(report) : report_to_json(report).dump(2) + "\n");
  }
  return report.all_pass() ? 0 : 2;
}

ExperimentConfig config_from_common(const Common& c, ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.dims = c.dims;
  cfg.spikes = c.spikes;
  cfg.bigD = c.bigD;
  cfg.theta = c.theta;
  if (c.delta > 0.0) {
    cfg.delta_policy = "explicit";
    cfg.delta = c.delta;
  }
  cfg.trials = c.trials;
  cfg.master_seed = c.seed;
  cfg.workers = c.workers;
  // Per-trial rows are only kept for small campaigns.
  cfg.keep_records = c.trials <= 100000;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random spiky balls: cap measures, certified illumination bounds and oracles"};
  app.require_subcommand(1);
  Common c;

  // omega
  auto* omega = app.add_subcommand("omega", "normalized cap measure table");
  std::vector<double> phis;
  int grid = 64;
  add_common(omega, c, true);
  omega->add_option("--phi", phis, "cap radii; without it a uniform grid is printed");
  omega->add_option("--points", grid, "grid points in (0, pi)")->capture_default_str();
  omega->callback([&] {
    if (phis.empty()) {
      emit(c, omega_csv(c.dims, grid));
      return;
    }
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "dimension,phi,omega\n";
    for (const int d : c.dims) {
      for (const double phi : phis) {
        const double v = cap_measure(d, phi);
        rows.push_back({{"dimension", d}, {"phi", phi}, {"omega", v}, {"omega_hex", hex_double(v)}});
        char line[96];
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", d, phi, v);
        csv << line;
      }
    }
    emit(c, c.format == "csv" ? csv.str() : rows.dump(2) + "\n");
  });

  // plan
  auto* plan = app.add_subcommand("plan", "construction parameters for (D, d = n + 1)");
  bool relaxed = false;
  add_common(plan, c, false);
  plan->add_flag("--relaxed", relaxed, "allow D outside (1, 1.116)");
  plan->callback([&] { emit_json(c, plan_to_json(plan_parameters(c.bigD, c.dims.at(0) - 1, relaxed))); });

  // scan
  auto* scan = app.add_subcommand("scan", "feasibility of the plan over a range of n");
  int n_from = 2;
  int n_to = 200;
  add_common(scan, c, false);
  scan->add_option("--n-from", n_from)->capture_default_str();
  scan->add_option("--n-to", n_to)->capture_default_str();
  scan->add_flag("--relaxed", relaxed, "allow D outside (1, 1.116)");
  scan->callback([&] {
    CampaignReport r;
    r.scan = feasibility_scan(c.bigD, n_from, n_to, relaxed);
    emit(c, c.format == "csv" ? records_csv(r) : scan_to_json(*r.scan).dump(2) + "\n");
    const auto show = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string("none"); };
    std::cerr << "first feasible n: " << show(r.scan->first_feasible)
              << ", feasible for all larger scanned n from: " << show(r.scan->stable_feasible) << "\n";
  });

  // build
  auto* build = app.add_subcommand("build", "sample a spiky body (and optionally a delta-net)");
  std::string net_out;
  double core_density = 0.0;
  std::uint64_t probes = 100000;
  add_common(build, c, false);
  build->add_option("--stream", c.stream, "stream id")->capture_default_str();
  build->add_option("--net-out", net_out, "also build a delta-net and write it here");
  build->add_option("--core-density", core_density, "replace the inner ball by a finite net of this density");
  build->add_option("--probes", probes, "coverage verification probes for the net")->capture_default_str();
  build->callback([&] {
    const int d = c.dims.at(0);
    const SeedSpec seed{c.seed, c.stream};
    auto body = construct(d, c.spikes.at(0), c.bigD, seed, c.workers);
    if (core_density > 0.0) body = polytopal_variant(body, core_density, seed.child(7));
    emit_json(c, body_to_json(body));
    if (!net_out.empty()) {
      NetOptions opts;
      opts.workers = c.workers;
      auto net = build_delta_net(d, delta_of(c, d), seed.child(1), opts);
      verify_net_coverage(net, probes, seed.child(2), c.workers);
      write_json(net_out, net_to_json(net));
    }
  });

  // certify
  auto* cert = app.add_subcommand("certify", "check E1 and E2' and emit a certificate");
  std::string body_in;
  std::string net_in;
  add_common(cert, c, false);
  cert->add_option("--body", body_in, "body JSON")->required();
  cert->add_option("--net", net_in, "delta-net JSON (built on the fly if absent)");
  cert->add_option("--probes", probes, "coverage probes for an on-the-fly net")->capture_default_str();
  cert->callback([&] {
    const auto body = body_from_json(read_json(body_in));
    DeltaNet net;
    if (!net_in.empty()) {
      net = net_from_json(read_json(net_in));
    } else {
      NetOptions opts;
      opts.workers = c.workers;
      net = build_delta_net(body.dim, delta_of(c, body.dim), SeedSpec{c.seed, 0}.child(1), opts);
      verify_net_coverage(net, probes, SeedSpec{c.seed, 0}.child(2), c.workers);
    }
    const auto certificate = certify(body, net, c.theta, c.workers);
    emit_json(c, certificate_to_json(certificate));
    std::cerr << certificate.label();
    if (certificate.lower_bound) std::cerr << ": i(K) >= " << *certificate.lower_bound;
    std::cerr << "\n";
  });

  // probe
  auto* probe = app.add_subcommand("probe", "oracle queries on a body");
  std::string point;
  std::string direction;
  int spike = -1;
  bool negated = false;
  add_common(probe, c, false);
  probe->add_option("--body", body_in, "body JSON")->required();
  probe->add_option("--point", point, "comma-separated point: margin and gauge");
  probe->add_option("--direction", direction, "comma-separated direction: illumination of --spike");
  probe->add_option("--spike", spike, "spike index for --direction");
  probe->add_flag("--negated", negated, "use -X_i instead of X_i");
  probe->callback([&] {
    const auto body = body_from_json(read_json(body_in));
    Json out = Json::object();
    if (!point.empty()) {
      const auto p = parse_vector(point);
      const auto m = membership_margin(body, p);
      const auto g = gauge(body, p);
      out["margin"] = m.value;
      out["margin_exhaustive"] = m.exhaustive;
      out["witness"] = m.minimizer_direction.vector();
      out["gauge"] = g.value;
      out["support_at_witness"] = support(body, m.minimizer_direction.coords());
    }
    if (!direction.empty()) {
      if (spike < 0 || static_cast<std::size_t>(spike) >= body.size()) throw DomainError("--spike out of range");
      const auto u = UnitVector::normalized(parse_vector(direction));
      const auto t = illuminates(body, static_cast<std::size_t>(spike), u, {}, negated);
      out["illuminated"] = t.illuminated;
      out["ambiguous"] = t.ambiguous;
      out["best_lambda"] = t.best_lambda;
      out["max_margin"] = t.max_margin;
      out["cap_predicate"] = cap_predicate(body, static_cast<std::size_t>(spike), u, negated);
    }
    emit_json(c, out);
  });

  // cover
  auto* cover = app.add_subcommand("cover", "greedy covering of S^{d-1} by caps of radius arcsin(1/D)");
  double radius = 0.0;
  add_common(cover, c, false);
  cover->add_option("--radius", radius, "cap radius (default arcsin(1/D))");
  cover->add_option("--probes", probes, "probe cloud and verification size")->capture_default_str();
  cover->callback([&] {
    CoverOptions opts;
    opts.probes = probes;
    opts.verify_probes = probes;
    opts.workers = c.workers;
    const double r = radius > 0.0 ? radius : std::asin(1.0 / c.bigD);
    const auto result = greedy_cap_cover(c.dims.at(0), r, SeedSpec{c.seed, 0}, opts);
    emit_json(c, cover_to_json(result));
    std::cerr << "cover size " << result.centers.size() << (result.verification.pass ? ", verified" : ", NOT verified")
              << "\n";
  });

  // upper
  auto* upper = app.add_subcommand("upper", "covering upper bound on i(K) in R^d");
  add_common(upper, c, false);
  upper->callback([&] {
    const int n = c.dims.at(0);
    const auto ub = illumination_upper_bound(c.bigD, n, SeedSpec{c.seed, 0});
    Json out = {{"bigD", c.bigD},
                {"n", n},
                {"value", ub.value},
                {"log_value", ub.log_value},
                {"formula", ub.formula},
                {"value_hex", hex_double(ub.value)}};
    if (ub.cover_count) out["cover_count"] = *ub.cover_count;
    emit_json(c, out);
  });

  // Monte Carlo campaigns.
  int exit_code = 0;
  const std::pair<const char*, ExperimentKind> campaigns[] = {
      {"mc-e1", ExperimentKind::McE1},
      {"mc-e2", ExperimentKind::McE2},
      {"mc-chernoff", ExperimentKind::McChernoff},
      {"factcap", ExperimentKind::FactCap},
  };
  std::vector<double> success_probs{0.05};
  std::uint64_t per_trial = 8;
  for (const auto& [name, kind] : campaigns) {
    auto* sub = app.add_subcommand(name, std::string(name) + " campaign");
    add_common(sub, c, true);
    if (kind == ExperimentKind::McChernoff) {
      sub->add_option("--p", success_probs, "success probabilities")->capture_default_str();
    }
    if (kind == ExperimentKind::FactCap) {
      sub->add_option("--probes-per-trial", per_trial)->capture_default_str();
    }
    sub->callback([&, kind = kind] {
      auto cfg = config_from_common(c, kind);
      cfg.success_probs = success_probs;
      cfg.probes_per_trial = per_trial;
      exit_code = finish_campaign(c, cfg);
    });
  }

  // run
  auto* run = app.add_subcommand("run", "campaign from a JSON config file");
  std::string config_path;
  run->add_option("config", config_path, "config JSON")->required();
  run->add_option("--workers", c.workers, "override the worker count");
  run->add_option("--out", c.out, "report path when the config names none");
  run->add_option("--format", c.format)->check(CLI::IsMember({"json", "csv"}));
  run->callback([&] {
    auto cfg = config_from_json(read_json(config_path));
    if (c.workers > 0) cfg.workers = c.workers;
    exit_code = finish_campaign(c, cfg);
  });

  // report
  auto* rep = app.add_subcommand("report", "re-read a report and print its claims");
  std::string report_in;
  rep->add_option("report", report_in, "report JSON")->required();
  rep->add_option("--out", c.out);
  rep->add_option("--format", c.format)->check(CLI::IsMember({"json", "csv"}));
  rep->callback([&] {
    const auto r = report_from_json(read_json(report_in));
    emit(c, c.format == "csv" ? claims_csv(r) : summary_table(r));
    exit_code = r.all_pass() ? 0 : 2;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
