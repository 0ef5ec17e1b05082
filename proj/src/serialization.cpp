#include "spiky/serialization.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spiky/errors.hpp"

namespace spiky {

std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hex_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw SchemaError("expected a hex-float string, got " + j.dump());
  const auto& s = j.get_ref<const std::string&>();
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw SchemaError("malformed hex float: " + s);
  return x;
}

Json hex_vector(std::span<const double> xs) {
  Json out = Json::array();
  for (const double x : xs) out.push_back(hex_double(x));
  return out;
}

std::vector<double> parse_hex_vector(const Json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(parse_hex_double(x));
  return out;
}

std::string hex_u64(std::uint64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, x);
  return buf;
}

std::uint64_t parse_hex_u64(const Json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto s = j.get<std::string>();
  char* end = nullptr;
  const auto x = std::strtoull(s.c_str(), &end, 0);
  if (end == s.c_str() || *end != '\0') throw SchemaError("malformed 64-bit integer: " + s);
  return x;
}

namespace {

Json seed_to_json(const SeedSpec& s) { return {{"master_seed", s.master_seed}, {"stream_id", hex_u64(s.stream_id)}}; }

SeedSpec seed_from_json(const Json& j) {
  return {j.at("master_seed").get<std::uint64_t>(), parse_hex_u64(j.at("stream_id"))};
}

Json document(std::string_view name) {
  return {{"schema", name}, {"library_version", kLibraryVersion}, {"rng", kRngAlgorithm}};
}

template <class T>
Json optional_to_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, double>) {
    return hex_double(*v);
  } else {
    return *v;
  }
}

}  // namespace

void expect_schema(const Json& j, std::string_view name) {
  if (!j.is_object() || !j.contains("schema")) throw SchemaError("document has no schema field");
  const auto got = j.at("schema").get<std::string>();
  if (got != name) throw SchemaError("expected schema " + std::string(name) + ", found " + got);
}

Json point_set_to_json(const PointSet& ps) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < ps.size(); ++i) rows.push_back(hex_vector(ps[i]));
  return {{"dimension", ps.dim()}, {"points", rows}};
}

PointSet point_set_from_json(const Json& j) {
  return schema_guard([&] {
    PointSet ps(j.at("dimension").get<int>());
    for (const auto& row : j.at("points")) {
      const auto v = parse_hex_vector(row);
      if (static_cast<int>(v.size()) != ps.dim()) throw SchemaError("point has the wrong dimension");
      ps.push_back(v);
    }
    return ps;
  });
}

Json coverage_to_json(const CoverageReport& r) {
  return {{"probes", r.probes},
          {"uncovered", r.uncovered},
          {"worst_angle", hex_double(r.worst_angle)},
          {"witness", r.witness ? hex_vector(r.witness->coords()) : Json(nullptr)},
          {"pass", r.pass},
          {"confidence", hex_double(r.confidence)}};
}

CoverageReport coverage_from_json(const Json& j) {
  return schema_guard([&] {
    CoverageReport r;
    r.probes = j.at("probes").get<std::uint64_t>();
    r.uncovered = j.at("uncovered").get<std::uint64_t>();
    r.worst_angle = parse_hex_double(j.at("worst_angle"));
    if (!j.at("witness").is_null()) r.witness = UnitVector::from_unit(parse_hex_vector(j.at("witness")));
    r.pass = j.at("pass").get<bool>();
    r.confidence = parse_hex_double(j.at("confidence"));
    return r;
  });
}

Json event_to_json(const EventReport& r) {
  Json pairs = Json::array();
  for (const auto& w : r.pairs) {
    pairs.push_back({{"i", w.i}, {"j", w.j}, {"angle", hex_double(w.angle)}, {"antipodal", w.antipodal}});
  }
  Json centers = Json::array();
  for (const auto& c : r.centers) centers.push_back({{"center", c.center}, {"multiplicity", c.multiplicity}});
  return {{"event", r.id == EventId::E1 ? "E1" : "E2PRIME"},
          {"occurred", r.occurred},
          {"pairs", pairs},
          {"centers", centers},
          {"threshold_used", hex_double(r.threshold_used)},
          {"max_multiplicity", r.max_multiplicity},
          {"argmax_center", optional_to_json(r.argmax_center)},
          {"warnings", r.warnings}};
}

EventReport event_from_json(const Json& j) {
  return schema_guard([&] {
    EventReport r;
    const auto id = j.at("event").get<std::string>();
    if (id == "E1") {
      r.id = EventId::E1;
    } else if (id == "E2PRIME") {
      r.id = EventId::E2Prime;
    } else {
      throw SchemaError("unknown event id " + id);
    }
    r.occurred = j.at("occurred").get<bool>();
    for (const auto& w : j.at("pairs")) {
      r.pairs.push_back({w.at("i").get<std::uint32_t>(), w.at("j").get<std::uint32_t>(),
                         parse_hex_double(w.at("angle")), w.at("antipodal").get<bool>()});
    }
    for (const auto& c : j.at("centers")) {
      r.centers.push_back({c.at("center").get<std::uint32_t>(), c.at("multiplicity").get<std::uint32_t>()});
    }
    r.threshold_used = parse_hex_double(j.at("threshold_used"));
    r.max_multiplicity = j.at("max_multiplicity").get<std::uint32_t>();
    if (!j.at("argmax_center").is_null()) r.argmax_center = j.at("argmax_center").get<std::uint32_t>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  });
}

Json body_to_json(const SpikyBody& body) {
  Json j = document(schema::kBody);
  j["dimension"] = body.dim;
  j["bigD"] = hex_double(body.bigD);
  j["inner_radius"] = hex_double(body.inner_radius);
  j["spikes"] = point_set_to_json(body.spikes);
  j["polytopal_core"] = body.polytopal_core ? point_set_to_json(*body.polytopal_core) : Json(nullptr);
  j["core_density"] = hex_double(body.core_density);
  j["seed"] = seed_to_json(body.seed);
  j["digest"] = hex_u64(digest(body));
  return j;
}

SpikyBody body_from_json(const Json& j) {
  return schema_guard([&] {
    expect_schema(j, schema::kBody);
    SpikyBody body;
    body.dim = j.at("dimension").get<int>();
    body.bigD = parse_hex_double(j.at("bigD"));
    body.inner_radius = parse_hex_double(j.at("inner_radius"));
    body.spikes = point_set_from_json(j.at("spikes"));
    if (body.spikes.dim() != body.dim) throw SchemaError("body: spike dimension mismatch");
    for (std::size_t i = 0; i < body.spikes.size(); ++i) {
      if (std::abs(vec::norm(body.spikes[i]) - 1.0) > 1e-12) throw SchemaError("body: spike is not a unit vector");
    }
    if (!j.at("polytopal_core").is_null()) body.polytopal_core = point_set_from_json(j.at("polytopal_core"));
    body.core_density = parse_hex_double(j.at("core_density"));
    body.seed = seed_from_json(j.at("seed"));
    if (j.contains("digest") && parse_hex_u64(j.at("digest")) != digest(body)) {
      throw SchemaError("body: digest mismatch");
    }
    return body;
  });
}

Json net_to_json(const DeltaNet& net) {
  Json j = document(schema::kNet);
  j["dimension"] = net.dim();
  j["delta"] = hex_double(net.delta);
  j["centers"] = point_set_to_json(net.centers);
  j["seed"] = seed_to_json(net.seed);
  j["symmetric"] = net.symmetric;
  j["separation_verified"] = net.separation_verified;
  j["coverage_confidence"] = hex_double(net.coverage_confidence);
  j["probe_count"] = net.probe_count;
  j["digest"] = hex_u64(digest(net));
  return j;
}

DeltaNet net_from_json(const Json& j) {
  return schema_guard([&] {
    expect_schema(j, schema::kNet);
    DeltaNet net;
    net.delta = parse_hex_double(j.at("delta"));
    net.centers = point_set_from_json(j.at("centers"));
    net.seed = seed_from_json(j.at("seed"));
    net.symmetric = j.at("symmetric").get<bool>();
    net.separation_verified = j.at("separation_verified").get<bool>();
    net.coverage_confidence = parse_hex_double(j.at("coverage_confidence"));
    net.probe_count = j.at("probe_count").get<std::uint64_t>();
    if (j.contains("digest") && parse_hex_u64(j.at("digest")) != digest(net)) {
      throw SchemaError("net: digest mismatch");
    }
    return net;
  });
}

Json certificate_to_json(const Certificate& c) {
  Json j = document(schema::kCertificate);
  j["body_digest"] = hex_u64(c.body_digest);
  j["net_digest"] = hex_u64(c.net_digest);
  j["dimension"] = c.dim;
  j["spikes"] = c.spikes;
  j["net_size"] = c.net_size;
  j["bigD"] = hex_double(c.bigD);
  j["alpha"] = hex_double(c.alpha);
  j["delta"] = hex_double(c.delta);
  j["theta"] = hex_double(c.theta);
  j["p"] = hex_double(c.p);
  j["T"] = hex_double(c.T);
  j["e1"] = event_to_json(c.e1);
  j["e2prime"] = event_to_json(c.e2prime);
  j["lower_bound"] = optional_to_json(c.lower_bound);
  j["coverage_confidence"] = hex_double(c.coverage_confidence);
  j["label"] = c.label();
  return j;
}

Certificate certificate_from_json(const Json& j) {
  return schema_guard([&] {
    expect_schema(j, schema::kCertificate);
    Certificate c;
    c.body_digest = parse_hex_u64(j.at("body_digest"));
    c.net_digest = parse_hex_u64(j.at("net_digest"));
    c.dim = j.at("dimension").get<int>();
    c.spikes = j.at("spikes").get<std::size_t>();
    c.net_size = j.at("net_size").get<std::size_t>();
    c.bigD = parse_hex_double(j.at("bigD"));
    c.alpha = parse_hex_double(j.at("alpha"));
    c.delta = parse_hex_double(j.at("delta"));
    c.theta = parse_hex_double(j.at("theta"));
    c.p = parse_hex_double(j.at("p"));
    c.T = parse_hex_double(j.at("T"));
    c.e1 = event_from_json(j.at("e1"));
    c.e2prime = event_from_json(j.at("e2prime"));
    if (!j.at("lower_bound").is_null()) c.lower_bound = parse_hex_double(j.at("lower_bound"));
    c.coverage_confidence = parse_hex_double(j.at("coverage_confidence"));
    return c;
  });
}

Json cover_to_json(const CapCover& c) {
  Json j = document(schema::kCover);
  j["dimension"] = c.dim;
  j["radius"] = hex_double(c.radius);
  j["centers"] = point_set_to_json(c.centers);
  j["size"] = c.centers.size();
  j["verification"] = coverage_to_json(c.verification);
  j["repair_rounds"] = c.repair_rounds;
  j["numerator_bound"] = optional_to_json(c.numerator_bound);
  return j;
}

CapCover cover_from_json(const Json& j) {
  return schema_guard([&] {
    expect_schema(j, schema::kCover);
    CapCover c;
    c.dim = j.at("dimension").get<int>();
    c.radius = parse_hex_double(j.at("radius"));
    c.centers = point_set_from_json(j.at("centers"));
    c.verification = coverage_from_json(j.at("verification"));
    c.repair_rounds = j.at("repair_rounds").get<int>();
    if (!j.at("numerator_bound").is_null()) c.numerator_bound = parse_hex_double(j.at("numerator_bound"));
    return c;
  });
}

namespace {

Json plan_fields(const Plan& p) {
  return {{"bigD", hex_double(p.bigD)},
          {"n", p.n},
          {"dimension", p.dim},
          {"in_nominal_range", p.in_nominal_range},
          {"alpha", hex_double(p.alpha)},
          {"delta", hex_double(p.delta)},
          {"p", hex_double(p.p)},
          {"log_p", hex_double(p.log_p)},
          {"theta", hex_double(p.theta)},
          {"log_theta", hex_double(p.log_theta)},
          {"N", hex_double(p.N)},
          {"log_N", hex_double(p.log_N)},
          {"T", hex_double(p.T)},
          {"log_T", hex_double(p.log_T)},
          {"lower_bound", hex_double(p.lower_bound)},
          {"log_lower_bound", hex_double(p.log_lower_bound)},
          {"exact",
           {{"n_positive", p.exact.n_positive},
            {"n_upper", p.exact.n_upper},
            {"net_tail", p.exact.net_tail},
            {"theta_at_least_6", p.exact.theta_at_least_6},
            {"combined", p.exact.combined},
            {"via_alpha_delta", p.exact.via_alpha_delta},
            {"via_alpha", p.exact.via_alpha},
            {"alpha_range", p.exact.alpha_range},
            {"sin_side", p.exact.sin_side}}},
          {"sufficient",
           {{"bw_upper_valid", p.sufficient.bw_upper_valid},
            {"bw_upper_to_target", p.sufficient.bw_upper_to_target},
            {"scaling_applicable", p.sufficient.scaling_applicable},
            {"via_alpha_implies_via_alpha_delta", p.sufficient.via_alpha_implies_via_alpha_delta},
            {"via_alpha_delta_implies_combined", p.sufficient.via_alpha_delta_implies_combined}}},
          {"feasible", p.feasible()}};
}

Plan plan_fields_from(const Json& j) {
  Plan p;
  p.bigD = parse_hex_double(j.at("bigD"));
  p.n = j.at("n").get<int>();
  p.dim = j.at("dimension").get<int>();
  p.in_nominal_range = j.at("in_nominal_range").get<bool>();
  p.alpha = parse_hex_double(j.at("alpha"));
  p.delta = parse_hex_double(j.at("delta"));
  p.p = parse_hex_double(j.at("p"));
  p.log_p = parse_hex_double(j.at("log_p"));
  p.theta = parse_hex_double(j.at("theta"));
  p.log_theta = parse_hex_double(j.at("log_theta"));
  p.N = parse_hex_double(j.at("N"));
  p.log_N = parse_hex_double(j.at("log_N"));
  p.T = parse_hex_double(j.at("T"));
  p.log_T = parse_hex_double(j.at("log_T"));
  p.lower_bound = parse_hex_double(j.at("lower_bound"));
  p.log_lower_bound = parse_hex_double(j.at("log_lower_bound"));
  const auto& e = j.at("exact");
  p.exact.n_positive = e.at("n_positive").get<bool>();
  p.exact.n_upper = e.at("n_upper").get<bool>();
  p.exact.net_tail = e.at("net_tail").get<bool>();
  p.exact.theta_at_least_6 = e.at("theta_at_least_6").get<bool>();
  p.exact.combined = e.at("combined").get<bool>();
  p.exact.via_alpha_delta = e.at("via_alpha_delta").get<bool>();
  p.exact.via_alpha = e.at("via_alpha").get<bool>();
  p.exact.alpha_range = e.at("alpha_range").get<bool>();
  p.exact.sin_side = e.at("sin_side").get<bool>();
  const auto& s = j.at("sufficient");
  p.sufficient.bw_upper_valid = s.at("bw_upper_valid").get<bool>();
  p.sufficient.bw_upper_to_target = s.at("bw_upper_to_target").get<bool>();
  p.sufficient.scaling_applicable = s.at("scaling_applicable").get<bool>();
  p.sufficient.via_alpha_implies_via_alpha_delta = s.at("via_alpha_implies_via_alpha_delta").get<bool>();
  p.sufficient.via_alpha_delta_implies_combined = s.at("via_alpha_delta_implies_combined").get<bool>();
  return p;
}

std::optional<int> optional_int(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<int>();
}

}  // namespace

Plan plan_from_json(const Json& j) {
  return schema_guard([&] {
    expect_schema(j, schema::kPlan);
    return plan_fields_from(j);
  });
}

ScanTable scan_from_json(const Json& j) {
  return schema_guard([&] {
    expect_schema(j, schema::kScan);
    ScanTable t;
    t.bigD = parse_hex_double(j.at("bigD"));
    t.onset_n_positive = optional_int(j.at("onset_n_positive"));
    t.onset_n_upper = optional_int(j.at("onset_n_upper"));
    t.onset_net_tail = optional_int(j.at("onset_net_tail"));
    t.onset_theta = optional_int(j.at("onset_theta"));
    t.first_feasible = optional_int(j.at("first_feasible"));
    t.stable_feasible = optional_int(j.at("stable_feasible"));
    for (const auto& row : j.at("rows")) t.rows.push_back(plan_fields_from(row));
    return t;
  });
}

Json plan_to_json(const Plan& p) {
  Json j = document(schema::kPlan);
  j.update(plan_fields(p));
  return j;
}

Json scan_to_json(const ScanTable& t) {
  Json j = document(schema::kScan);
  j["bigD"] = hex_double(t.bigD);
  j["onset_n_positive"] = optional_to_json(t.onset_n_positive);
  j["onset_n_upper"] = optional_to_json(t.onset_n_upper);
  j["onset_net_tail"] = optional_to_json(t.onset_net_tail);
  j["onset_theta"] = optional_to_json(t.onset_theta);
  j["first_feasible"] = optional_to_json(t.first_feasible);
  j["stable_feasible"] = optional_to_json(t.stable_feasible);
  Json rows = Json::array();
  for (const auto& p : t.rows) rows.push_back(plan_fields(p));
  j["rows"] = rows;
  return j;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw ResourceError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path);
  if (!out) throw ResourceError("cannot write " + path.string());
  out << text;
  if (!out) throw ResourceError("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace spiky
