#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "spiky/bounds.hpp"
#include "spiky/errors.hpp"
#include "spiky/harness.hpp"
#include "spiky/serialization.hpp"

using namespace spiky;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "spiky_serialization_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(HexFloat, RoundTripsEdgeCases) {
  const double cases[] = {0.0,
                          -0.0,
                          1.0,
                          -1.5,
                          0.1,
                          std::numbers::pi,
                          std::numeric_limits<double>::max(),
                          std::numeric_limits<double>::min(),
                          std::numeric_limits<double>::denorm_min(),
                          std::numeric_limits<double>::epsilon(),
                          std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity()};
  for (double x : cases) {
    const double y = parse_hex_double(Json(hex_double(x)));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(x), std::bit_cast<std::uint64_t>(y)) << hex_double(x);
  }
  EXPECT_TRUE(std::isnan(parse_hex_double(Json(hex_double(NAN)))));
  EXPECT_EQ(hex_double(1.0), "0x1p+0");
  EXPECT_EQ(parse_hex_double(Json("0x1.8p+1")), 3.0);
  // Plain numbers are accepted on input.
  EXPECT_EQ(parse_hex_double(Json(2.5)), 2.5);
}

TEST(HexFloat, RejectsMalformed) {
  EXPECT_THROW(parse_hex_double(Json("0x1.8p+1junk")), SchemaError);
  EXPECT_THROW(parse_hex_double(Json("")), SchemaError);
  EXPECT_THROW(parse_hex_double(Json(true)), SchemaError);
  EXPECT_THROW(parse_hex_u64(Json("0xzz")), SchemaError);
}

TEST(HexU64, RoundTrips) {
  for (std::uint64_t x : {0ull, 1ull, 0xdeadbeefull, ~0ull}) EXPECT_EQ(parse_hex_u64(Json(hex_u64(x))), x);
  EXPECT_EQ(hex_u64(255), "0x00000000000000ff");
}

TEST(Vectors, RoundTrip) {
  const std::vector<double> v{1.0 / 3, -2e-300, 7.0};
  EXPECT_EQ(parse_hex_vector(hex_vector(v)), v);
  EXPECT_TRUE(parse_hex_vector(hex_vector(std::vector<double>{})).empty());
}

TEST(Documents, BodyRoundTrip) {
  const SpikyBody b = construct(4, 25, 1.1, SeedSpec{1, 2});
  const Json j = body_to_json(b);
  EXPECT_EQ(j.at("schema"), schema::kBody);
  EXPECT_EQ(j.at("library_version"), kLibraryVersion);
  EXPECT_EQ(j.at("rng"), kRngAlgorithm);
  EXPECT_EQ(body_from_json(j), b);
  // Through text as well.
  EXPECT_EQ(body_from_json(Json::parse(j.dump())), b);

  const SpikyBody v = polytopal_variant(b, 0.6, SeedSpec{1, 3});
  EXPECT_EQ(body_from_json(body_to_json(v)), v);
}

TEST(Documents, NetRoundTrip) {
  DeltaNet net = build_delta_net(3, 0.5, SeedSpec{2, 0});
  verify_net_coverage(net, 10000, SeedSpec{2, 1});
  const Json j = net_to_json(net);
  EXPECT_EQ(j.at("schema"), schema::kNet);
  EXPECT_EQ(net_from_json(j), net);
}

TEST(Documents, CertificateRoundTrip) {
  const SpikyBody b = construct(3, 40, 1.1, SeedSpec{3, 0});
  const DeltaNet net = build_delta_net(3, 0.3, SeedSpec{3, 1});
  const Certificate c = certify(b, net, 1.0);
  EXPECT_TRUE(c.e1.occurred);
  const Certificate back = certificate_from_json(certificate_to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.label(), c.label());
}

TEST(Documents, CoverPlanScanRoundTrip) {
  CoverOptions opts;
  opts.probes = 20000;
  opts.verify_probes = 20000;
  const CapCover cover = greedy_cap_cover(3, 1.1, SeedSpec{4, 0}, opts);
  EXPECT_EQ(cover_from_json(cover_to_json(cover)), cover);
  for (int n : {2, 100, 2000}) {
    const Plan p = plan_parameters(1.1, n);
    EXPECT_EQ(plan_from_json(plan_to_json(p)), p);
  }
  const Plan relaxed = plan_parameters(1.3, 7, true);
  EXPECT_EQ(plan_from_json(plan_to_json(relaxed)), relaxed);
  const ScanTable t = feasibility_scan(1.115, 2, 600);
  EXPECT_EQ(scan_from_json(scan_to_json(t)), t);
}

TEST(Documents, ConfigRoundTrip) {
  ExperimentConfig c;
  c.kind = ExperimentKind::McChernoff;
  c.dims = {3, 5};
  c.spikes = {10, 200};
  c.success_probs = {0.01, 0.05};
  c.theta = 6.5;
  c.master_seed = 0xfeedface;
  c.trials = 123;
  const Json j = config_to_json(c);
  EXPECT_EQ(j.at("schema"), schema::kConfig);
  const ExperimentConfig back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Documents, SchemaErrors) {
  const SpikyBody b = construct(3, 2, 1.1, SeedSpec{5, 0});
  Json j = body_to_json(b);
  EXPECT_THROW(net_from_json(j), SchemaError);
  EXPECT_THROW(expect_schema(Json::object(), schema::kBody), SchemaError);
  EXPECT_THROW(expect_schema(Json::array(), schema::kBody), SchemaError);
  Json other = j;
  other["schema"] = "spiky.body/2";
  EXPECT_THROW(body_from_json(other), SchemaError);
}

TEST(Documents, DigestMismatch) {
  const SpikyBody b = construct(3, 2, 1.1, SeedSpec{6, 0});
  Json j = body_to_json(b);
  j["digest"] = hex_u64(digest(b) ^ 1);
  EXPECT_THROW(body_from_json(j), SchemaError);
  const DeltaNet net = build_delta_net(2, 0.5, SeedSpec{6, 1});
  Json n = net_to_json(net);
  n["digest"] = hex_u64(0);
  EXPECT_THROW(net_from_json(n), SchemaError);
}

TEST(Documents, MalformedContent) {
  const SpikyBody b = construct(3, 2, 1.1, SeedSpec{7, 0});
  Json missing = body_to_json(b);
  missing.erase("spikes");
  EXPECT_THROW(body_from_json(missing), SchemaError);
  Json wrong_type = body_to_json(b);
  wrong_type["dimension"] = "three";
  EXPECT_THROW(body_from_json(wrong_type), SchemaError);
  Json not_unit = body_to_json(b);
  not_unit.erase("digest");
  not_unit["spikes"]["points"][0][0] = hex_double(5.0);
  EXPECT_THROW(body_from_json(not_unit), SchemaError);
}

TEST(Files, WriteAndRead) {
  const auto path = scratch("nested/dir/body.json");
  std::filesystem::remove_all(path.parent_path());
  const SpikyBody b = construct(3, 4, 1.1, SeedSpec{8, 0});
  write_json(path, body_to_json(b));
  EXPECT_EQ(body_from_json(read_json(path)), b);
}

TEST(Files, Errors) {
  EXPECT_THROW(read_json(scratch("does_not_exist.json")), ResourceError);
  const auto bad = scratch("bad.json");
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  EXPECT_THROW(read_json(bad), SchemaError);
  EXPECT_THROW(write_json("/proc/spiky_cannot_write/x.json", Json::object()), ResourceError);
}
