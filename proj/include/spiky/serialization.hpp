#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spiky/bounds.hpp"
#include "spiky/errors.hpp"
#include "spiky/spiky_body.hpp"
#include "spiky/sphere.hpp"

namespace spiky {

using Json = nlohmann::json;

inline constexpr std::string_view kLibraryVersion = "0.1.0";

namespace schema {
inline constexpr std::string_view kBody = "spiky.body/1";
inline constexpr std::string_view kNet = "spiky.net/1";
inline constexpr std::string_view kCertificate = "spiky.certificate/1";
inline constexpr std::string_view kPlan = "spiky.plan/1";
inline constexpr std::string_view kScan = "spiky.scan/1";
inline constexpr std::string_view kCover = "spiky.cover/1";
inline constexpr std::string_view kConfig = "spiky.config/1";
inline constexpr std::string_view kReport = "spiky.report/1";
}  // namespace schema

/// Doubles travel as C99 hex-float strings ("%a"), so every value round-trips
/// bit-exactly.
std::string hex_double(double x);
double parse_hex_double(const Json& j);
Json hex_vector(std::span<const double> xs);
std::vector<double> parse_hex_vector(const Json& j);
std::string hex_u64(std::uint64_t x);
std::uint64_t parse_hex_u64(const Json& j);

Json point_set_to_json(const PointSet& ps);
PointSet point_set_from_json(const Json& j);
Json coverage_to_json(const CoverageReport& r);
CoverageReport coverage_from_json(const Json& j);
Json event_to_json(const EventReport& r);
EventReport event_from_json(const Json& j);

// Top-level documents carry "schema" and "library_version" fields; the
// loaders throw SchemaError on a missing or foreign schema.
Json body_to_json(const SpikyBody& body);
SpikyBody body_from_json(const Json& j);
Json net_to_json(const DeltaNet& net);
DeltaNet net_from_json(const Json& j);
Json certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const Json& j);
Json cover_to_json(const CapCover& c);
CapCover cover_from_json(const Json& j);
Json plan_to_json(const Plan& p);
Plan plan_from_json(const Json& j);
Json scan_to_json(const ScanTable& t);
ScanTable scan_from_json(const Json& j);

void expect_schema(const Json& j, std::string_view name);

/// Runs a loader, reporting missing keys and wrong types as SchemaError.
template <class F>
auto schema_guard(F&& load) -> decltype(load()) {
  try {
    return load();
  } catch (const Json::exception& e) {
    throw SchemaError(e.what());
  }
}

/// Throws ResourceError on I/O failure and SchemaError on malformed JSON.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace spiky
