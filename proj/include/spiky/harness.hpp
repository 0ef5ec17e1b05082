#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spiky/bounds.hpp"
#include "spiky/serialization.hpp"

namespace spiky {

enum class ExperimentKind { McE1, McE2, McChernoff, FactCap, EndToEnd, Scan, CoverBench };

std::string_view kind_name(ExperimentKind k);
ExperimentKind parse_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::McE1;
  /// Ambient dimensions; the campaign runs one cell per (dimension, N) pair.
  std::vector<int> dims{3};
  std::vector<std::uint64_t> spikes{2};
  double bigD = 1.1;
  double theta = 6.0;
  /// "alpha/n" (delta = alpha / (d - 1)) or "explicit".
  std::string delta_policy = "alpha/n";
  double delta = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t master_seed = 0;
  /// mc-chernoff: success probabilities, one cell per (N, p).
  std::vector<double> success_probs{0.05};
  /// Soundness sweep (end-to-end) or fresh net verification probes.
  std::uint64_t probes = 100000;
  /// factcap: (spike, direction) probes per trial.
  std::uint64_t probes_per_trial = 8;
  std::uint64_t net_rejections = 100000;
  /// scan: n range.
  int n_from = 2;
  int n_to = 200;
  bool keep_records = true;
  bool record_timing = false;
  // Execution-only settings; excluded from the hash and from reports.
  std::string output_json;
  std::string output_csv;
  int workers = 0;
};

/// Canonical form without execution-only settings.
Json config_to_json(const ExperimentConfig& c);
/// Throws SchemaError / DomainError on invalid configs.
ExperimentConfig config_from_json(const Json& j);
void validate(const ExperimentConfig& c);
/// FNV-1a over the canonical JSON text.
std::uint64_t config_hash(const ExperimentConfig& c);

struct TrialRecord {
  std::uint64_t cell = 0;
  std::uint64_t stream_id = 0;
  std::optional<bool> e1;
  std::optional<bool> e2prime;
  std::uint32_t max_multiplicity = 0;
  bool certificate = false;
  /// mc-chernoff draw; factcap and soundness counters.
  std::int64_t value = 0;
  std::uint64_t probes = 0;
  std::uint64_t agreements = 0;
  std::uint64_t disagreements = 0;
  std::uint64_t boundary_band = 0;
  double wall_seconds = 0.0;
  std::string error;
  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct CellSummary {
  int dim = 0;
  std::uint64_t spikes = 0;
  double success_prob = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double p = 0.0;
  double T = 0.0;
  std::uint64_t net_size = 0;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  std::uint64_t e1_count = 0;
  std::uint64_t e2_count = 0;
  std::uint64_t success_count = 0;
  std::uint64_t exceed_count = 0;
  std::uint64_t probes = 0;
  std::uint64_t agreements = 0;
  std::uint64_t disagreements = 0;
  std::uint64_t boundary_band = 0;
  std::int64_t max_value = 0;
  friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

/// One bound comparison. relation "<=" passes when empirical <= bound + 4
/// stderr; "==" passes when |empirical - bound| <= 4 stderr.
struct ClaimRow {
  std::string name;
  std::uint64_t cell = 0;
  std::string relation = "<=";
  double bound = 0.0;
  double empirical = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double stderr_ = 0.0;
  bool pass = false;
  friend bool operator==(const ClaimRow&, const ClaimRow&) = default;
};

struct CampaignReport {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::vector<CellSummary> cells;
  std::vector<ClaimRow> claims;
  std::vector<TrialRecord> records;
  std::optional<ScanTable> scan;
  std::vector<CapCover> covers;
  bool partial_failure = false;

  [[nodiscard]] bool all_pass() const;
};

/// Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

/// Binomial standard error with the bound as reference probability.
double bound_stderr(double bound, std::uint64_t n);

/// Runs every trial of every cell; trial t of cell c uses
/// SeedSpec{master_seed, t}.child(c), so results do not depend on `workers`.
CampaignReport run_campaign(const ExperimentConfig& config);

/// Called with (cell, stream_id) at the start of every trial, inside the
/// trial's isolation boundary; a throwing hook fails only that trial.
using TrialHook = std::function<void(std::uint64_t, std::uint64_t)>;
CampaignReport run_campaign(const ExperimentConfig& config, const TrialHook& before_trial);

Json report_to_json(const CampaignReport& r);
CampaignReport report_from_json(const Json& j);

/// Per-trial rows (or per-n rows for scans, per-cover rows for cover-bench).
std::string records_csv(const CampaignReport& r);
std::string claims_csv(const CampaignReport& r);
/// cap_measure(d, phi) on a uniform phi grid.
std::string omega_csv(const std::vector<int>& dims, int points);

/// Writes report JSON and CSVs to the configured outputs.
void emit_report(const CampaignReport& r, const std::string& json_path, const std::string& csv_path);

}  // namespace spiky
