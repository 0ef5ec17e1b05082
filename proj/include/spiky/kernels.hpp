#pragma once

// Data-parallel inner loops. Every kernel has a serial reference
// implementation and an OpenMP one; the two must return identical results
// for every input and thread count (tests/test_kernels.cpp, bench/).

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spiky/random.hpp"
#include "spiky/sphere.hpp"

namespace spiky::kernels {

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

struct CoverageScan {
  std::uint64_t uncovered = 0;
  std::uint64_t worst_index = 0;
  /// max over centers of <probe, center> at the worst probe.
  double worst_dot = 1.0;
  /// Ascending probe indices of the first `keep` uncovered probes.
  std::vector<std::uint64_t> uncovered_indices;
};

namespace serial {

/// For each center c: #{i : <c, x_i> >= threshold} + #{i : <c, -x_i> >= threshold}.
std::vector<std::uint32_t> signed_cap_counts(const PointSet& spikes, const PointSet& centers, double threshold);

/// Pairs i < j with |<x_i, x_j>| > threshold, sorted lexicographically.
std::vector<IndexPair> conflicting_pairs(const PointSet& points, double threshold);

/// Probe k is sample_uniform(seed.child(k)); it is uncovered when its largest
/// dot product with the centers is below `cos_radius`.
CoverageScan coverage_scan(const PointSet& centers, double cos_radius, std::uint64_t probes, SeedSpec seed,
                           std::size_t keep = 16);

/// 1 where the candidate's dot with every center is < cos_delta
/// (|dot| when `symmetric`).
std::vector<std::uint8_t> admissible(const PointSet& candidates, const PointSet& centers, double cos_delta,
                                     bool symmetric);

/// For each candidate, the number of uncovered targets with dot >= cos_radius.
std::vector<std::uint64_t> coverage_gains(const PointSet& candidates, const PointSet& targets,
                                          std::span<const std::uint8_t> covered, double cos_radius);

/// Marks targets within the cap of `center`; returns how many were newly covered.
std::uint64_t mark_covered(std::span<const double> center, const PointSet& targets,
                           std::span<std::uint8_t> covered, double cos_radius);

}  // namespace serial

namespace omp {

std::vector<std::uint32_t> signed_cap_counts(const PointSet& spikes, const PointSet& centers, double threshold,
                                             int workers = 0);
std::vector<IndexPair> conflicting_pairs(const PointSet& points, double threshold, int workers = 0);
CoverageScan coverage_scan(const PointSet& centers, double cos_radius, std::uint64_t probes, SeedSpec seed,
                           std::size_t keep = 16, int workers = 0);
std::vector<std::uint8_t> admissible(const PointSet& candidates, const PointSet& centers, double cos_delta,
                                     bool symmetric, int workers = 0);
std::vector<std::uint64_t> coverage_gains(const PointSet& candidates, const PointSet& targets,
                                          std::span<const std::uint8_t> covered, double cos_radius,
                                          int workers = 0);
std::uint64_t mark_covered(std::span<const double> center, const PointSet& targets,
                           std::span<std::uint8_t> covered, double cos_radius, int workers = 0);

}  // namespace omp

/// Thread count for a `workers` argument: 0 means the OpenMP default.
int resolve_workers(int workers);

}  // namespace spiky::kernels
