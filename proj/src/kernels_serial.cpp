#include <algorithm>
#include <cmath>

#include "spiky/kernels.hpp"

namespace spiky::kernels::serial {

std::vector<std::uint32_t> signed_cap_counts(const PointSet& spikes, const PointSet& centers, double threshold) {
  std::vector<std::uint32_t> counts(centers.size(), 0);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    std::uint32_t k = 0;
    for (std::size_t i = 0; i < spikes.size(); ++i) {
      const double d = vec::dot(centers[c], spikes[i]);
      k += (d >= threshold) + (-d >= threshold);
    }
    counts[c] = k;
  }
  return counts;
}

std::vector<IndexPair> conflicting_pairs(const PointSet& points, double threshold) {
  std::vector<IndexPair> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (std::abs(vec::dot(points[i], points[j])) > threshold) {
        out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
    }
  }
  return out;
}

CoverageScan coverage_scan(const PointSet& centers, double cos_radius, std::uint64_t probes, SeedSpec seed,
                           std::size_t keep) {
  CoverageScan scan;
  std::vector<double> u(centers.dim());
  for (std::uint64_t k = 0; k < probes; ++k) {
    Stream rng(seed.child(k));
    sample_uniform_into(u, rng);
    double best = -2.0;
    for (std::size_t c = 0; c < centers.size(); ++c) best = std::max(best, vec::dot(u, centers[c]));
    if (best < cos_radius) {
      ++scan.uncovered;
      if (scan.uncovered_indices.size() < keep) scan.uncovered_indices.push_back(k);
    }
    if (k == 0 || best < scan.worst_dot) {
      scan.worst_dot = best;
      scan.worst_index = k;
    }
  }
  return scan;
}

std::vector<std::uint8_t> admissible(const PointSet& candidates, const PointSet& centers, double cos_delta,
                                     bool symmetric) {
  std::vector<std::uint8_t> ok(candidates.size(), 1);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    for (std::size_t c = 0; c < centers.size(); ++c) {
      double d = vec::dot(candidates[k], centers[c]);
      if (symmetric) d = std::abs(d);
      if (d >= cos_delta) {
        ok[k] = 0;
        break;
      }
    }
  }
  return ok;
}

std::vector<std::uint64_t> coverage_gains(const PointSet& candidates, const PointSet& targets,
                                          std::span<const std::uint8_t> covered, double cos_radius) {
  std::vector<std::uint64_t> gains(candidates.size(), 0);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    std::uint64_t g = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (!covered[t] && vec::dot(candidates[k], targets[t]) >= cos_radius) ++g;
    }
    gains[k] = g;
  }
  return gains;
}

std::uint64_t mark_covered(std::span<const double> center, const PointSet& targets,
                           std::span<std::uint8_t> covered, double cos_radius) {
  std::uint64_t fresh = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (!covered[t] && vec::dot(center, targets[t]) >= cos_radius) {
      covered[t] = 1;
      ++fresh;
    }
  }
  return fresh;
}

}  // namespace spiky::kernels::serial
