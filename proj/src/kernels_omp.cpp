#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spiky/kernels.hpp"

namespace spiky::kernels {

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

namespace omp {

std::vector<std::uint32_t> signed_cap_counts(const PointSet& spikes, const PointSet& centers, double threshold,
                                             int workers) {
  std::vector<std::uint32_t> counts(centers.size(), 0);
  const auto n = static_cast<std::int64_t>(centers.size());
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (std::int64_t c = 0; c < n; ++c) {
    std::uint32_t k = 0;
    for (std::size_t i = 0; i < spikes.size(); ++i) {
      const double d = vec::dot(centers[c], spikes[i]);
      k += (d >= threshold) + (-d >= threshold);
    }
    counts[c] = k;
  }
  return counts;
}

std::vector<IndexPair> conflicting_pairs(const PointSet& points, double threshold, int workers) {
  std::vector<IndexPair> out;
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel num_threads(resolve_workers(workers))
  {
    std::vector<IndexPair> local;
#pragma omp for schedule(dynamic, 8) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = i + 1; j < n; ++j) {
        if (std::abs(vec::dot(points[i], points[j])) > threshold) {
          local.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
      }
    }
#pragma omp critical
    out.insert(out.end(), local.begin(), local.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

CoverageScan coverage_scan(const PointSet& centers, double cos_radius, std::uint64_t probes, SeedSpec seed,
                           std::size_t keep, int workers) {
  CoverageScan scan;
  scan.worst_dot = 2.0;
  const auto n = static_cast<std::int64_t>(probes);
#pragma omp parallel num_threads(resolve_workers(workers))
  {
    std::vector<double> u(centers.dim());
    std::vector<std::uint64_t> local_idx;
    std::uint64_t local_count = 0;
    double local_worst = 2.0;
    std::uint64_t local_worst_index = 0;
#pragma omp for schedule(static) nowait
    for (std::int64_t k = 0; k < n; ++k) {
      Stream rng(seed.child(static_cast<std::uint64_t>(k)));
      sample_uniform_into(u, rng);
      double best = -2.0;
      for (std::size_t c = 0; c < centers.size(); ++c) best = std::max(best, vec::dot(u, centers[c]));
      if (best < cos_radius) {
        ++local_count;
        if (local_idx.size() < keep) local_idx.push_back(static_cast<std::uint64_t>(k));
      }
      if (best < local_worst) {
        local_worst = best;
        local_worst_index = static_cast<std::uint64_t>(k);
      }
    }
#pragma omp critical
    {
      scan.uncovered += local_count;
      scan.uncovered_indices.insert(scan.uncovered_indices.end(), local_idx.begin(), local_idx.end());
      if (local_worst < scan.worst_dot ||
          (local_worst == scan.worst_dot && local_worst_index < scan.worst_index)) {
        scan.worst_dot = local_worst;
        scan.worst_index = local_worst_index;
      }
    }
  }
  std::sort(scan.uncovered_indices.begin(), scan.uncovered_indices.end());
  if (scan.uncovered_indices.size() > keep) scan.uncovered_indices.resize(keep);
  if (probes == 0) scan.worst_dot = 1.0;
  return scan;
}

namespace {

// Points grouped by their nearest anchor. A closed cap of angular radius r
// about x can reach a point of bucket a only if angle(x, a) <= r + spread(a).
struct AnchorBuckets {
  PointSet anchors;
  std::vector<PointSet> members;
  std::vector<double> spread;
};

AnchorBuckets make_buckets(const PointSet& points) {
  const std::size_t n = points.size();
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(n))), 16, 256);
  AnchorBuckets b;
  b.anchors = PointSet(points.dim());
  for (std::size_t a = 0; a < k; ++a) b.anchors.push_back(points[a * n / k]);
  b.members.assign(k, PointSet(points.dim()));
  b.spread.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_dot = -2.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double d = vec::dot(points[i], b.anchors[a]);
      if (d > best_dot) {
        best_dot = d;
        best = a;
      }
    }
    b.members[best].push_back(points[i]);
    b.spread[best] = std::max(b.spread[best], std::acos(std::clamp(best_dot, -1.0, 1.0)));
  }
  return b;
}

}  // namespace

std::vector<std::uint8_t> admissible(const PointSet& candidates, const PointSet& centers, double cos_delta,
                                     bool symmetric, int workers) {
  std::vector<std::uint8_t> ok(candidates.size(), 1);
  const auto n = static_cast<std::int64_t>(candidates.size());
  auto conflicts = [&](std::span<const double> x, const PointSet& pts) {
    for (std::size_t c = 0; c < pts.size(); ++c) {
      double d = vec::dot(x, pts[c]);
      if (symmetric) d = std::abs(d);
      if (d >= cos_delta) return true;
    }
    return false;
  };
  if (centers.size() < 1024 || !(cos_delta > -1.0 && cos_delta < 1.0)) {
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
    for (std::int64_t k = 0; k < n; ++k) ok[k] = !conflicts(candidates[k], centers);
    return ok;
  }
  // Bucket pruning only skips points that cannot conflict, so the answer is
  // the same as the plain scan.
  const AnchorBuckets b = make_buckets(centers);
  const double radius = std::acos(cos_delta);
  std::vector<double> reach(b.anchors.size());
  for (std::size_t a = 0; a < reach.size(); ++a) {
    const double r = radius + b.spread[a] + 1e-6;
    reach[a] = r >= std::numbers::pi - 1e-3 ? -2.0 : std::cos(r);
  }
#pragma omp parallel num_threads(resolve_workers(workers))
  {
    std::vector<double> dots(b.anchors.size());
#pragma omp for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
      const auto x = candidates[k];
      std::size_t nearest = 0;
      for (std::size_t a = 0; a < dots.size(); ++a) {
        dots[a] = vec::dot(x, b.anchors[a]);
        if (dots[a] > dots[nearest]) nearest = a;
      }
      auto reachable = [&](std::size_t a) { return dots[a] >= reach[a] || (symmetric && -dots[a] >= reach[a]); };
      bool hit = reachable(nearest) && conflicts(x, b.members[nearest]);
      for (std::size_t a = 0; !hit && a < dots.size(); ++a) {
        if (a != nearest && reachable(a)) hit = conflicts(x, b.members[a]);
      }
      ok[k] = !hit;
    }
  }
  return ok;
}

std::vector<std::uint64_t> coverage_gains(const PointSet& candidates, const PointSet& targets,
                                          std::span<const std::uint8_t> covered, double cos_radius,
                                          int workers) {
  std::vector<std::uint64_t> gains(candidates.size(), 0);
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(resolve_workers(workers))
  for (std::int64_t k = 0; k < n; ++k) {
    std::uint64_t g = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (!covered[t] && vec::dot(candidates[k], targets[t]) >= cos_radius) ++g;
    }
    gains[k] = g;
  }
  return gains;
}

std::uint64_t mark_covered(std::span<const double> center, const PointSet& targets,
                           std::span<std::uint8_t> covered, double cos_radius, int workers) {
  std::uint64_t fresh = 0;
  const auto n = static_cast<std::int64_t>(targets.size());
#pragma omp parallel for schedule(static) reduction(+ : fresh) num_threads(resolve_workers(workers))
  for (std::int64_t t = 0; t < n; ++t) {
    if (!covered[t] && vec::dot(center, targets[t]) >= cos_radius) {
      covered[t] = 1;
      ++fresh;
    }
  }
  return fresh;
}

}  // namespace omp
}  // namespace spiky::kernels
