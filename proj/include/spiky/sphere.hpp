#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spiky/random.hpp"

namespace spiky {

namespace vec {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace vec

/// A point of S^{d-1}. The norm is within 1e-12 of one and all coordinates
/// are finite.
class UnitVector {
 public:
  /// Scales `v` to unit length. Throws DomainError for zero or non-finite input.
  static UnitVector normalized(std::vector<double> v);
  /// Accepts `v` only if it already has unit norm (tolerance 1e-12).
  static UnitVector from_unit(std::vector<double> v);
  /// sign * e_k in dimension `dim`.
  static UnitVector axis(int dim, int k, double sign = 1.0);

  [[nodiscard]] int dim() const { return static_cast<int>(coords_.size()); }
  [[nodiscard]] std::span<const double> coords() const { return coords_; }
  [[nodiscard]] const std::vector<double>& vector() const { return coords_; }
  double operator[](std::size_t k) const { return coords_[k]; }

  UnitVector operator-() const;

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  explicit UnitVector(std::vector<double> c) : coords_(std::move(c)) {}
  std::vector<double> coords_;
};

/// Contiguous row-major storage for many points of the same dimension.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(int dim) : dim_(dim) {}

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  [[nodiscard]] bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> row(std::size_t i) { return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }

  void push_back(std::span<const double> p);
  void push_back(const UnitVector& u) { push_back(u.coords()); }
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }
  void resize(std::size_t n) { coords_.resize(n * dim_); }
  void erase(std::size_t i);

  [[nodiscard]] UnitVector unit(std::size_t i) const;
  [[nodiscard]] const std::vector<double>& raw() const { return coords_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

/// Uniform point on S^{d-1}: d standard normals, normalized.
UnitVector sample_uniform(int d, Stream& rng);
UnitVector sample_uniform(int d, SeedSpec seed);
/// Writes a uniform point into `out` (length d); the allocation-free path used by kernels.
void sample_uniform_into(std::span<double> out, Stream& rng);

/// Probe k of a cloud is drawn from seed.child(k), so clouds can be generated
/// in any order or in parallel with identical results.
PointSet uniform_cloud(int d, std::size_t count, SeedSpec seed, int workers = 0);

/// Angular distance in [0, pi]; exactly 0 for u == v and pi for u == -v.
double angle(const UnitVector& u, const UnitVector& v);
double angle(std::span<const double> u, std::span<const double> v);

/// Size of Rogers' covering with n = d - 1: n^2 / sin^n(delta).
double rogers_bound(int d, double delta);

struct CoverageReport {
  std::uint64_t probes = 0;
  std::uint64_t uncovered = 0;
  /// Largest angle from any probe to its nearest center.
  double worst_angle = 0.0;
  std::optional<UnitVector> witness;
  bool pass = false;
  /// One minus the 95% upper bound on the uncovered mass (zero on failure).
  double confidence = 0.0;
  friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

/// Probabilistic check that caps of `radius` around `centers` cover the sphere.
CoverageReport verify_coverage(const PointSet& centers, double radius, std::uint64_t probes, SeedSpec seed,
                               int workers = 0);

/// Lambda: a finite direction set whose delta-caps cover the sphere.
struct DeltaNet {
  PointSet centers;
  double delta = 0.0;
  SeedSpec seed;
  bool symmetric = false;
  bool separation_verified = false;
  double coverage_confidence = 0.0;
  std::uint64_t probe_count = 0;

  [[nodiscard]] int dim() const { return centers.dim(); }
  [[nodiscard]] std::size_t size() const { return centers.size(); }
  friend bool operator==(const DeltaNet&, const DeltaNet&) = default;
};

struct NetOptions {
  std::uint64_t max_consecutive_rejections = 100000;
  /// Candidates per closure round after the sequential phase; zero disables closure.
  std::uint64_t closure_batch = 1u << 20;
  int max_closure_rounds = 64;
  /// Defaults to 10 * rogers_bound(d, delta).
  std::optional<std::size_t> size_cap;
  /// Admit centers in antipodal pairs, separated from every +-center.
  bool symmetric = false;
  int workers = 0;
};

/// Greedy maximal delta-separated set: uniform candidates are admitted iff
/// their angle to every center exceeds delta. Stops after
/// `max_consecutive_rejections` consecutive rejections, then runs closure
/// rounds over large candidate batches until one admits nothing.
DeltaNet build_delta_net(int d, double delta, SeedSpec seed, const NetOptions& opts = {});

/// Largest pairwise separation violation check; true iff all center pairs
/// (and antipodes, for symmetric nets, apart from the pair itself) are more
/// than delta apart.
bool is_separated(const PointSet& centers, double delta);

/// Updates net.coverage_confidence and net.probe_count from a fresh probe batch.
CoverageReport verify_net_coverage(DeltaNet& net, std::uint64_t probes, SeedSpec seed, int workers = 0);

}  // namespace spiky
