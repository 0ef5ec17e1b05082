#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spiky/random.hpp"
#include "spiky/sphere.hpp"

namespace spiky {

/// K = conv({+-X_i} u (1/D) B), or conv({+-X_i} u A) for a finite core A.
/// Only X_i is stored; every consumer works with both signs.
struct SpikyBody {
  int dim = 0;
  PointSet spikes;
  double bigD = 1.0;
  double inner_radius = 1.0;
  /// Finite, origin-symmetric replacement for the inner ball (points of norm 1/D).
  std::optional<PointSet> polytopal_core;
  double core_density = 0.0;
  SeedSpec seed;

  [[nodiscard]] std::size_t size() const { return spikes.size(); }
  [[nodiscard]] UnitVector spike(std::size_t i) const { return spikes.unit(i); }
  /// arcsin(1/D).
  [[nodiscard]] double alpha() const;

  /// Pure ball (no spikes, D = 1): the smooth baseline body.
  static SpikyBody unit_ball(int d);
  /// Hand-made body from given unit spikes.
  static SpikyBody from_spikes(PointSet spikes, double bigD);

  friend bool operator==(const SpikyBody&, const SpikyBody&) = default;
};

/// N independent uniform spikes; spike k is drawn from seed.child(k).
SpikyBody construct(int d, std::size_t spikes, double bigD, SeedSpec seed, int workers = 0);

/// 64-bit FNV-1a digest over dimension, D and all coordinates.
std::uint64_t digest(const SpikyBody& body);
std::uint64_t digest(const DeltaNet& net);

enum class EventId { E1, E2Prime };

struct PairWitness {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  /// min(angle(X_i, X_j), angle(-X_i, X_j)).
  double angle = 0.0;
  bool antipodal = false;
  friend bool operator==(const PairWitness&, const PairWitness&) = default;
};

struct CenterWitness {
  std::uint32_t center = 0;
  std::uint32_t multiplicity = 0;
  friend bool operator==(const CenterWitness&, const CenterWitness&) = default;
};

struct EventReport {
  EventId id = EventId::E1;
  bool occurred = false;
  std::vector<PairWitness> pairs;
  std::vector<CenterWitness> centers;
  /// pi - 2 alpha for E1; T = N theta p for E2'.
  double threshold_used = 0.0;
  std::uint32_t max_multiplicity = 0;
  std::optional<std::uint32_t> argmax_center;
  std::vector<std::string> warnings;
  friend bool operator==(const EventReport&, const EventReport&) = default;
};

/// Tie band for angular comparisons; boundary ties count as the event occurring.
inline constexpr double kTieTolerance = 1e-12;

/// E1: some i != j has angle(X_i, X_j) < pi - 2 alpha or angle(-X_i, X_j) < pi - 2 alpha.
/// Throws PreconditionError when D >= sqrt(2).
EventReport check_e1(const SpikyBody& body, int workers = 0);

/// E2': some net center sees more than T = N theta p of the +-X_i within
/// angle alpha + delta, where p = 2 cap_measure(d, alpha + delta).
EventReport check_e2_prime(const SpikyBody& body, const DeltaNet& net, double theta, int workers = 0);

struct Certificate {
  std::uint64_t body_digest = 0;
  std::uint64_t net_digest = 0;
  int dim = 0;
  std::size_t spikes = 0;
  std::size_t net_size = 0;
  double bigD = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double theta = 0.0;
  double p = 0.0;
  double T = 0.0;
  EventReport e1;
  EventReport e2prime;
  /// 2 / (theta p); present iff neither event occurred.
  std::optional<double> lower_bound;
  double coverage_confidence = 0.0;

  /// "certified", "probabilistically certified" (net coverage confidence < 1) or "none".
  [[nodiscard]] std::string label() const;
  friend bool operator==(const Certificate&, const Certificate&) = default;
};

/// Runs both event checks; the bound i(K) >= 2/(theta p) is emitted iff both are clean.
Certificate certify(const SpikyBody& body, const DeltaNet& net, double theta, int workers = 0);

/// Number of +-X_i within angular distance `radius` (closed, with the tie band)
/// of each direction.
std::vector<std::uint32_t> multiplicity_profile(const SpikyBody& body, const PointSet& directions, double radius,
                                                int workers = 0);

/// Replaces the inner ball by (1/D) times a symmetric core_density-net.
SpikyBody polytopal_variant(const SpikyBody& body, double core_density, SeedSpec seed);

}  // namespace spiky
