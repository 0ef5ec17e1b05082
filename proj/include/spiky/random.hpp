#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace spiky {

inline constexpr std::string_view kRngAlgorithm = "splitmix64-counter/v1";

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Identifies one reproducible random stream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// Independent sub-stream, e.g. one per probe or per purpose.
  [[nodiscard]] constexpr SeedSpec child(std::uint64_t tag) const {
    return {master_seed, mix64(stream_id ^ mix64(tag + 0x632be59bd9b4e019ULL))};
  }

  friend constexpr bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Counter-based generator: output k is mix64(key + k * gamma), where the key
/// is a hash of (master_seed, stream_id). Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(SeedSpec seed)
      : key_(mix64(mix64(seed.master_seed + kGamma) ^ (seed.stream_id * 0xd1b54a32d192ed03ULL))) {}

  constexpr result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace spiky
