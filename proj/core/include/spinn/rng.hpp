#pragma once

#include <cstdint>
#include <initializer_list>

namespace spinn {

// Counter-based pseudo-random stream built on the splitmix64 mixer.
// A stream is keyed by an arbitrary list of 64-bit tags (run seed, axis,
// resample round, ...); streams with different keys are statistically
// independent and drawing from one stream never disturbs another.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(mix(key ^ kPhi)) {}

  static std::uint64_t key_of(std::initializer_list<std::uint64_t> tags) {
    std::uint64_t k = 0x9e3779b97f4a7c15ull;
    for (auto t : tags) k = mix(k ^ mix(t + kPhi));
    return k;
  }

  static RngStream from_tags(std::initializer_list<std::uint64_t> tags) {
    return RngStream(key_of(tags));
  }

  std::uint64_t next_u64() {
    state_ += kPhi;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace spinn
