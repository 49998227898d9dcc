#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rsmfg {

// 64-bit avalanche finalizer (splitmix64).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t hash_combine64(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 12) + (h >> 4)));
}

// Counter-based random stream. Each stream is addressed by
// (seed, episode, agent, stage, kind) and produces draws as a pure function
// of that key and a draw counter, so results do not depend on how work is
// scheduled across threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t episode, std::uint64_t agent,
             std::uint64_t stage, std::uint64_t kind) {
    std::uint64_t h = mix64(seed + 0x632BE59BD9B4E019ULL);
    h = hash_combine64(h, episode);
    h = hash_combine64(h, agent);
    h = hash_combine64(h, stage);
    key_ = hash_combine64(h, kind);
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Draw kinds used by the simulator; kept in one place so streams never collide.
enum class DrawKind : std::uint64_t {
  initial_state = 1,
  observation = 2,
  transition = 3,
  bootstrap = 4,
  policy_generation = 5,
};

// Inverse-CDF sample from an unnormalized probability row. Falls back to the
// last positive entry when rounding pushes the cumulative sum below u.
inline std::size_t sample_index(const double* probs, std::size_t n, double u) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  bool seen = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (probs[i] > 0.0) {
      last_positive = i;
      seen = true;
    }
    cum += probs[i];
    if (u < cum) return i;
  }
  return seen ? last_positive : n - 1;
}

inline std::size_t sample_index(const std::vector<double>& probs, double u) {
  return sample_index(probs.data(), probs.size(), u);
}

}  // namespace rsmfg
