#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace majority {

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

inline constexpr std::uint64_t kRunSalt = 0xD1B54A32D192ED03ULL;
inline constexpr std::uint64_t kMasterSalt = 0x9E3779B97F4A7C15ULL;

/// Maps (master_seed, run_index) to the seed of one run's stream:
///
///   seed = mix64(master ^ mix64(run ^ kRunSalt) ^ kMasterSalt)
///
/// For a fixed master the map is a bijection of run_index (and vice versa),
/// so distinct runs never share a seed. The constants are frozen; changing
/// them changes every published trajectory.
struct SeedPolicy {
  std::uint64_t master_seed = 0;

  constexpr std::uint64_t derive(std::uint64_t run_index) const noexcept {
    return mix64(master_seed ^ mix64(run_index ^ kRunSalt) ^ kMasterSalt);
  }
};

/// Per-run random stream. Wraps std::mt19937_64, whose output sequence is
/// fixed by the standard, and derives every variate from raw 64-bit words so
/// results do not depend on the standard library's distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), exact (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // True with probability count / total, exactly.
  bool chance(std::uint64_t count, std::uint64_t total) { return below(total) < count; }

  bool coin() { return (engine_() >> 63) != 0; }

  // Binomial(trials, p) variate.
  std::int64_t binomial(std::int64_t trials, double p);

 private:
  std::mt19937_64 engine_;
};

inline Stream derive_stream(const SeedPolicy& policy, std::uint64_t run_index) {
  return Stream(policy.derive(run_index));
}

}  // namespace majority
