#ifndef AIF_RNG_HPP
#define AIF_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace aif {

/// SplitMix64 finalizer; used only for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Trajectory i draws from mt19937_64 seeded with stream_seed(i). The
/// derivation depends only on (base_seed, i), never on scheduling.
struct SeedPlan {
  std::uint64_t base_seed = 1;

  static constexpr const char* algorithm =
      "mt19937_64 seeded with splitmix64(splitmix64(base_seed) ^ splitmix64(trajectory_index + 0x5851f42d4c957f2d))";

  constexpr std::uint64_t stream_seed(std::uint64_t trajectory) const noexcept {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(trajectory + 0x5851f42d4c957f2dULL));
  }

  /// Independent plan for a sub-experiment identified by a 64-bit key.
  constexpr SeedPlan derive(std::uint64_t key) const noexcept {
    return SeedPlan{splitmix64(base_seed ^ splitmix64(key))};
  }
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1]; 53 random bits.
  double uniform_open0() noexcept {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aif

#endif  // AIF_RNG_HPP
