#pragma once

#include <cstdint>
#include <random>

namespace shruti {

// Seedable PRNG with platform-independent output. std::mt19937_64 is fully
// specified by the standard; the distribution mappings below are fixed here
// because the std::uniform_* distributions are not portable across
// implementations. All dataset generation and baselines go through this type
// so that a seed pins the output bytes.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Simple multiply-shift; bias is < 2^-53 and
  // identical everywhere.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  bool bernoulli(double p) { return uniform() < p; }

  // Independent stream for a numbered sub-task (sequence i of a dataset).
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    // SplitMix64 over (seed, stream) so neighboring streams are uncorrelated.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace shruti
