#pragma once

#include <cstdint>
#include <random>

namespace nbsl {

/// Purpose tags for substream derivation.
enum class StreamPurpose : std::uint64_t { Evidence = 1, Measurement = 2 };

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the substream for (run, agent, purpose) under a master seed.
/// Substreams are independent mt19937_64 generators, one per combination.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, std::uint64_t agent,
                          StreamPurpose purpose);

/// mt19937_64 with fully specified uniform, integer and Gaussian transforms,
/// so draws are identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [lo, hi] by rejection sampling.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  /// Standard normal by the Marsaglia polar method.
  double standard_normal();
  double normal(double mean, double stddev) { return mean + stddev * standard_normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nbsl
