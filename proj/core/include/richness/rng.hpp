#pragma once

#include <cstdint>
#include <initializer_list>

namespace richness {

// Deterministic pseudo-random stream with explicit substream derivation.
//
// Simulation results must be bit-identical for a given master seed no matter
// how work is scheduled, and must not depend on the standard library's
// distribution implementations (which are unspecified and differ across
// toolchains). This class therefore owns both the generator (SplitMix64) and
// the samplers built on top of it. Substreams are derived by hashing a key
// path into the master seed, so (seed, level, replicate) always names the
// same stream regardless of which thread runs it.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) noexcept : state_(mix_(seed)) {}

  // Derive an independent stream from a master seed and a key path,
  // e.g. substream(seed, {kReplicates, level, rep}).
  static RngStream substream(std::uint64_t master,
                             std::initializer_list<std::uint64_t> path) noexcept;

  // Derive a fresh 64-bit seed value (for handing to another component).
  static std::uint64_t derive_seed(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> path) noexcept;

  std::uint64_t next_u64() noexcept;

  // Uniform on [0, 1) with 53-bit resolution.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) noexcept { return next_double() < p; }

  // Uniform integer on [0, n); n == 0 returns 0. Unbiased (rejection sampling).
  std::uint64_t uniform_below(std::uint64_t n) noexcept;

  // Binomial(n, p) by CDF inversion. Exact for the small n used here
  // (n up to a few hundred); p is clamped to [0, 1].
  int binomial(int n, double p) noexcept;

 private:
  static std::uint64_t mix_(std::uint64_t z) noexcept;
  std::uint64_t state_;
};

}  // namespace richness
