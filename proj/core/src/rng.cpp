#include "richness/rng.hpp"

#include <cmath>

namespace richness {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t RngStream::mix_(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t RngStream::next_u64() noexcept {
  state_ += kGolden;
  return mix_(state_);
}

std::uint64_t RngStream::derive_seed(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix_(master + kGolden);
  for (std::uint64_t k : path) {
    h = mix_(h ^ (k + kGolden + (h << 6) + (h >> 2)));
  }
  return h;
}

RngStream RngStream::substream(std::uint64_t master,
                               std::initializer_list<std::uint64_t> path) noexcept {
  return RngStream(derive_seed(master, path));
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

int RngStream::binomial(int n, double p) noexcept {
  if (n <= 0) return 0;
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  // Mirror so the CDF walk starts from the smaller tail; keeps pow(q, n)
  // well above the underflow floor for the n used in this library.
  if (p > 0.5) return n - binomial(n, 1.0 - p);
  const double q = 1.0 - p;
  const double s = p / q;
  double f = std::pow(q, n);  // P(X = 0)
  double cdf = f;
  const double u = next_double();
  int k = 0;
  while (u > cdf && k < n) {
    ++k;
    f *= s * static_cast<double>(n - k + 1) / static_cast<double>(k);
    cdf += f;
  }
  return k;
}

}  // namespace richness
