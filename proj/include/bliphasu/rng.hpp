#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "bliphasu/complex_core.hpp"

namespace bliphasu {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Folds a list of indices (cell coordinates, trial number, purpose tag, ...)
/// into a single stream id. Order-sensitive.
constexpr std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (std::uint64_t p : parts) h = detail::splitmix64(h ^ detail::splitmix64(p));
  return h;
}

/// Random source keyed by (seed, stream). Two generators with the same key
/// produce identical draw sequences; every trial or purpose gets its own
/// stream so results do not depend on execution order.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    const std::uint64_t a = detail::splitmix64(seed);
    const std::uint64_t b = detail::splitmix64(a ^ detail::splitmix64(stream));
    const std::uint64_t c = detail::splitmix64(b);
    const std::uint64_t d = detail::splitmix64(c ^ stream);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                      static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Independent generator for a sub-purpose, keyed off this one's identity
  /// (not its current state).
  SeededRng derive(std::uint64_t sub_stream) const {
    return SeededRng(seed_, stream_id({stream_, sub_stream}));
  }

  double standard_normal() { return normal_(engine_); }

  /// Uniform integer in [0, bound).
  std::size_t uniform_index(std::size_t bound) {
    std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
    return dist(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// i.i.d. CN(0, 1) entries: real and imaginary parts each N(0, 1/2).
inline CVector sample_complex_gaussian(SeededRng& rng, std::size_t len) {
  const double component_std = std::sqrt(0.5);
  CVector out(len);
  for (auto& c : out) {
    const double re = rng.standard_normal() * component_std;
    const double im = rng.standard_normal() * component_std;
    c = {re, im};
  }
  return out;
}

inline CMatrix sample_complex_gaussian_matrix(SeededRng& rng, std::size_t rows,
                                              std::size_t cols) {
  return CMatrix(rows, cols, sample_complex_gaussian(rng, rows * cols));
}

}  // namespace bliphasu
