#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace evalue {

namespace detail {

// splitmix64 finalizer, used both as the key mixer and the stream generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a9ecf373a879ULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based random stream. Every stream is identified by a master seed
// plus a short key path; deriving the same path twice yields the same
// stream, independent of thread schedule or call order elsewhere. All
// numeric draws are generated from explicit formulas (no std::*_distribution)
// so output is bit-stable across standard library versions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(mix_key(0x243f6a8885a308d3ULL, seed)) {}

  // Derive an independent substream keyed by one or more integers.
  RngStream derive(std::initializer_list<std::uint64_t> keys) const {
    std::uint64_t s = state_;
    for (std::uint64_t k : keys) s = mix_key(s, k);
    return RngStream(s, tag{});
  }
  RngStream derive(std::uint64_t key) const { return derive({key}); }

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // Uniform on (0, 1); never returns 0 or 1 exactly.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  // Marsaglia polar method; one value per call, pair cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

 private:
  struct tag {};
  RngStream(std::uint64_t raw_state, tag) : state_(raw_state) {}

  static std::uint64_t mix_key(std::uint64_t state, std::uint64_t key) {
    std::uint64_t s = state ^ (key + 0x9e3779b97f4a7c15ULL);
    return detail::splitmix64(s);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace evalue
