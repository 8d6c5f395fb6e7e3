#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "attseq/common.hpp"

namespace attseq {

// Deterministic RNG. std::mt19937_64 output is pinned by the standard, but the
// standard distributions are not, so all transforms are implemented here to keep
// streams bit-identical across platforms and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  // Derives an independent, reproducible stream for a named purpose.
  static Rng fork(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a64(tag);
    return Rng(mix(seed ^ mix(h ^ mix(index + 0x9e3779b97f4a7c15ull))));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; no cached spare, one draw = two engine calls.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [lo, hi], inclusive; rejection sampling, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw DomainError("uniform_int: empty range");
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <class T>
  const T& choice(const std::vector<T>& v) {
    if (v.empty()) throw DomainError("choice: empty vector");
    return v[static_cast<size_t>(uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

 private:
  // splitmix64 finalizer; spreads low-entropy seeds before feeding mt19937_64.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace attseq
