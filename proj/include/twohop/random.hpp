// Portable random helpers on top of std::mt19937_64. The standard
// distributions are implementation-defined, so sampling is done by hand to
// keep simulated transcripts identical across standard libraries.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "twohop/probability.hpp"

namespace twohop {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines a master seed with stream coordinates into an independent seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc908ull);
  h = splitmix64(h ^ a);
  return splitmix64(h ^ (b * 0x9e3779b97f4a7c15ull + 0xbb67ae8584caa73bull));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform on {0, ..., bound-1}, rejection sampled.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound ? (~std::uint64_t{0} - bound + 1) % bound : 0;
    for (;;) {
      const std::uint64_t r = eng_();
      if (r >= limit) return r % bound;
    }
  }

  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last = i;
      if (u < acc) return i;
    }
    return last;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
};

inline Sequence sample_iid(const Pmf& p, std::size_t n, Rng& rng) {
  Sequence s(n);
  for (auto& v : s) v = static_cast<Symbol>(rng.categorical(p.probs()));
  return s;
}

inline Sequence sample_through(const ConditionalPmf& channel, const Sequence& in, Rng& rng) {
  Sequence s(in.size());
  for (std::size_t t = 0; t < in.size(); ++t)
    s[t] = static_cast<Symbol>(rng.categorical(channel.row(in[t]).probs()));
  return s;
}

}  // namespace twohop
