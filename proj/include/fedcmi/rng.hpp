#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fedcmi/errors.hpp"

namespace fedcmi {

// Deterministic counter-based random streams. Every consumer derives its own
// stream from a master seed plus a purpose tag and integer coordinates
// (client id, round, epoch, ...), so results never depend on call order
// across components or on thread scheduling. All sampling is implemented
// here rather than via std::*_distribution to keep byte-level outputs
// independent of the standard library version.

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t hash_tag(std::string_view tag) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // burn one step so a zero seed still produces a scrambled stream
    splitmix64(state_);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1), 53-bit resolution
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1], safe as a log argument
  double next_unit_open() { return 1.0 - next_unit(); }

  // unbiased uniform integer in [0, n)
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw ParamError("next_below: n must be positive");
    uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // standard normal via Box-Muller
  double next_gauss() {
    double u1 = next_unit_open();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Gamma(alpha, 1) via Marsaglia-Tsang; alpha < 1 handled by boosting
  double next_gamma(double alpha) {
    if (alpha <= 0.0) throw ParamError("next_gamma: alpha must be positive");
    if (alpha < 1.0) {
      double g = next_gamma(alpha + 1.0);
      return g * std::pow(next_unit_open(), 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_gauss();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = next_unit_open();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  // symmetric Dirichlet(alpha * 1_n)
  std::vector<double> next_dirichlet(double alpha, std::size_t n) {
    std::vector<double> g(n);
    double sum = 0.0;
    for (auto& v : g) {
      v = next_gamma(alpha);
      sum += v;
    }
    for (auto& v : g) v /= sum;
    return g;
  }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  uint64_t state_;
};

// Derive a stream from (master, purpose tag, integer coordinates).
template <typename... Ints>
Rng stream(uint64_t master, std::string_view tag, Ints... coords) {
  uint64_t s = mix_seed(master, hash_tag(tag));
  ((s = mix_seed(s, static_cast<uint64_t>(coords))), ...);
  return Rng(s);
}

}  // namespace fedcmi
