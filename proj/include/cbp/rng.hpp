#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cbp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for an independent stream, a pure function of (master, stream index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xD1342543DE82EF95ull * (stream + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b >> 1);
}

/// Deterministic double in [0,1) from the engine's raw 64-bit output.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform in (0,1]; safe argument for log().
inline double uniform01_open_left(std::mt19937_64& eng) {
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal variates via Box-Muller. Hand-rolled so that output is a
/// pure function of the engine stream (std::normal_distribution is not
/// pinned down by the standard).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}
  explicit NormalSampler(std::mt19937_64 eng) : eng_(std::move(eng)) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open_left(eng_);
    const double u2 = uniform01(eng_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline double exponential_sample(std::mt19937_64& eng, double rate) {
  return -std::log(uniform01_open_left(eng)) / rate;
}

/// Exact Poisson sample by chunked inversion (a Poisson(m) is the sum of
/// independent Poissons whose means add to m, so large means stay exact).
inline std::uint64_t poisson_sample(std::mt19937_64& eng, double mean) {
  std::uint64_t total = 0;
  double remaining = mean;
  constexpr double kChunk = 25.0;
  while (remaining > 0.0) {
    const double m = remaining > kChunk ? kChunk : remaining;
    remaining -= m;
    const double limit = std::exp(-m);
    double prod = 1.0;
    std::uint64_t k = 0;
    for (;;) {
      prod *= uniform01_open_left(eng);
      if (prod <= limit) break;
      ++k;
    }
    total += k;
  }
  return total;
}

}  // namespace cbp
