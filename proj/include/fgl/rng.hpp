#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fgl {

// Counter-based 64-bit generator (SplitMix64: a Weyl counter fed through a
// bijective finalizer).  Sub-streams are derived by hashing
// (seed, purpose-tag, index) with FNV-1a, so parallel Monte Carlo can hand
// out independent streams without coordination.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : counter_(seed) {}

  static Rng substream(std::uint64_t seed, std::string_view tag,
                       std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix_byte = [&h](std::uint8_t b) {
      h ^= b;
      h *= 0x100000001b3ull;
    };
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(seed >> (8 * i)));
    for (char c : tag) mix_byte(static_cast<std::uint8_t>(c));
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<std::uint8_t>(index >> (8 * i)));
    return Rng(h);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (counter_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Lemire's unbiased bounded integer.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      std::uint64_t t = -bound % bound;
      while (lo < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Adapter so <random> distributions can run on top of this stream.
  struct Bits {
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }
    result_type operator()() { return rng->next_u64(); }
    Rng* rng;
  };
  Bits bits() { return Bits{this}; }

  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<long> d(mean);
    Bits b = bits();
    return d(b);
  }

  double normal(double mu = 0.0, double sigma = 1.0) {
    std::normal_distribution<double> d(mu, sigma);
    Bits b = bits();
    return d(b);
  }

  double gamma(double shape) {
    std::gamma_distribution<double> d(shape, 1.0);
    Bits b = bits();
    return d(b);
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
  }

 private:
  std::uint64_t counter_;
};

}  // namespace fgl
