#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace levypass {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ seeded through splitmix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// One reproducible stream per (seed, replicate, salt). Statistically
// independent streams come from hashing the triple through splitmix64;
// results never depend on which worker thread runs the replicate.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t salt = 0)
      : gen_(mix(seed, replicate, salt)) {}

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(gen_.next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  // Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t replicate,
                           std::uint64_t salt) {
    std::uint64_t h = seed;
    (void)splitmix64(h);
    h ^= 0x632be59bd9b4e019ULL * (replicate + 1);
    (void)splitmix64(h);
    h ^= 0x9e3779b97f4a7c15ULL * (salt + 1);
    return splitmix64(h);
  }
  Xoshiro256pp gen_;
};

// One-sided stable draw with Laplace transform exp(-lambda^alpha), 0<alpha<1.
// Kanter's representation; the alpha=1/2 case reduces to 1/(2 N^2).
template <typename Rng>
double sample_stable_unit(Rng& rng, double alpha) {
  if (alpha == 0.5) {
    const double n = rng.normal();
    return 0.5 / (n * n);
  }
  const double phi = rng.uniform() * std::numbers::pi;
  const double e = rng.exponential();
  const double r = (1.0 - alpha) / alpha;
  const double log_a = (1.0 / r) * std::log(std::sin(alpha * phi)) +
                       std::log(std::sin((1.0 - alpha) * phi)) -
                       (1.0 + 1.0 / r) * std::log(std::sin(phi));
  return std::exp(r * (log_a - std::log(e)));
}

}  // namespace levypass
