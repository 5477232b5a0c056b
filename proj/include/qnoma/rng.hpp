#ifndef QNOMA_RNG_HPP
#define QNOMA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace qnoma {

// splitmix64 finalizer; used to derive decorrelated substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(a + 0x1234567)) ^ splitmix64(~b));
}

// mt19937_64 with explicit draw transforms. The standard pins the engine but
// not the library distributions, so uniform/exponential/normal are implemented
// here to keep streams bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Exponential with mean 1 (inverse CDF).
  double exponential() { return -std::log1p(-uniform()); }

  // Standard normal, Box-Muller; always consumes exactly two draws.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qnoma

#endif  // QNOMA_RNG_HPP
