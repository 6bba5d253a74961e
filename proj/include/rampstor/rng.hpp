#pragma once

// Seedable random generation with explicit, engine-output-level sampling so
// that a given seed reproduces the same draws regardless of the C++ standard
// library in use. std::mt19937_64 output is fully specified by the standard;
// the distribution helpers below avoid std::*_distribution on purpose.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace rampstor {

// splitmix64 finalizer, used to derive independent per-path streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform over {0, 1, ..., m-1} by rejection on the top range.
  std::uint64_t below(std::uint64_t m) {
    if (m == 0) throw std::invalid_argument("Rng::below: m must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return r % m;
  }

  // Box-Muller; the spare is cached so draws arrive in a fixed order.
  double normal(double mean = 0.0, double std = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + std * spare_;
    }
    double u1 = u01();
    while (u1 == 0.0) u1 = u01();
    const double u2 = u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + std * r * std::cos(a);
  }

  // Rejection sampling; bounds must leave a non-negligible acceptance region.
  double truncated_normal(double mean, double std, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("truncated_normal: lo must be < hi");
    for (int it = 0; it < 1000000; ++it) {
      const double x = normal(mean, std);
      if (x >= lo && x <= hi) return x;
    }
    throw std::runtime_error("truncated_normal: acceptance region too small");
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream for logical index `idx` under a base seed. Work items seeded this
// way give identical results for any worker count or execution order.
inline Rng substream(std::uint64_t seed, std::uint64_t idx) {
  return Rng(mix64(seed ^ mix64(idx + 0x632be59bd9b4e019ull)));
}

}  // namespace rampstor
