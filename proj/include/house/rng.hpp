#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace house {

// Deterministic random source. std::mt19937_64 has a standard-mandated
// output sequence, but the std::*_distribution adapters do not, so all
// distribution logic lives here and is bit-stable across platforms and
// standard libraries for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Unbiased integer in [0, n). Rejection-samples the short tail of the
  // 64-bit range so every residue is equally likely.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t rem = (~std::uint64_t{0} % n + 1) % n;  // 2^64 mod n
    std::uint64_t r = eng_();
    while (r < rem) r = eng_();
    return r % n;
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return std::ldexp(static_cast<double>(eng_() >> 11), -53); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; generates pairs and caches the spare.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * 3.14159265358979323846 * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace house
