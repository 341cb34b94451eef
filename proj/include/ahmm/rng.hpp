#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace ahmm {

// Deterministic random source. All samplers are implemented by hand on
// top of mt19937_64 so that streams are bit-reproducible across
// platforms and standard-library versions (std::*_distribution is
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Independent stream derived from (seed, stream_id); used to make
  // parallel work items order-independent.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(splitmix64(seed ^ splitmix64(stream_id + 0x9E3779B97F4A7C15ull)));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as input to log().
  double uniform_pos() { return 1.0 - uniform(); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    return -std::log(uniform_pos()) / rate;
  }

  // Count distribution P(k) = (1-gamma) * gamma^k, k >= 0.
  long geometric_count(double gamma) {
    if (gamma <= 0.0) return 0;
    return static_cast<long>(std::floor(std::log(uniform_pos()) / std::log(gamma)));
  }

  // Waiting time on {1,2,...}: P(t) = gamma * (1-gamma)^{t-1}.
  long geometric_wait(double gamma) {
    if (gamma >= 1.0) return 1;
    if (gamma <= 0.0) throw std::invalid_argument("geometric_wait: gamma must be > 0");
    return 1 + static_cast<long>(std::floor(std::log(uniform_pos()) / std::log1p(-gamma)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  long poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    // Split large means so the product method never underflows.
    if (mean > 30.0) return poisson(mean / 2.0) + poisson(mean - mean / 2.0);
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= uniform_pos();
    } while (prod > limit);
    return k - 1;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 eng_;
};

}  // namespace ahmm
