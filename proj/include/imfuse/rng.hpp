#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace imfuse {

// Deterministic random source. All randomness in the library flows through
// this class: mt19937_64 plus explicit transforms, never the std <random>
// distributions, whose output is implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. Consumes exactly two uniform draws.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(k_two_pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Unbiased integer in [0, n) by masked rejection.
  std::uint64_t index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
    if (n == 1) return 0;
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t v = gen_() & mask;
      if (v < n) return v;
    }
  }

  // Index drawn with probability proportional to weights[i]. Consumes one
  // uniform draw. Weights must be nonnegative, finite, with a positive sum.
  std::size_t pick_weighted(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("Rng::pick_weighted: empty weights");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw std::invalid_argument("Rng::pick_weighted: weights must be nonnegative and finite");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("Rng::pick_weighted: weights sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;
  }

  // k distinct values from {0, .., n-1}, returned in ascending order.
  // Partial Fisher-Yates; consumes exactly k index draws.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("Rng::sample_without_replacement: k exceeds n");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(index(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  static constexpr double k_two_pi = 6.283185307179586476925286766559;
  std::mt19937_64 gen_;
};

}  // namespace imfuse
