#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace welrec {

/// Splits one base seed into decorrelated stream seeds (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// mt19937_64 with explicit draw algorithms. std::*_distribution output is
/// implementation-defined, so every transform is spelled out here; a given
/// seed produces the same stream on any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0. Unbiased via rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  /// Box-Muller with cached spare.
  double normal(double mean, double stddev) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    const double u1 = std::max(uniform(), 0x1.0p-53);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  /// Standard Gumbel via inverse CDF -ln(-ln(U)), U clamped away from {0,1}.
  double gumbel() {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double u = std::clamp(uniform(), eps, 1.0 - eps);
    return -std::log(-std::log(u));
  }

  /// k distinct values from {0,...,n-1}, returned ascending.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> out;
    if (k <= 0) return out;
    out.reserve(static_cast<std::size_t>(k));
    if (4 * k >= n) {
      // dense draw: partial Fisher-Yates
      std::vector<int> pool(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
      for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(uniform_index(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
      }
    } else {
      // sparse draw: Floyd's algorithm
      for (int j = n - k; j < n; ++j) {
        const int t = static_cast<int>(uniform_index(static_cast<std::uint64_t>(j) + 1));
        if (std::find(out.begin(), out.end(), t) != out.end()) {
          out.push_back(j);
        } else {
          out.push_back(t);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace welrec
