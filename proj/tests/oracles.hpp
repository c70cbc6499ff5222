#pragma once

// Reference computations written without the library, used to freeze
// expected values in the unit tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline double binary_entropy(double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)); }

// Manneville beta = 1: T(x) = x + x^2 on [0, g], x + x^2 - 1 on [g, 1].
inline double golden() { return (std::sqrt(5.0) - 1.0) / 2.0; }
inline double manneville_inverse(int symbol, double y) {
  const double c = symbol == 0 ? y : y + 1.0;
  return (-1.0 + std::sqrt(1.0 + 4.0 * c)) / 2.0;
}
inline double manneville_point(const std::vector<int>& word, double tail = 0.5) {
  double x = tail;
  for (auto it = word.rbegin(); it != word.rend(); ++it) x = manneville_inverse(*it, x);
  return x;
}

// Affine similarity with slopes s_i and left ends a_i: the cylinder of a
// word is the image of [0,1] under the composed inverse maps.
struct Affine {
  std::vector<double> slope, left;
  void interval(const std::vector<int>& w, double& lo, double& hi) const {
    lo = 0.0;
    hi = 1.0;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      lo = left[static_cast<std::size_t>(*it)] + lo / slope[static_cast<std::size_t>(*it)];
      hi = left[static_cast<std::size_t>(*it)] + hi / slope[static_cast<std::size_t>(*it)];
    }
  }
};

// Root of sum r_i^s = 1 for contraction ratios r_i.
inline double similarity_dimension(const std::vector<double>& r) {
  double lo = 0.0, hi = 4.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi), acc = 0.0;
    for (double x : r) acc += std::pow(x, mid);
    (acc > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<int> digits(std::uint64_t k, int n) {
  std::vector<int> w(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i, k >>= 1) w[static_cast<std::size_t>(i)] = static_cast<int>(k & 1);
  return w;
}

}  // namespace oracle
