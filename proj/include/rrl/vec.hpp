#pragma once

#include <cassert>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace rrl::vec {

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline std::vector<double> scaled(std::span<const double> a, double s) {
  std::vector<double> out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

/// a + s * b
inline std::vector<double> axpy(std::span<const double> a, double s,
                                std::span<const double> b) {
  assert(a.size() == b.size());
  std::vector<double> out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
  return out;
}

inline std::vector<double> normalized(std::span<const double> a) {
  const double n = norm(a);
  return scaled(a, n > 0.0 ? 1.0 / n : 0.0);
}

}  // namespace rrl::vec
