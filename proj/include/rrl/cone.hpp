#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "vec.hpp"

namespace rrl::cone {

/// Generators of K = {w : <a_i, w> >= 0 for all i}.
struct ExtremeRays {
  /// Unit extreme rays. Meaningful only when `pointed`.
  std::vector<std::vector<double>> rays;
  /// False when the constraints have rank < d, in which case K contains a line.
  bool pointed = false;
};

namespace detail {

using IndexSet = std::vector<std::uint32_t>;  // sorted

inline IndexSet intersect(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(std::min(a.size(), b.size()));
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool is_subset(const IndexSet& small, const IndexSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

struct Ray {
  std::vector<double> v;
  IndexSet tight;
};

}  // namespace detail

/// Double description method. Rows are normalized first; zero rows impose
/// nothing and are dropped.
inline ExtremeRays extreme_rays(const std::vector<std::vector<double>>& rows, std::size_t d,
                                double tol = 1e-10) {
  if (d == 0) throw domain_error("cone dimension must be positive");
  std::vector<std::vector<double>> a;
  a.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != d) throw dimension_mismatch(d, r.size());
    const double n = vec::norm(r);
    if (n > tol) a.push_back(vec::scaled(r, 1.0 / n));
  }

  // Greedy choice of d independent rows.
  std::vector<std::size_t> basis_rows;
  Eigen::MatrixXd q(static_cast<Eigen::Index>(d), 0);
  for (std::size_t i = 0; i < a.size() && basis_rows.size() < d; ++i) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(a[i].data(), static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < q.cols(); ++j) v -= q.col(j).dot(v) * q.col(j);
    const double n = v.norm();
    if (n > 1e-8) {
      q.conservativeResize(Eigen::NoChange, q.cols() + 1);
      q.col(q.cols() - 1) = v / n;
      basis_rows.push_back(i);
    }
  }
  ExtremeRays out;
  if (basis_rows.size() < d) return out;
  out.pointed = true;

  const auto di = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd b(di, di);
  for (Eigen::Index r = 0; r < di; ++r)
    for (Eigen::Index c = 0; c < di; ++c) b(r, c) = a[basis_rows[r]][c];
  const Eigen::MatrixXd binv = b.inverse();

  std::vector<detail::Ray> current;
  std::vector<bool> in_basis(a.size(), false);
  for (std::size_t i : basis_rows) in_basis[i] = true;
  for (Eigen::Index c = 0; c < di; ++c) {
    detail::Ray r;
    r.v.resize(d);
    for (Eigen::Index k = 0; k < di; ++k) r.v[k] = binv(k, c);
    r.v = vec::normalized(r.v);
    for (Eigen::Index k = 0; k < di; ++k)
      if (k != c) r.tight.push_back(static_cast<std::uint32_t>(basis_rows[k]));
    std::sort(r.tight.begin(), r.tight.end());
    current.push_back(std::move(r));
  }

  const std::size_t need = d >= 2 ? d - 2 : 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (in_basis[i]) continue;
    const auto idx = static_cast<std::uint32_t>(i);
    std::vector<double> s(current.size());
    std::vector<std::size_t> pos, neg;
    std::vector<detail::Ray> next;
    for (std::size_t r = 0; r < current.size(); ++r) {
      s[r] = vec::dot(a[i], current[r].v);
      if (s[r] > tol) {
        pos.push_back(r);
      } else if (s[r] < -tol) {
        neg.push_back(r);
      }
    }
    if (neg.empty()) {
      for (std::size_t r = 0; r < current.size(); ++r)
        if (s[r] <= tol) {
          auto& t = current[r].tight;
          t.insert(std::upper_bound(t.begin(), t.end(), idx), idx);
        }
      continue;
    }
    for (std::size_t r = 0; r < current.size(); ++r) {
      if (s[r] >= -tol) {
        detail::Ray kept = current[r];
        if (s[r] <= tol) kept.tight.insert(std::upper_bound(kept.tight.begin(), kept.tight.end(), idx), idx);
        next.push_back(std::move(kept));
      }
    }
    for (std::size_t p : pos) {
      for (std::size_t n : neg) {
        detail::IndexSet common = detail::intersect(current[p].tight, current[n].tight);
        if (common.size() < need) continue;
        // Combinatorial adjacency: no third ray is tight on all of `common`.
        bool adjacent = true;
        for (std::size_t r = 0; r < current.size() && adjacent; ++r) {
          if (r == p || r == n) continue;
          if (detail::is_subset(common, current[r].tight)) adjacent = false;
        }
        if (!adjacent) continue;
        detail::Ray nr;
        nr.v.resize(d);
        for (std::size_t k = 0; k < d; ++k)
          nr.v[k] = s[p] * current[n].v[k] - s[n] * current[p].v[k];
        const double len = vec::norm(nr.v);
        if (len <= tol) continue;
        for (double& x : nr.v) x /= len;
        nr.tight = std::move(common);
        nr.tight.insert(std::upper_bound(nr.tight.begin(), nr.tight.end(), idx), idx);
        next.push_back(std::move(nr));
      }
    }
    current = std::move(next);
    if (current.empty()) break;
  }

  out.rays.reserve(current.size());
  for (auto& r : current) out.rays.push_back(std::move(r.v));
  return out;
}

}  // namespace rrl::cone
