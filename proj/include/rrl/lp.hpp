#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"

namespace rrl::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::infeasible;
  double value = 0.0;
  std::vector<double> x;
  /// Row multipliers y with c - A^T y >= 0 at optimality.
  std::vector<double> duals;
  std::size_t iterations = 0;
};

struct Options {
  double tol = 1e-11;
  std::size_t max_iterations = 10000;
};

namespace detail {

class Tableau {
 public:
  // Columns: n structural, m artificial, rhs. Row m holds reduced costs.
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol)
      : m_(a.rows()), n_(a.cols()), tol_(tol), t_(m_ + 1, n_ + m_ + 1), basis_(m_) {
    t_.setZero();
    sign_.assign(m_, 1.0);
    for (Eigen::Index i = 0; i < m_; ++i) {
      sign_[i] = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign_[i] * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign_[i] * b(i);
      basis_[i] = n_ + i;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }

  void set_costs(const Eigen::VectorXd& cost_all) {
    // reduced cost r_j = c_j - c_B^T column_j; rhs holds -objective
    t_.row(m_).setZero();
    t_.row(m_).head(n_ + m_) = cost_all.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = cost_all(basis_[i]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  /// Bland's rule pivoting over columns [0, allowed). Returns status.
  Status iterate(Eigen::Index allowed, std::size_t& iterations, std::size_t max_iterations) {
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(m_, j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::optimal;
      if (iterations++ >= max_iterations) return Status::iteration_limit;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double piv = t_(i, enter);
        if (piv > tol_) {
          const double ratio = t_(i, rhs()) / piv;
          if (leave < 0 || ratio < best - tol_ ||
              (ratio <= best + tol_ && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return Status::unbounded;
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i != row) {
        const double f = t_(i, col);
        if (f != 0.0) t_.row(i) -= f * t_.row(row);
      }
    }
    basis_[row] = col;
  }

  /// Pivot basic artificials out where a structural column allows it.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      Eigen::Index best = -1;
      double mag = tol_;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > mag) {
          mag = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  double objective() const { return -t_(m_, rhs()); }

  std::vector<double> primal() const {
    std::vector<double> x(n_, 0.0);
    for (Eigen::Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = t_(i, rhs());
    return x;
  }

  /// Multipliers of the original (unflipped) rows, read from the reduced
  /// costs of the zero-cost artificial columns.
  std::vector<double> duals() const {
    std::vector<double> y(m_);
    for (Eigen::Index i = 0; i < m_; ++i) y[i] = -sign_[i] * t_(m_, n_ + i);
    return y;
  }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  double tol_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  std::vector<double> sign_;
};

}  // namespace detail

/// min c^T x  s.t.  A x = b,  x >= 0. Dense two-phase simplex with Bland's
/// rule, intended for the small problems that arise from cone constraints.
inline Result solve_standard(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c, const Options& opt = {}) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw solver_failure("inconsistent LP dimensions");

  Result res;
  detail::Tableau tab(a, b, opt.tol);

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.set_costs(phase1);
  Status st = tab.iterate(n + m, res.iterations, opt.max_iterations);
  if (st == Status::iteration_limit) {
    res.status = st;
    return res;
  }
  const double scale = 1.0 + b.cwiseAbs().sum();
  if (tab.objective() > 1e-9 * scale) {
    res.status = Status::infeasible;
    return res;
  }
  tab.expel_artificials();

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  tab.set_costs(phase2);
  st = tab.iterate(n, res.iterations, opt.max_iterations);
  res.status = st;
  if (st != Status::optimal) return res;
  res.value = tab.objective();
  res.x = tab.primal();
  res.duals = tab.duals();
  return res;
}

/// max c^T w  s.t.  G w <= h,  |w_j| <= bound_j.
/// Solved through the dual  min h^T l + u^T (p + q)  s.t.  G^T l + p - q = c,
/// whose d equality rows keep the tableau small when G has many rows.
inline Result maximize_boxed(std::span<const double> c,
                             const std::vector<std::vector<double>>& g,
                             std::span<const double> h, std::span<const double> bound,
                             const Options& opt = {}) {
  const auto d = static_cast<Eigen::Index>(c.size());
  const auto k = static_cast<Eigen::Index>(g.size());
  if (static_cast<Eigen::Index>(h.size()) != k || static_cast<Eigen::Index>(bound.size()) != d)
    throw solver_failure("inconsistent LP dimensions");

  Eigen::MatrixXd a(d, k + 2 * d);
  a.setZero();
  Eigen::VectorXd cost(k + 2 * d);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (static_cast<Eigen::Index>(g[i].size()) != d) throw solver_failure("inconsistent LP row");
    for (Eigen::Index j = 0; j < d; ++j) a(j, i) = g[i][j];
    cost(i) = h[i];
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    a(j, k + j) = 1.0;
    a(j, k + d + j) = -1.0;
    cost(k + j) = bound[j];
    cost(k + d + j) = bound[j];
  }
  Eigen::VectorXd rhs(d);
  for (Eigen::Index j = 0; j < d; ++j) rhs(j) = c[j];

  Result dual = solve_standard(a, rhs, cost, opt);
  Result res;
  res.iterations = dual.iterations;
  if (dual.status == Status::infeasible || dual.status == Status::unbounded) {
    // The box keeps the primal bounded, so either case means it is infeasible.
    res.status = Status::infeasible;
    return res;
  }
  res.status = dual.status;
  if (dual.status != Status::optimal) return res;
  res.value = dual.value;
  res.x = dual.duals;
  res.duals.assign(dual.x.begin(), dual.x.begin() + k);
  return res;
}

}  // namespace rrl::lp
