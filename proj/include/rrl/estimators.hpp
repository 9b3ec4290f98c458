#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "losses.hpp"
#include "parallel.hpp"
#include "reliability.hpp"
#include "rng.hpp"
#include "vec.hpp"
#include "version_space.hpp"

namespace rrl {

/// Two-sided Hoeffding half-width at confidence 1 - alpha.
inline double hoeffding_half_width(std::size_t n, double alpha = 0.05) {
  if (n == 0) return 1.0;
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

struct RegionEstimate {
  double mass = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  /// Number of Bernoulli draws behind the interval.
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// Per-dataset masses when the estimate averages over training sets.
  std::vector<double> per_trial;
};

inline RegionEstimate make_estimate(std::size_t hits, std::size_t n, std::uint64_t seed) {
  RegionEstimate e;
  e.n = n;
  e.seed = seed;
  e.mass = n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
  const double h = hoeffding_half_width(n);
  e.ci_low = std::max(0.0, e.mass - h);
  e.ci_high = std::min(1.0, e.mass + h);
  return e;
}

/// Frequency of pred over n draws of spec.
template <class Pred>
RegionEstimate mc_mass(Pred&& pred, const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw domain_error("mc_mass needs n >= 1");
  CounterRng rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += static_cast<bool>(pred(Point(detail::draw(spec, rng))));
  return make_estimate(hits, n, seed);
}

/// Reliable-correctness style experiment: train on P, test on Q.
struct ShiftConfig {
  HypothesisClass cls;
  Hypothesis hstar;
  DistributionSpec p;
  DistributionSpec q;
  std::size_t m = 100;
  std::size_t trials = 10;
  std::size_t n_test = 1000;
  double eta1 = 0.0;
  double eta2 = 0.0;
  /// nullopt measures plain agreement (reliable correctness).
  std::optional<LossKind> kind{};
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// When set, every Q draw must receive the same label from hstar and this
  /// hypothesis; a mismatch aborts the estimate.
  std::optional<Hypothesis> q_labeler{};
};

/// Pr over S ~ P^m and x ~ Q of x lying in the agreement region (kind unset)
/// or the safely-reliable region of the given loss. Training sets are drawn
/// independently per trial; the interval treats the trials * n_test test
/// draws as Bernoulli samples given the training sets.
inline RegionEstimate reliable_correctness(const ShiftConfig& cfg) {
  if (cfg.trials == 0 || cfg.n_test == 0) throw domain_error("trials and n_test must be >= 1");
  if (!cfg.cls.contains(cfg.hstar)) throw domain_error("target hypothesis is outside the class");
  if (cfg.p.dim() != cfg.cls.dim()) throw dimension_mismatch(cfg.cls.dim(), cfg.p.dim());
  if (cfg.q.dim() != cfg.cls.dim()) throw dimension_mismatch(cfg.cls.dim(), cfg.q.dim());
  if (!(cfg.eta1 >= 0.0 && cfg.eta2 >= 0.0)) throw domain_error("eta1 and eta2 must be >= 0");

  std::vector<std::size_t> hits(cfg.trials, 0);
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    const auto train = sample(cfg.p, derive_seed(cfg.seed, "train", t), cfg.m);
    Dataset s(cfg.cls.dim());
    for (const auto& x : train) s.add(x, predict(cfg.hstar, x));
    const VersionSpace vs = fit_version_space(s, cfg.cls);
    CounterRng rng(derive_seed(cfg.seed, "test", t));
    std::size_t h = 0;
    for (std::size_t i = 0; i < cfg.n_test; ++i) {
      const Point x(detail::draw(cfg.q, rng));
      if (cfg.q_labeler && predict(*cfg.q_labeler, x) != predict(cfg.hstar, x))
        throw domain_error("test distribution is not labeled by the target hypothesis");
      if (cfg.kind) {
        h += safely_reliable_membership(vs, &cfg.hstar, x, cfg.eta1, cfg.eta2, *cfg.kind);
      } else {
        h += agree_membership(vs, x) != Membership::disagree;
      }
    }
    hits[t] = h;
  });

  std::size_t total = 0;
  for (auto h : hits) total += h;
  auto e = make_estimate(total, cfg.trials * cfg.n_test, cfg.seed);
  e.per_trial.reserve(cfg.trials);
  for (auto h : hits) e.per_trial.push_back(static_cast<double>(h) / static_cast<double>(cfg.n_test));
  return e;
}

/// Mass of the safely-reliable region under P, averaged over training sets.
inline RegionEstimate sr_mass(const HypothesisClass& cls, const Hypothesis& hstar, const DistributionSpec& spec,
                              std::size_t m, double eta1, double eta2, LossKind kind, std::size_t trials,
                              std::size_t n_test, std::uint64_t seed, std::size_t jobs = 1) {
  return reliable_correctness(ShiftConfig{cls, hstar, spec, spec, m, trials, n_test, eta1, eta2, kind, seed, jobs, {}});
}

/// Whether x lies in DIS(B_P(h*, r)) when P is rotationally invariant, so that
/// disagreement equals angle / pi.
inline bool dis_ball_membership_rotinv(const LinearHomogeneous& hstar, double r, const Point& x) {
  if (!(r >= 0.0 && r <= 1.0)) throw domain_error("r must lie in [0, 1]");
  if (x.dim() != hstar.dim()) throw dimension_mismatch(hstar.dim(), x.dim());
  const double n = vec::norm(x.span());
  if (n == 0.0) throw domain_error("x must be nonzero");
  const double c = std::clamp(vec::dot(hstar.w(), x.span()) / n, -1.0, 1.0);
  const double theta = std::acos(c);
  return std::abs(std::numbers::pi / 2 - theta) <= std::numbers::pi * r;
}

inline std::vector<double> default_r_grid(double epsilon, std::size_t count = 16) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw domain_error("epsilon must lie in (0, 1/2]");
  if (count < 2 || epsilon == 0.5) return {epsilon};
  std::vector<double> g(count);
  const double a = std::log(epsilon);
  const double b = std::log(0.5);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = epsilon;
  g.back() = 0.5;
  return g;
}

enum class ThetaPath { threshold_cdf, rotation_invariant, empirical_interval, empirical_rotation };

inline std::string_view to_string(ThetaPath p) noexcept {
  switch (p) {
    case ThetaPath::threshold_cdf: return "threshold-cdf";
    case ThetaPath::rotation_invariant: return "rotation-invariant";
    case ThetaPath::empirical_interval: return "empirical-interval";
    case ThetaPath::empirical_rotation: return "empirical-rotation";
  }
  return "?";
}

struct ThetaConfig {
  HypothesisClass cls;
  Hypothesis hstar;
  DistributionSpec p;
  DistributionSpec q;
  double epsilon = 0.01;
  /// Empty selects default_r_grid(epsilon).
  std::vector<double> r_grid{};
  std::size_t n = 100000;
  std::uint64_t seed = 0;
  /// P-reference sample size for the empirical paths; 0 means n.
  std::size_t reference_n = 0;
  /// Rotation directions for the empirical linear path.
  std::size_t directions = 32;
};

struct ThetaEstimate {
  double value = 0.0;
  std::vector<double> r_grid{};
  std::vector<RegionEstimate> masses;
  double epsilon = 0.0;
  ThetaPath path = ThetaPath::threshold_cdf;
  /// Largest ratio between neighbouring radii.
  double grid_resolution = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Largest number of reference points a hypothesis may flip while staying
/// strictly inside disagreement radius r.
inline std::size_t open_ball_flips(double r, std::size_t nref) {
  return static_cast<std::size_t>(std::ceil(r * static_cast<double>(nref))) - 1;
}

/// Interval (lo, hi) of interval coordinates lying in DIS(B_P(h*, r)), from a
/// sorted P-reference sample of coordinates.
inline std::pair<double, double> empirical_dis_interval(const std::vector<double>& sorted, double tstar, double r) {
  const auto k = open_ball_flips(r, sorted.size());
  const auto split = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), tstar) - sorted.begin());
  // Moving t above t* flips points with coordinate in [t*, t).
  const double hi = split + k < sorted.size() ? sorted[split + k] : kInf;
  // Moving t below t* flips points in [t, t*); t may go down to just above
  // the (k+1)-th coordinate below t*.
  const double lo = split >= k + 1 ? sorted[split - k - 1] : -kInf;
  return {lo, hi};
}

/// Angle in (0, pi] at which rotating w* toward u flips the sign of a point
/// with <w*, x> = a and <u, x> = b.
inline double flip_angle(double a, double b) {
  const double phi = std::atan2(b, a);
  double t = std::fmod(phi + std::numbers::pi / 2, std::numbers::pi);
  if (t <= 0.0) t += std::numbers::pi;
  return t;
}

}  // namespace detail

/// Disagreement coefficient estimate sup_{r in grid} Pr_Q[DIS(B_P(h*, r))] / r,
/// with the open ball B_P(h*, r) = {h : Pr_P[h != h*] < r}.
inline ThetaEstimate theta_pq(const ThetaConfig& cfg) {
  if (!cfg.cls.contains(cfg.hstar)) throw domain_error("target hypothesis is outside the class");
  if (cfg.p.dim() != cfg.cls.dim()) throw dimension_mismatch(cfg.cls.dim(), cfg.p.dim());
  if (cfg.q.dim() != cfg.cls.dim()) throw dimension_mismatch(cfg.cls.dim(), cfg.q.dim());
  if (cfg.n == 0) throw domain_error("theta estimation needs n >= 1");
  ThetaEstimate est;
  est.epsilon = cfg.epsilon;
  est.n = cfg.n;
  est.seed = cfg.seed;
  est.r_grid = cfg.r_grid.empty() ? default_r_grid(cfg.epsilon) : cfg.r_grid;
  std::sort(est.r_grid.begin(), est.r_grid.end());
  if (est.r_grid.front() < cfg.epsilon) throw domain_error("grid minimum must be >= epsilon");
  if (est.r_grid.back() > 1.0) throw domain_error("grid maximum must be <= 1");
  if (!(est.r_grid.front() > 0.0)) throw domain_error("grid radii must be positive");
  for (std::size_t i = 1; i < est.r_grid.size(); ++i)
    est.grid_resolution = std::max(est.grid_resolution, est.r_grid[i] / est.r_grid[i - 1]);

  const auto qs = sample(cfg.q, derive_seed(cfg.seed, "theta-q"), cfg.n);
  const std::size_t nref = cfg.reference_n ? cfg.reference_n : cfg.n;
  std::vector<std::size_t> hits(est.r_grid.size(), 0);
  const auto kind = cfg.cls.kind();

  if (kind == ConceptClass::linear && cfg.p.rotationally_invariant()) {
    est.path = ThetaPath::rotation_invariant;
    const auto& hs = std::get<LinearHomogeneous>(cfg.hstar);
    for (const auto& x : qs) {
      const double n = vec::norm(x.span());
      // Angular distance from the boundary, in units of pi.
      const double dev = n == 0.0 ? 0.0
                                  : std::abs(std::numbers::pi / 2 -
                                             std::acos(std::clamp(vec::dot(hs.w(), x.span()) / n, -1.0, 1.0))) /
                                        std::numbers::pi;
      for (std::size_t j = 0; j < est.r_grid.size(); ++j) hits[j] += dev < est.r_grid[j];
    }
  } else if (kind == ConceptClass::threshold || kind == ConceptClass::offset) {
    const double tstar = kind == ConceptClass::threshold ? std::get<Threshold>(cfg.hstar).t
                                                         : std::get<OffsetBoundary>(cfg.hstar).offset;
    std::vector<std::pair<double, double>> dis(est.r_grid.size());
    const auto cdf = kind == ConceptClass::threshold ? cdf_1d(cfg.p) : std::nullopt;
    if (cdf) {
      est.path = ThetaPath::threshold_cdf;
      const double f = cdf->cdf(tstar);
      for (std::size_t j = 0; j < dis.size(); ++j)
        dis[j] = {f - est.r_grid[j] < 0.0 ? -kInf : cdf->quantile(f - est.r_grid[j]),
                  f + est.r_grid[j] > 1.0 ? kInf : cdf->quantile(f + est.r_grid[j])};
    } else {
      est.path = ThetaPath::empirical_interval;
      std::vector<double> ref;
      ref.reserve(nref);
      for (const auto& x : sample(cfg.p, derive_seed(cfg.seed, "theta-p"), nref))
        ref.push_back(detail::interval_coordinate(cfg.cls, x));
      std::sort(ref.begin(), ref.end());
      for (std::size_t j = 0; j < dis.size(); ++j) dis[j] = detail::empirical_dis_interval(ref, tstar, est.r_grid[j]);
    }
    for (const auto& x : qs) {
      const double c = detail::interval_coordinate(cfg.cls, x);
      for (std::size_t j = 0; j < dis.size(); ++j) hits[j] += c > dis[j].first && c < dis[j].second;
    }
  } else {
    est.path = ThetaPath::empirical_rotation;
    const auto& ws = std::get<LinearHomogeneous>(cfg.hstar).w();
    const std::size_t d = ws.size();
    if (d < 2) throw unsupported("no disagreement-ball path for one-dimensional linear separators");
    const auto ref = sample(cfg.p, derive_seed(cfg.seed, "theta-p"), nref);
    CounterRng rng(derive_seed(cfg.seed, "theta-directions"));
    // max_flip[j][i]: flip-angle limit for direction i at radius j.
    std::vector<std::vector<double>> limit(est.r_grid.size(), std::vector<double>(cfg.directions));
    std::vector<std::vector<double>> dirs;
    for (std::size_t i = 0; i < cfg.directions; ++i) {
      std::vector<double> u(d);
      double n = 0.0;
      do {
        detail::fill_direction(rng, u);
        const double proj = vec::dot(u, ws);
        for (std::size_t k = 0; k < d; ++k) u[k] -= proj * ws[k];
        n = vec::norm(u);
      } while (n < 1e-8);
      for (double& v : u) v /= n;
      std::vector<double> angles;
      angles.reserve(ref.size());
      for (const auto& x : ref) angles.push_back(detail::flip_angle(vec::dot(ws, x.span()), vec::dot(u, x.span())));
      std::sort(angles.begin(), angles.end());
      for (std::size_t j = 0; j < est.r_grid.size(); ++j) {
        const auto k = detail::open_ball_flips(est.r_grid[j], angles.size());
        limit[j][i] = k < angles.size() ? angles[k] : kInf;
      }
      dirs.push_back(std::move(u));
    }
    for (const auto& x : qs) {
      std::vector<double> fa(dirs.size());
      for (std::size_t i = 0; i < dirs.size(); ++i)
        fa[i] = detail::flip_angle(vec::dot(ws, x.span()), vec::dot(dirs[i], x.span()));
      for (std::size_t j = 0; j < est.r_grid.size(); ++j) {
        bool in = false;
        for (std::size_t i = 0; i < dirs.size() && !in; ++i) in = fa[i] < limit[j][i];
        hits[j] += in;
      }
    }
  }

  for (std::size_t j = 0; j < est.r_grid.size(); ++j) {
    est.masses.push_back(make_estimate(hits[j], cfg.n, cfg.seed));
    est.value = std::max(est.value, est.masses.back().mass / est.r_grid[j]);
  }
  return est;
}

/// m = ceil((c / eps^2) (d + ln(1 / delta))).
inline std::size_t sample_size_for_epsilon(double eps, std::size_t d, double delta, double c = 8.0) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw domain_error("need eps > 0 and delta in (0, 1)");
  return static_cast<std::size_t>(std::ceil(c / (eps * eps) * (static_cast<double>(d) + std::log(1.0 / delta))));
}

/// Inverse of sample_size_for_epsilon.
inline double epsilon_for_sample_size(std::size_t m, std::size_t d, double delta, double c = 8.0) {
  if (m == 0 || !(delta > 0.0 && delta < 1.0)) throw domain_error("need m >= 1 and delta in (0, 1)");
  return std::sqrt(c * (static_cast<double>(d) + std::log(1.0 / delta)) / static_cast<double>(m));
}

}  // namespace rrl
