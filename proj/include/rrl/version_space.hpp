#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "cone.hpp"
#include "core.hpp"
#include "error.hpp"
#include "lp.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace rrl {

enum class Membership { agree_plus, agree_minus, disagree };

inline std::optional<Label> agreed_label(Membership m) noexcept {
  if (m == Membership::agree_plus) return Label::positive;
  if (m == Membership::agree_minus) return Label::negative;
  return std::nullopt;
}

/// Consistent thresholds (or offsets) t in (lo, hi]: lo is the largest
/// negative coordinate, hi the smallest positive one.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = false;
};

/// Normals w = (cos phi, sin phi) with phi in [phi_lo, phi_hi].
struct AngleArc {
  double phi_lo = -std::numbers::pi;
  double phi_hi = std::numbers::pi;

  double width() const noexcept { return phi_hi - phi_lo; }
  bool full_circle() const noexcept { return width() >= 2.0 * std::numbers::pi - 1e-15; }
};

/// K = {w : <a_i, w> >= 0} with a_i = y_i x_i normalized.
struct ConstraintCone {
  std::vector<std::vector<double>> constraints;
  std::size_t dim = 0;
  /// Extreme rays of K, computed once at fit time.
  std::shared_ptr<const cone::ExtremeRays> rays;
};

struct FitOptions {
  /// Error threshold; nu > 0 is available for interval shapes only.
  double nu = 0.0;
  /// Use the general cone representation even in dimension 2.
  bool force_cone = false;
  /// Strictness tolerance for the cone feasibility problems.
  double lp_tolerance = 1e-9;
};

class VersionSpace {
 public:
  using Shape = std::variant<Interval, AngleArc, ConstraintCone>;

  VersionSpace(HypothesisClass cls, Shape shape, double nu, double lp_tol)
      : cls_(std::move(cls)), shape_(std::move(shape)), nu_(nu), lp_tol_(lp_tol) {}

  const HypothesisClass& hypothesis_class() const noexcept { return cls_; }
  const Shape& shape() const noexcept { return shape_; }
  double nu() const noexcept { return nu_; }
  double lp_tolerance() const noexcept { return lp_tol_; }
  std::size_t dim() const noexcept { return cls_.dim(); }

 private:
  HypothesisClass cls_;
  Shape shape_;
  double nu_;
  double lp_tol_;
};

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Coordinate on which interval shapes act: x_1 for thresholds, the residual
/// x_{d+1} - f(x_{1..d}) for offsets.
inline double interval_coordinate(const HypothesisClass& cls, const Point& z) {
  if (z.dim() != cls.dim()) throw dimension_mismatch(cls.dim(), z.dim());
  if (cls.kind() == ConceptClass::threshold) return z[0];
  const std::size_t d = cls.dim();
  return z[d - 1] - cls.base()(z.span().first(d - 1));
}

/// Euclidean length corresponding to a unit change of the interval coordinate
/// (a lower bound when the base is not affine).
inline double interval_distance_scale(const HypothesisClass& cls) {
  if (cls.kind() == ConceptClass::threshold) return 1.0;
  const double c = cls.base().lipschitz();
  return 1.0 / std::sqrt(1.0 + c * c);
}

inline Interval fit_interval(const Dataset& s, const HypothesisClass& cls, double nu) {
  if (nu == 0.0) {
    Interval iv;
    for (const auto& [x, y] : s) {
      const double r = interval_coordinate(cls, x);
      if (y == Label::positive) {
        iv.hi = std::min(iv.hi, r);
      } else {
        iv.lo = std::max(iv.lo, r);
      }
    }
    if (!(iv.lo < iv.hi)) throw not_realizable("no consistent threshold: largest negative >= smallest positive");
    return iv;
  }
  // Enumerate the cells (v_k, v_{k+1}] on which every prediction is constant
  // and take the hull of the cells within the error budget.
  struct Item {
    double r;
    Label y;
  };
  std::vector<Item> items;
  for (const auto& [x, y] : s) items.push_back({interval_coordinate(cls, x), y});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.r < b.r; });
  const auto n = static_cast<double>(items.size());
  // t below every value: all predicted positive, errors = negatives.
  std::size_t errors = 0;
  for (const auto& it : items) errors += it.y == Label::negative;
  std::optional<double> lo, hi;
  double left = -kInf;
  std::size_t i = 0;
  for (;;) {
    const double right = i < items.size() ? items[i].r : kInf;
    if (static_cast<double>(errors) <= nu * n && left < right) {
      if (!lo) lo = left;
      hi = right;
    }
    if (i >= items.size()) break;
    // Move t past every item with value == right; they become negative predictions.
    while (i < items.size() && items[i].r == right) {
      if (items[i].y == Label::negative) {
        --errors;
      } else {
        ++errors;
      }
      ++i;
    }
    left = right;
  }
  if (!lo) throw not_realizable("no threshold within the error budget");
  return Interval{*lo, *hi, true, false};
}

inline double wrap_near(double angle, double center) {
  return angle - kTwoPi * std::round((angle - center) / kTwoPi);
}

inline AngleArc fit_arc(const Dataset& s) {
  AngleArc arc;
  bool any = false;
  for (const auto& [x, y] : s) {
    const double a0 = sign_of(y) * x[0];
    const double a1 = sign_of(y) * x[1];
    if (a0 == 0.0 && a1 == 0.0) {
      if (y == Label::negative) throw not_realizable("negative example at the origin");
      continue;
    }
    const double alpha = std::atan2(a1, a0);
    if (!any) {
      arc = {alpha - std::numbers::pi / 2, alpha + std::numbers::pi / 2};
      any = true;
      continue;
    }
    const double mid = 0.5 * (arc.phi_lo + arc.phi_hi);
    const double c = wrap_near(alpha, mid);
    const double lo = std::max(arc.phi_lo, c - std::numbers::pi / 2);
    const double hi = std::min(arc.phi_hi, c + std::numbers::pi / 2);
    if (lo > hi) throw not_realizable("no consistent linear separator through the origin");
    arc = {lo, hi};
  }
  if (any && arc.phi_lo == arc.phi_hi) {
    // A single direction survives only if no negative example sits on its boundary.
    const double c = std::cos(arc.phi_lo), sn = std::sin(arc.phi_lo);
    for (const auto& [x, y] : s)
      if ((c * x[0] + sn * x[1] >= 0.0) != (y == Label::positive))
        throw not_realizable("no consistent linear separator through the origin");
  }
  return arc;
}

inline std::vector<std::vector<double>> signed_constraints(const Dataset& s) {
  std::vector<std::vector<double>> rows;
  for (const auto& [x, y] : s) {
    auto a = vec::scaled(x.span(), sign_of(y));
    const double n = vec::norm(a);
    if (n == 0.0) {
      if (y == Label::negative) throw not_realizable("negative example at the origin");
      continue;
    }
    rows.push_back(vec::scaled(a, 1.0 / n));
  }
  return rows;
}

/// max t s.t. <a_i, w> >= t, |w|_inf <= 1, |t| <= 1.
inline lp::Result max_margin(const std::vector<std::vector<double>>& rows, std::size_t d) {
  std::vector<double> c(d + 1, 0.0);
  c[d] = 1.0;
  std::vector<std::vector<double>> g;
  g.reserve(rows.size());
  for (const auto& a : rows) {
    std::vector<double> row(d + 1);
    for (std::size_t j = 0; j < d; ++j) row[j] = -a[j];
    row[d] = 1.0;
    g.push_back(std::move(row));
  }
  const std::vector<double> h(rows.size(), 0.0);
  const std::vector<double> bound(d + 1, 1.0);
  auto res = lp::maximize_boxed(c, g, h, bound);
  if (res.status != lp::Status::optimal) throw solver_failure("max-margin problem did not converge");
  return res;
}

inline ConstraintCone fit_cone(const Dataset& s, std::size_t d) {
  ConstraintCone k;
  k.dim = d;
  k.constraints = signed_constraints(s);
  if (!k.constraints.empty()) {
    const auto res = max_margin(k.constraints, d);
    if (!(res.value > 1e-12)) throw not_realizable("no consistent linear separator through the origin");
  }
  k.rays = std::make_shared<const cone::ExtremeRays>(cone::extreme_rays(k.constraints, d));
  return k;
}

/// Largest value of <z, w> over w in K with |w|_inf <= 1.
inline double cone_support(const ConstraintCone& k, std::span<const double> z) {
  std::vector<std::vector<double>> g;
  g.reserve(k.constraints.size());
  for (const auto& a : k.constraints) g.push_back(vec::scaled(a, -1.0));
  const std::vector<double> h(g.size(), 0.0);
  const std::vector<double> bound(k.dim, 1.0);
  const auto res = lp::maximize_boxed(z, g, h, bound);
  if (res.status != lp::Status::optimal) {
    throw solver_failure("cone feasibility problem failed after " + std::to_string(res.iterations) +
                         " iterations");
  }
  return res.value;
}

/// max and min of cos(phi - psi) over phi in the arc.
inline std::pair<double, double> cos_range(const AngleArc& arc, double psi) {
  const double a = arc.phi_lo - psi;
  const double b = arc.phi_hi - psi;
  const double ca = std::cos(a);
  const double cb = std::cos(b);
  double hi = std::max(ca, cb);
  double lo = std::min(ca, cb);
  if (std::ceil(a / kTwoPi) * kTwoPi <= b) hi = 1.0;
  if (std::ceil((a - std::numbers::pi) / kTwoPi) * kTwoPi + std::numbers::pi <= b) lo = -1.0;
  return {hi, lo};
}

inline std::vector<double> unit_at(double phi) { return {std::cos(phi), std::sin(phi)}; }

}  // namespace detail

/// Represents H_nu(S) for the class. For nu = 0, S must be realizable.
inline VersionSpace fit_version_space(const Dataset& s, const HypothesisClass& cls,
                                      const FitOptions& opt = {}) {
  if (!(opt.nu >= 0.0 && opt.nu < 1.0)) throw domain_error("nu must lie in [0, 1)");
  if (s.dim() != cls.dim()) throw dimension_mismatch(cls.dim(), s.dim());
  switch (cls.kind()) {
    case ConceptClass::threshold:
    case ConceptClass::offset:
      return VersionSpace(cls, detail::fit_interval(s, cls, opt.nu), opt.nu, opt.lp_tolerance);
    case ConceptClass::linear:
      if (opt.nu != 0.0) throw unsupported("nu > 0 is not supported for linear separators");
      if (cls.dim() == 2 && !opt.force_cone)
        return VersionSpace(cls, detail::fit_arc(s), 0.0, opt.lp_tolerance);
      return VersionSpace(cls, detail::fit_cone(s, cls.dim()), 0.0, opt.lp_tolerance);
  }
  throw unsupported("unknown concept class");
}

/// Deterministic consistent hypothesis: interval midpoint, arc midpoint, or
/// the max-margin normal of the cone.
inline Hypothesis erm(const VersionSpace& vs) {
  if (vs.nu() != 0.0) throw unsupported("erm requires a realizable version space");
  const auto& cls = vs.hypothesis_class();
  return std::visit(
      [&](const auto& sh) -> Hypothesis {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, Interval>) {
          double t = 0.0;
          if (std::isfinite(sh.lo) && std::isfinite(sh.hi)) {
            t = 0.5 * (sh.lo + sh.hi);
          } else if (std::isfinite(sh.hi)) {
            t = sh.hi;
          } else if (std::isfinite(sh.lo)) {
            t = sh.lo + 1.0;
          }
          if (cls.kind() == ConceptClass::threshold) return Threshold{t};
          return OffsetBoundary{cls.base(), t};
        } else if constexpr (std::is_same_v<T, AngleArc>) {
          const double mid = sh.full_circle() ? 0.0 : 0.5 * (sh.phi_lo + sh.phi_hi);
          return LinearHomogeneous(detail::unit_at(mid));
        } else {
          std::vector<double> w(sh.dim, 0.0);
          if (sh.constraints.empty()) {
            w[0] = 1.0;
          } else {
            const auto res = detail::max_margin(sh.constraints, sh.dim);
            std::copy(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(sh.dim), w.begin());
          }
          return LinearHomogeneous(std::move(w));
        }
      },
      vs.shape());
}

inline Hypothesis erm(const Dataset& s, const HypothesisClass& cls) {
  return erm(fit_version_space(s, cls));
}

/// Whether h belongs to the represented set.
inline bool contains(const VersionSpace& vs, const Hypothesis& h, double tol = 1e-12) {
  if (!vs.hypothesis_class().contains(h)) return false;
  return std::visit(
      [&](const auto& sh) -> bool {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, Interval>) {
          const double t = std::holds_alternative<Threshold>(h) ? std::get<Threshold>(h).t
                                                                : std::get<OffsetBoundary>(h).offset;
          return t > sh.lo - tol && t <= sh.hi + tol;
        } else if constexpr (std::is_same_v<T, AngleArc>) {
          const auto& w = std::get<LinearHomogeneous>(h).w();
          const double phi = detail::wrap_near(std::atan2(w[1], w[0]), 0.5 * (sh.phi_lo + sh.phi_hi));
          return phi >= sh.phi_lo - tol && phi <= sh.phi_hi + tol;
        } else {
          const auto& w = std::get<LinearHomogeneous>(h).w();
          for (const auto& a : sh.constraints)
            if (vec::dot(a, w) < -tol) return false;
          return true;
        }
      },
      vs.shape());
}

inline Membership agree_membership(const VersionSpace& vs, const Point& z) {
  if (z.dim() != vs.dim()) throw dimension_mismatch(vs.dim(), z.dim());
  return std::visit(
      [&](const auto& sh) -> Membership {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, Interval>) {
          const double r = detail::interval_coordinate(vs.hypothesis_class(), z);
          if (r >= sh.hi) return Membership::agree_plus;
          if (r <= sh.lo) return Membership::agree_minus;
          return Membership::disagree;
        } else if constexpr (std::is_same_v<T, AngleArc>) {
          if (z[0] == 0.0 && z[1] == 0.0) return Membership::agree_plus;
          const auto [hi, lo] = detail::cos_range(sh, std::atan2(z[1], z[0]));
          if (lo >= 0.0) return Membership::agree_plus;
          if (hi < 0.0) return Membership::agree_minus;
          return Membership::disagree;
        } else {
          const double tol = vs.lp_tolerance();
          const bool plus = detail::cone_support(sh, z.span()) > tol;
          const bool minus = detail::cone_support(sh, vec::scaled(z.span(), -1.0)) > tol;
          if (plus && minus) return Membership::disagree;
          if (minus) return Membership::agree_minus;
          return Membership::agree_plus;
        }
      },
      vs.shape());
}

/// Unit normals whose nonnegative combinations span the linear version space
/// (arc endpoints or cone extreme rays). Empty when the set contains a line.
inline std::vector<std::vector<double>> linear_generators(const VersionSpace& vs) {
  if (const auto* arc = std::get_if<AngleArc>(&vs.shape())) {
    if (arc->width() >= std::numbers::pi - 1e-15) return {};
    if (arc->width() == 0.0) return {detail::unit_at(arc->phi_lo)};
    return {detail::unit_at(arc->phi_lo), detail::unit_at(arc->phi_hi)};
  }
  if (const auto* k = std::get_if<ConstraintCone>(&vs.shape())) {
    if (!k->rays->pointed) return {};
    return k->rays->rays;
  }
  throw domain_error("not a linear version space");
}

struct DistanceReport {
  double value = 0.0;
  /// Sampled over random unit normals in the version space; never below value.
  double sampled_upper = 0.0;
  double gap = 0.0;
  bool flagged = false;
  bool exact = true;
};

/// Distance from z to the disagreement region, with a sampled cross-check for
/// the cone representation.
inline DistanceReport dis_distance_report(const VersionSpace& vs, const Point& z,
                                          std::size_t samples = 256, std::uint64_t seed = 0) {
  const Membership m = agree_membership(vs, z);
  DistanceReport rep;
  if (m == Membership::disagree) return rep;
  const double sgn = m == Membership::agree_plus ? 1.0 : -1.0;
  const auto& cls = vs.hypothesis_class();
  if (const auto* iv = std::get_if<Interval>(&vs.shape())) {
    const double r = detail::interval_coordinate(cls, z);
    const double gap = m == Membership::agree_plus ? r - iv->hi : iv->lo - r;
    rep.value = std::max(0.0, gap) * detail::interval_distance_scale(cls);
    rep.exact = cls.kind() == ConceptClass::threshold || cls.base().is_affine();
    rep.sampled_upper = rep.value;
    return rep;
  }
  if (std::holds_alternative<AngleArc>(vs.shape()) &&
      std::get<AngleArc>(vs.shape()).width() == 0.0) {
    rep.value = kInf;
    rep.sampled_upper = kInf;
    return rep;
  }
  const auto gens = linear_generators(vs);
  if (gens.empty()) return rep;
  double best = kInf;
  for (const auto& e : gens) best = std::min(best, sgn * vec::dot(e, z.span()));
  rep.value = std::max(0.0, best);
  rep.sampled_upper = rep.value;
  if (std::holds_alternative<ConstraintCone>(vs.shape()) && samples > 0) {
    CounterRng rng(seed);
    double upper = kInf;
    std::vector<double> w(vs.dim());
    for (std::size_t s = 0; s < samples; ++s) {
      std::fill(w.begin(), w.end(), 0.0);
      for (const auto& e : gens) {
        const double lam = -std::log(rng.uniform_open());
        for (std::size_t j = 0; j < w.size(); ++j) w[j] += lam * e[j];
      }
      const double n = vec::norm(w);
      if (n > 0.0) upper = std::min(upper, sgn * vec::dot(w, z.span()) / n);
    }
    for (const auto& e : gens) upper = std::min(upper, sgn * vec::dot(e, z.span()));
    rep.sampled_upper = std::max(0.0, upper);
    rep.gap = rep.sampled_upper - rep.value;
    rep.flagged = rep.gap > 1e-3 * rep.value;
  }
  return rep;
}

inline double dis_distance(const VersionSpace& vs, const Point& z) {
  return dis_distance_report(vs, z, 0).value;
}

/// Closed-form bound delta(S, c, dnorm) such that, for admissible delta1,
/// every x with c <= |x| <= dnorm and |<w*, x>| below it lies in DIS.
inline double margin_exclusion_delta(double delta1, double c, double dnorm) {
  if (!(delta1 > 0.0 && delta1 < std::numbers::pi / 2)) throw domain_error("delta1 must lie in (0, pi/2)");
  if (!(c > 0.0 && c < dnorm) || !std::isfinite(dnorm)) throw domain_error("need 0 < c < dnorm");
  const double t = std::tan(delta1);
  const double a = dnorm + t * t;
  return c * c * t / std::sqrt(a * a + c * c * t * t);
}

/// Admissibility bound on delta1: min over S of |<w*, x>| / |x|.
inline double margin_exclusion_delta1_bound(const Dataset& s, const LinearHomogeneous& wstar) {
  if (s.dim() != wstar.dim()) throw dimension_mismatch(wstar.dim(), s.dim());
  double best = kInf;
  for (const auto& [x, y] : s) {
    const double n = vec::norm(x.span());
    if (n == 0.0) throw domain_error("sample at the origin");
    best = std::min(best, std::abs(vec::dot(wstar.w(), x.span())) / n);
  }
  return best;
}

}  // namespace rrl
