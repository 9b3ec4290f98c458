#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "core.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace rrl {

enum class LossKind { ca, tl, st };

inline std::string_view to_string(LossKind k) noexcept {
  switch (k) {
    case LossKind::ca: return "ca";
    case LossKind::tl: return "tl";
    case LossKind::st: return "st";
  }
  return "?";
}

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "ca" || s == "CA") return LossKind::ca;
  if (s == "tl" || s == "TL") return LossKind::tl;
  if (s == "st" || s == "ST") return LossKind::st;
  throw domain_error("unknown loss kind '" + std::string(s) + "'");
}

namespace detail {

inline void check_same_class(const Hypothesis& h, const Hypothesis& hstar) {
  if (concept_class(h) != concept_class(hstar)) throw domain_error("hypotheses come from different classes");
  if (input_dimension(h) != input_dimension(hstar))
    throw dimension_mismatch(input_dimension(hstar), input_dimension(h));
}

}  // namespace detail

/// Loss of h at the perturbed point z of the natural point x.
inline int fixed_loss(LossKind kind, const Hypothesis& h, const Hypothesis& hstar, const Point& x,
                      const Point& z) {
  detail::check_same_class(h, hstar);
  if (x.dim() != z.dim()) throw dimension_mismatch(x.dim(), z.dim());
  const Label hz = predict(h, z);
  switch (kind) {
    case LossKind::ca: {
      const Label sz = predict(hstar, z);
      return hz != sz && sz == predict(hstar, x);
    }
    case LossKind::tl: return hz != predict(hstar, z);
    case LossKind::st: return hz != predict(hstar, x);
  }
  return 0;
}

/// min of <c, z> + beta over the closed ball B(x, eta) intersected with the
/// half-space <n, z> + b >= 0. Returns +inf when the intersection is empty.
inline double min_linear_over_ball_halfspace(std::span<const double> c, double beta,
                                             std::span<const double> x, double eta,
                                             std::span<const double> n, double b) {
  const double nn = vec::norm(n);
  const double fx = vec::dot(n, x) + b;
  if (nn == 0.0) {
    if (b < 0.0) return kInf;
  } else if (fx + eta * nn < 0.0) {
    return kInf;
  }
  const double cn = vec::norm(c);
  const double kx = vec::dot(c, x) + beta;
  if (cn == 0.0) return kx;
  // Unconstrained ball minimizer.
  const auto z0 = vec::axpy(x, -eta / cn, c);
  if (nn == 0.0 || vec::dot(n, z0) + b >= 0.0) return kx - eta * cn;
  // Otherwise the half-space constraint is active: minimize over the disk.
  const double off = fx / (nn * nn);
  const double rho2 = eta * eta - fx * fx / (nn * nn);
  const double rho = rho2 > 0.0 ? std::sqrt(rho2) : 0.0;
  const double cdotn = vec::dot(c, n);
  std::vector<double> cp(c.begin(), c.end());
  for (std::size_t i = 0; i < cp.size(); ++i) cp[i] -= cdotn / (nn * nn) * n[i];
  // center p = x - off * n, so <c,p> = <c,x> - off <c,n>
  return kx - off * cdotn - rho * vec::norm(cp);
}

enum class SupMethod { exact, enumerated, sampled_lower_bound };

inline std::string_view to_string(SupMethod m) noexcept {
  switch (m) {
    case SupMethod::exact: return "exact";
    case SupMethod::enumerated: return "enumerated";
    case SupMethod::sampled_lower_bound: return "sampled-lower-bound";
  }
  return "?";
}

struct SupResult {
  int value = 0;
  SupMethod method = SupMethod::exact;
  /// Points examined (enumerated or sampled); 0 for the exact path.
  std::size_t evaluated = 0;
};

struct SupOptions {
  std::size_t samples = 1024;
  std::uint64_t seed = 0;
  bool allow_sampling = true;
};

namespace detail {

/// Affine decision function g(z) = <n, z> + b with the class's sign convention.
struct AffineDecision {
  std::vector<double> n;
  double b;
};

inline std::optional<AffineDecision> affine_decision(const Hypothesis& h) {
  if (const auto* t = std::get_if<Threshold>(&h)) return AffineDecision{{1.0}, -t->t};
  if (const auto* l = std::get_if<LinearHomogeneous>(&h)) return AffineDecision{l->w(), 0.0};
  return std::nullopt;
}

/// Is there z in B(x, eta) with f(z) >= 0 and k(z) < 0?
inline bool exists_closed_then_strict(const AffineDecision& f, const AffineDecision& k,
                                      std::span<const double> x, double eta) {
  return min_linear_over_ball_halfspace(k.n, k.b, x, eta, f.n, f.b) < 0.0;
}

inline SupResult exact_ball_sup(LossKind kind, const AffineDecision& g, const AffineDecision& gs,
                                std::span<const double> x, double eta) {
  // h(z) = + iff g(z) >= 0. Each disagreement event is "one decision >= 0 and
  // the other < 0", which maps onto exists_closed_then_strict.
  const bool star_pos_x = vec::dot(gs.n, x) + gs.b >= 0.0;
  bool hit = false;
  switch (kind) {
    case LossKind::st: {
      // some z with h(z) != h*(x)
      const double gx = vec::dot(g.n, x) + g.b;
      const double reach = eta * vec::norm(g.n);
      hit = star_pos_x ? gx - reach < 0.0 : gx + reach >= 0.0;
      break;
    }
    case LossKind::tl:
      hit = exists_closed_then_strict(gs, g, x, eta) || exists_closed_then_strict(g, gs, x, eta);
      break;
    case LossKind::ca:
      hit = star_pos_x ? exists_closed_then_strict(gs, g, x, eta) : exists_closed_then_strict(g, gs, x, eta);
      break;
  }
  return {hit ? 1 : 0, SupMethod::exact, 0};
}

}  // namespace detail

/// sup over z in U(x) of fixed_loss(kind, h, hstar, x, z).
inline SupResult robust_loss_sup(LossKind kind, const Hypothesis& h, const Hypothesis& hstar,
                                 const Point& x, const PerturbationModel& u,
                                 const SupOptions& opt = {}) {
  detail::check_same_class(h, hstar);
  if (x.dim() != input_dimension(h)) throw dimension_mismatch(input_dimension(h), x.dim());
  if (const auto* fm = std::get_if<FiniteMap>(&u)) {
    SupResult res{0, SupMethod::enumerated, 0};
    for (const auto& z : fm->perturbations(x)) {
      ++res.evaluated;
      if (fixed_loss(kind, h, hstar, x, z)) {
        res.value = 1;
        break;
      }
    }
    return res;
  }
  const double eta = std::get<MetricBall>(u).radius;
  const auto g = detail::affine_decision(h);
  const auto gs = detail::affine_decision(hstar);
  if (g && gs) return detail::exact_ball_sup(kind, *g, *gs, x.span(), eta);
  if (!opt.allow_sampling) throw unsupported("no exact evaluation for this class under a metric ball");
  SupResult res{fixed_loss(kind, h, hstar, x, x), SupMethod::sampled_lower_bound, 1};
  CounterRng rng(opt.seed);
  const std::size_t d = x.dim();
  std::vector<double> dir(d);
  for (std::size_t s = 0; s < opt.samples && res.value == 0; ++s) {
    for (double& v : dir) v = rng.normal();
    const double n = vec::norm(dir);
    if (n == 0.0) continue;
    const double r = eta * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    Point z(vec::axpy(x.span(), r / n, dir));
    ++res.evaluated;
    res.value = fixed_loss(kind, h, hstar, x, z);
  }
  return res;
}

}  // namespace rrl
