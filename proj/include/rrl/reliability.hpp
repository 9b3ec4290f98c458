#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "core.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "losses.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "vec.hpp"
#include "version_space.hpp"

namespace rrl {

enum class CertificateMethod {
  analytic,            // closed form on an interval or arc
  bisection,           // halving search (margin parity path)
  margin,              // closed-form margin certifier
  vertex_enumeration,  // distance from the extreme rays of a cone
  linear_program,      // membership decided by cone feasibility problems
  lipschitz_bound,     // sound lower bound through a Lipschitz constant
};

inline std::string_view to_string(CertificateMethod m) noexcept {
  switch (m) {
    case CertificateMethod::analytic: return "analytic";
    case CertificateMethod::bisection: return "bisection";
    case CertificateMethod::margin: return "margin";
    case CertificateMethod::vertex_enumeration: return "vertex_enumeration";
    case CertificateMethod::linear_program: return "linear_program";
    case CertificateMethod::lipschitz_bound: return "lipschitz_bound";
  }
  return "?";
}

/// Prediction with a reliability radius. Abstention is radius -1.
struct ReliabilityCertificate {
  std::optional<Label> prediction;
  double radius = -1.0;
  LossKind loss = LossKind::st;
  CertificateMethod method = CertificateMethod::analytic;

  bool abstained() const noexcept { return !prediction.has_value(); }

  static ReliabilityCertificate abstain(LossKind k, CertificateMethod m) { return {std::nullopt, -1.0, k, m}; }
};

struct CertifyOptions {
  /// Ball points sampled to confirm the agreed label is constant (ST only).
  std::size_t constancy_samples = 64;
  std::uint64_t constancy_seed = 0x5eed;
};

namespace detail {

inline CertificateMethod shape_method(const VersionSpace& vs, LossKind kind) {
  if (std::holds_alternative<ConstraintCone>(vs.shape()))
    return kind == LossKind::st ? CertificateMethod::vertex_enumeration : CertificateMethod::linear_program;
  if (kind == LossKind::st && vs.hypothesis_class().kind() == ConceptClass::offset &&
      !vs.hypothesis_class().base().is_affine())
    return CertificateMethod::lipschitz_bound;
  return CertificateMethod::analytic;
}

inline Point ball_point(CounterRng& rng, const Point& center, double radius) {
  const std::size_t d = center.dim();
  std::vector<double> dir(d);
  fill_direction(rng, dir);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return Point(vec::axpy(center.span(), r, dir));
}

}  // namespace detail

inline ReliabilityCertificate certify(const VersionSpace& vs, const Point& z, LossKind kind,
                                      const CertifyOptions& opt = {}) {
  const CertificateMethod method = detail::shape_method(vs, kind);
  const Membership m = agree_membership(vs, z);
  const auto label = agreed_label(m);
  if (!label) return ReliabilityCertificate::abstain(kind, method);
  if (kind != LossKind::st) return {label, kInf, kind, method};

  const double r = dis_distance(vs, z);
  if (r > 0.0 && opt.constancy_samples > 0) {
    CounterRng rng(opt.constancy_seed);
    const double probe = std::isfinite(r) ? r * (1.0 - 1e-6) : 1e3 * (1.0 + vec::norm(z.span()));
    for (std::size_t i = 0; i < opt.constancy_samples; ++i) {
      const Point p = detail::ball_point(rng, z, probe);
      if (agree_membership(vs, p) != m)
        throw invariant_violation("agreed label is not constant on the certified ball");
    }
  }
  return {label, r, kind, method};
}

/// Certificate under an arbitrary finite perturbation model, given the
/// preimage set {x : z in U(x)}. The radius is +inf (accept) or -1.
inline ReliabilityCertificate certify_general_finite(const VersionSpace& vs, const Point& z,
                                                     std::span<const Point> u_inverse) {
  if (u_inverse.empty()) throw domain_error("u_inverse must not be empty");
  if (std::find(u_inverse.begin(), u_inverse.end(), z) == u_inverse.end())
    throw domain_error("u_inverse must contain z");
  const auto method = detail::shape_method(vs, LossKind::st);
  const auto zl = agreed_label(agree_membership(vs, z));
  if (!zl) return ReliabilityCertificate::abstain(LossKind::st, method);
  for (const auto& x : u_inverse) {
    const auto xl = agreed_label(agree_membership(vs, x));
    if (!xl || *xl != *zl) return ReliabilityCertificate::abstain(LossKind::st, method);
  }
  return {zl, kInf, LossKind::st, method};
}

/// Whether x lies in the safely-reliable region for (eta1, eta2). hstar is
/// read only for CA.
inline bool safely_reliable_membership(const VersionSpace& vs, const Hypothesis* hstar, const Point& x,
                                       double eta1, double eta2, LossKind kind) {
  if (!(eta1 >= 0.0 && eta2 >= 0.0)) throw domain_error("eta1 and eta2 must be >= 0");
  const Membership m = agree_membership(vs, x);
  if (m == Membership::disagree) return false;
  if (kind == LossKind::st) return dis_distance(vs, x) >= eta1 + eta2;
  if (kind == LossKind::tl) return dis_distance(vs, x) >= eta1;

  if (hstar == nullptr) throw domain_error("CA membership needs the target hypothesis");
  if (!vs.hypothesis_class().contains(*hstar)) throw domain_error("target hypothesis is outside the class");
  const bool plus = m == Membership::agree_plus;
  const auto& cls = vs.hypothesis_class();
  if (const auto* iv = std::get_if<Interval>(&vs.shape())) {
    if (cls.kind() == ConceptClass::offset && !cls.base().is_affine())
      return dis_distance(vs, x) >= eta1;
    // Exact in the interval coordinate: the ball maps onto [r - s, r + s].
    const double r = detail::interval_coordinate(cls, x);
    const double s = eta1 / detail::interval_distance_scale(cls);
    const double tstar = std::holds_alternative<Threshold>(*hstar) ? std::get<Threshold>(*hstar).t
                                                                   : std::get<OffsetBoundary>(*hstar).offset;
    if (plus) return std::max(r - s, tstar) >= iv->hi;
    // Same-label part [r - s, min(r + s, t*)) must avoid (lo, hi); t* > lo.
    return r + s <= iv->lo;
  }
  // Linear: the same-label part of the ball must stay on x's side of every
  // generator hyperplane.
  const auto gens = linear_generators(vs);
  if (gens.empty()) return false;
  const auto& ws = std::get<LinearHomogeneous>(*hstar).w();
  const double sgn = plus ? 1.0 : -1.0;
  const auto side = vec::scaled(ws, sgn);
  for (const auto& e : gens) {
    const auto c = vec::scaled(e, sgn);
    if (min_linear_over_ball_halfspace(c, 0.0, x.span(), eta1, side, 0.0) < 0.0) return false;
  }
  return true;
}

struct MarginParams {
  double eps;
  std::size_t d;
  /// Defaults to ln(1 / (sqrt(d) eps)).
  std::optional<double> alpha{};
  double c1 = 1.0;

  double alpha_value() const {
    return alpha ? *alpha : std::log(1.0 / (std::sqrt(static_cast<double>(d)) * eps));
  }
};

namespace detail {

inline const LinearHomogeneous& require_linear(const Hypothesis& h) {
  const auto* lin = std::get_if<LinearHomogeneous>(&h);
  if (lin == nullptr) throw unsupported("margin certification needs a linear hypothesis");
  return *lin;
}

inline void check_margin_params(const MarginParams& p) {
  if (!(p.eps > 0.0) || p.d == 0) throw domain_error("margin certification needs eps > 0 and d >= 1");
  if (!(p.alpha_value() > 0.0)) throw domain_error("margin certification needs alpha > 0");
}

}  // namespace detail

/// Largest eta with |z| < alpha sqrt(d) - eta and |<w, z>| >= c1 alpha eps
/// sqrt(d) + eta, or -1 when no eta >= 0 qualifies.
inline double margin_certify(const Hypothesis& h_erm, const Point& z, const MarginParams& p) {
  const auto& lin = detail::require_linear(h_erm);
  detail::check_margin_params(p);
  if (z.dim() != lin.dim()) throw dimension_mismatch(lin.dim(), z.dim());
  const double a = p.alpha_value();
  const double sd = std::sqrt(static_cast<double>(p.d));
  const double room = a * sd - vec::norm(z.span());
  const double slack = std::abs(vec::dot(lin.w(), z.span())) - p.c1 * a * p.eps * sd;
  if (room <= 0.0 || slack < 0.0) return -1.0;
  return std::min(room, slack);
}

/// Halving search over eta starting at alpha sqrt(d); returns the first eta
/// accepted, 0 if only eta = 0 is, or -1.
inline double margin_certify_halving(const Hypothesis& h_erm, const Point& z, const MarginParams& p,
                                     int max_halvings = 64) {
  const auto& lin = detail::require_linear(h_erm);
  detail::check_margin_params(p);
  if (z.dim() != lin.dim()) throw dimension_mismatch(lin.dim(), z.dim());
  const double a = p.alpha_value();
  const double sd = std::sqrt(static_cast<double>(p.d));
  const double nz = vec::norm(z.span());
  const double margin = std::abs(vec::dot(lin.w(), z.span()));
  auto accepted = [&](double eta) { return a * sd - nz > eta && margin - p.c1 * a * p.eps * sd >= eta; };
  if (!accepted(0.0)) return -1.0;
  double eta = a * sd;
  for (int i = 0; i < max_halvings; ++i, eta *= 0.5)
    if (accepted(eta)) return eta;
  return 0.0;
}

enum class AttackStrategy { boundary_directed, random_ball, grid };

inline std::string_view to_string(AttackStrategy s) noexcept {
  switch (s) {
    case AttackStrategy::boundary_directed: return "boundary-directed";
    case AttackStrategy::random_ball: return "random-ball";
    case AttackStrategy::grid: return "grid";
  }
  return "?";
}

inline AttackStrategy parse_attack_strategy(std::string_view s) {
  if (s == "boundary-directed") return AttackStrategy::boundary_directed;
  if (s == "random-ball") return AttackStrategy::random_ball;
  if (s == "grid") return AttackStrategy::grid;
  throw domain_error("unknown attack strategy '" + std::string(s) + "'");
}

struct ContractConfig {
  HypothesisClass cls;
  Hypothesis hstar;
  DistributionSpec sampler;
  std::size_t m = 100;
  std::size_t trials = 1000;
  double budget = 1.0;
  LossKind kind = LossKind::st;
  AttackStrategy strategy = AttackStrategy::boundary_directed;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t max_witnesses = 16;
  CertifyOptions certify_options{};
};

/// Everything needed to replay one violating trial.
struct Witness {
  std::size_t trial;
  std::uint64_t trial_seed;
  Point x;
  Point z;
  double distance;
  ReliabilityCertificate certificate;
  Hypothesis erm;
};

struct ViolationReport {
  std::size_t trials = 0;
  /// Trials where the certificate covered the attack (radius > distance).
  std::size_t certified = 0;
  std::size_t violations = 0;
  std::vector<Witness> witnesses;
};

namespace detail {

/// Unit direction from x toward the nearest point of DIS, or toward the
/// target boundary when x already lies in DIS.
inline std::vector<double> boundary_direction(const VersionSpace& vs, const Hypothesis& hstar, const Point& x) {
  const auto& cls = vs.hypothesis_class();
  const Membership m = agree_membership(vs, x);
  const double sgn = m == Membership::agree_minus ? -1.0 : 1.0;
  if (std::holds_alternative<Interval>(vs.shape())) {
    std::vector<double> grad(x.dim(), 0.0);
    if (cls.kind() == ConceptClass::threshold) {
      grad[0] = 1.0;
    } else {
      const std::size_t d = x.dim();
      const auto g = cls.base().gradient(x.span().first(d - 1));
      for (std::size_t i = 0; i + 1 < d; ++i) grad[i] = -g[i];
      grad[d - 1] = 1.0;
    }
    grad = vec::normalized(grad);
    if (m == Membership::disagree) {
      return vec::scaled(grad, decision_value(hstar, x) >= 0.0 ? -1.0 : 1.0);
    }
    return vec::scaled(grad, -sgn);
  }
  const auto& ws = std::get<LinearHomogeneous>(hstar).w();
  if (m == Membership::disagree) return vec::scaled(ws, vec::dot(ws, x.span()) >= 0.0 ? -1.0 : 1.0);
  const auto gens = linear_generators(vs);
  if (gens.empty()) return vec::scaled(ws, -sgn);
  const std::vector<double>* best = &gens.front();
  double best_val = kInf;
  for (const auto& e : gens) {
    const double v = sgn * vec::dot(e, x.span());
    if (v < best_val) {
      best_val = v;
      best = &e;
    }
  }
  return vec::scaled(*best, -sgn);
}

}  // namespace detail

/// Adversarial check of the certificate contract: within the issued radius
/// the loss of the learner must be zero.
inline ViolationReport verify_contract(const ContractConfig& cfg) {
  if (!(cfg.budget >= 0.0)) throw domain_error("budget must be >= 0");
  if (!cfg.cls.contains(cfg.hstar)) throw domain_error("target hypothesis is outside the class");
  if (cfg.sampler.dim() != cfg.cls.dim()) throw dimension_mismatch(cfg.cls.dim(), cfg.sampler.dim());

  struct Outcome {
    bool certified = false;
    bool violated = false;
    std::optional<Witness> witness;
  };
  std::vector<Outcome> outcomes(cfg.trials);
  const std::size_t d = cfg.cls.dim();

  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, "contract-trial", t);
    const auto pts = sample(cfg.sampler, derive_seed(trial_seed, "train"), cfg.m + 1);
    Dataset s(d);
    for (std::size_t i = 0; i < cfg.m; ++i) s.add(pts[i], predict(cfg.hstar, pts[i]));
    const Point& x = pts[cfg.m];
    const VersionSpace vs = fit_version_space(s, cfg.cls);
    const Hypothesis h = erm(vs);

    CounterRng rng(derive_seed(trial_seed, "attack"));
    std::vector<double> dir(d);
    double step = 0.0;
    switch (cfg.strategy) {
      case AttackStrategy::boundary_directed:
        dir = detail::boundary_direction(vs, cfg.hstar, x);
        step = cfg.budget * rng.uniform();
        break;
      case AttackStrategy::random_ball:
        detail::fill_direction(rng, dir);
        step = cfg.budget * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        break;
      case AttackStrategy::grid: {
        constexpr std::size_t kSteps = 16;
        const std::size_t axis = t % d;
        const std::size_t k = (t / d) % (2 * kSteps);
        std::fill(dir.begin(), dir.end(), 0.0);
        dir[axis] = k < kSteps ? 1.0 : -1.0;
        step = cfg.budget * static_cast<double>(k % kSteps + 1) / static_cast<double>(kSteps);
        break;
      }
    }
    const Point z(vec::axpy(x.span(), step, dir));
    const double dist = distance(x, z);
    const auto cert = certify(vs, z, cfg.kind, cfg.certify_options);
    Outcome& out = outcomes[t];
    // Radius 0 still asserts the label at z itself.
    const bool covered = !cert.abstained() && (cert.radius > dist || (cert.radius == 0.0 && dist == 0.0));
    bool bad = false;
    if (covered) {
      out.certified = true;
      bad = fixed_loss(cfg.kind, h, cfg.hstar, x, z) != 0;
    }
    if (!cert.abstained() && cert.radius == 0.0) bad = bad || *cert.prediction != predict(cfg.hstar, z);
    if (bad) {
      out.violated = true;
      out.witness = Witness{t, trial_seed, x, z, dist, cert, h};
    }
  });

  ViolationReport rep;
  rep.trials = cfg.trials;
  for (auto& o : outcomes) {
    rep.certified += o.certified;
    rep.violations += o.violated;
    if (o.witness && rep.witnesses.size() < cfg.max_witnesses) rep.witnesses.push_back(std::move(*o.witness));
  }
  return rep;
}

}  // namespace rrl
