#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "core.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace rrl {

class DistributionSpec;

/// N(0, I_d).
struct IsotropicGaussian {
  std::size_t d;
};

/// Uniform on the ball of radius sqrt(d + 2), which has identity covariance.
struct UniformBall {
  std::size_t d;
};

/// Uniform on [lo, hi]^d.
struct UniformCube {
  std::size_t d;
  double lo = 0.0;
  double hi = 1.0;
};

enum class Tilt { linear, cosine };

/// Density a + (b - a) psi(x_1) on [0,1]^{d+1}, where psi maps into [0, 1]
/// and integrates to 1/2. Normalization forces a + b = 2.
struct NearlyUniform {
  std::size_t d;
  double a;
  double b;
  Tilt tilt = Tilt::linear;
};

/// Isotropic density proportional to (1 + |x| / sigma)^-(d + 1 + 1/|s|),
/// with sigma chosen for identity covariance. A heavy-tailed stand-in for
/// s-concave families; no s-concavity claim is made.
struct RadialHeavyTail {
  std::size_t d;
  double s;
};

/// Uniform on the sphere of the given radius.
struct UniformSphere {
  std::size_t d;
  double radius = 1.0;
};

struct MeanShift {
  std::shared_ptr<const DistributionSpec> base;
  std::vector<double> mu;
};

class DistributionSpec {
 public:
  using Variant = std::variant<IsotropicGaussian, UniformBall, UniformCube, NearlyUniform,
                               RadialHeavyTail, UniformSphere, MeanShift>;

  template <class T>
    requires std::is_constructible_v<Variant, T>
  DistributionSpec(T v) : v_(std::move(v)) {  // NOLINT(google-explicit-constructor)
    validate();
  }

  static DistributionSpec mean_shift(const DistributionSpec& base, std::vector<double> mu) {
    return DistributionSpec(MeanShift{std::make_shared<const DistributionSpec>(base), std::move(mu)});
  }

  const Variant& variant() const noexcept { return v_; }

  /// Dimension of the sampled points.
  std::size_t dim() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, MeanShift>) {
            return s.base->dim();
          } else if constexpr (std::is_same_v<T, NearlyUniform>) {
            return s.d + 1;
          } else {
            return s.d;
          }
        },
        v_);
  }

  std::string_view kind() const noexcept {
    static constexpr std::string_view names[] = {"gaussian",          "uniform_ball",   "uniform_cube",
                                                 "nearly_uniform",    "radial_heavy_tail", "uniform_sphere",
                                                 "mean_shift"};
    return names[v_.index()];
  }

  bool rotationally_invariant() const noexcept {
    return std::holds_alternative<IsotropicGaussian>(v_) || std::holds_alternative<UniformBall>(v_) ||
           std::holds_alternative<UniformSphere>(v_) || std::holds_alternative<RadialHeavyTail>(v_);
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, MeanShift>) {
            if (!s.base) throw domain_error("mean_shift needs a base distribution");
            if (s.mu.size() != s.base->dim()) throw dimension_mismatch(s.base->dim(), s.mu.size());
            for (double v : s.mu)
              if (!std::isfinite(v)) throw domain_error("mean_shift mu must be finite");
          } else {
            if (s.d == 0) throw domain_error("distribution dimension must be >= 1");
            if constexpr (std::is_same_v<T, UniformCube>) {
              if (!(std::isfinite(s.lo) && std::isfinite(s.hi) && s.lo < s.hi))
                throw domain_error("uniform_cube needs finite lo < hi");
            } else if constexpr (std::is_same_v<T, NearlyUniform>) {
              if (!(s.a > 0.0 && s.a <= s.b)) throw domain_error("nearly_uniform needs 0 < a <= b");
              if (std::abs(s.a + s.b - 2.0) > 1e-12) throw domain_error("nearly_uniform needs a + b = 2");
            } else if constexpr (std::is_same_v<T, RadialHeavyTail>) {
              if (!(s.s > -1.0 && s.s < 0.0)) throw domain_error("radial_heavy_tail needs s in (-1, 0)");
            } else if constexpr (std::is_same_v<T, UniformSphere>) {
              if (!(s.radius > 0.0 && std::isfinite(s.radius))) throw domain_error("uniform_sphere radius must be > 0");
            }
          }
        },
        v_);
  }

  Variant v_;
};

namespace detail {

inline double tilt_value(Tilt t, double x1) {
  if (t == Tilt::linear) return x1;
  return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x1));
}

inline void fill_direction(CounterRng& rng, std::vector<double>& v) {
  double n = 0.0;
  do {
    for (double& c : v) c = rng.normal();
    n = vec::norm(v);
  } while (n == 0.0);
  for (double& c : v) c /= n;
}

inline std::vector<double> draw(const DistributionSpec& spec, CounterRng& rng) {
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IsotropicGaussian>) {
          std::vector<double> v(s.d);
          for (double& c : v) c = rng.normal();
          return v;
        } else if constexpr (std::is_same_v<T, UniformBall>) {
          std::vector<double> v(s.d);
          fill_direction(rng, v);
          const double r = std::sqrt(static_cast<double>(s.d) + 2.0) *
                           std::pow(rng.uniform(), 1.0 / static_cast<double>(s.d));
          for (double& c : v) c *= r;
          return v;
        } else if constexpr (std::is_same_v<T, UniformCube>) {
          std::vector<double> v(s.d);
          for (double& c : v) c = rng.uniform(s.lo, s.hi);
          return v;
        } else if constexpr (std::is_same_v<T, NearlyUniform>) {
          std::vector<double> v(s.d + 1);
          for (;;) {
            for (double& c : v) c = rng.uniform();
            const double p = s.a + (s.b - s.a) * tilt_value(s.tilt, v[0]);
            if (rng.uniform() * s.b < p) return v;
          }
        } else if constexpr (std::is_same_v<T, RadialHeavyTail>) {
          const double beta = 1.0 + 1.0 / std::abs(s.s);
          const double dd = static_cast<double>(s.d);
          const double sigma = std::sqrt((beta - 1.0) * (beta - 2.0) / (dd + 1.0));
          std::vector<double> v(s.d);
          fill_direction(rng, v);
          const double u = rng.gamma(dd) / rng.gamma(beta);
          for (double& c : v) c *= sigma * u;
          return v;
        } else if constexpr (std::is_same_v<T, UniformSphere>) {
          std::vector<double> v(s.d);
          fill_direction(rng, v);
          for (double& c : v) c *= s.radius;
          return v;
        } else {
          auto v = draw(*s.base, rng);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] += s.mu[i];
          return v;
        }
      },
      spec.variant());
}

}  // namespace detail

/// n i.i.d. draws, a pure function of (spec, seed, n).
inline std::vector<Point> sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t n) {
  CounterRng rng(seed);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(detail::draw(spec, rng));
  return out;
}

struct DensityBounds {
  double a;
  double b;
};

/// Envelope a <= p <= b on the support; nullopt when none is known.
inline std::optional<DensityBounds> density_bounds(const DistributionSpec& spec) {
  if (const auto* nu = std::get_if<NearlyUniform>(&spec.variant())) return DensityBounds{nu->a, nu->b};
  if (const auto* c = std::get_if<UniformCube>(&spec.variant())) {
    const double p = std::pow(c->hi - c->lo, -static_cast<double>(c->d));
    return DensityBounds{p, p};
  }
  return std::nullopt;
}

/// Cumulative distribution and quantile of a one-dimensional spec.
struct Cdf1D {
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  // Bracketed Newton on the cdf.
  double lo = -40.0;
  double hi = 40.0;
  double x = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = normal_cdf(x) - p;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    double nx = pdf > 1e-300 ? x - f / pdf : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) < 1e-15 * (1.0 + std::abs(x))) return nx;
    x = nx;
  }
  return x;
}

inline std::optional<Cdf1D> cdf_1d(const DistributionSpec& spec) {
  if (spec.dim() != 1) return std::nullopt;
  return std::visit(
      [](const auto& s) -> std::optional<Cdf1D> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IsotropicGaussian>) {
          return Cdf1D{normal_cdf, normal_quantile};
        } else if constexpr (std::is_same_v<T, UniformCube> || std::is_same_v<T, UniformBall>) {
          double lo = 0.0;
          double hi = 0.0;
          if constexpr (std::is_same_v<T, UniformCube>) {
            lo = s.lo;
            hi = s.hi;
          } else {
            hi = std::sqrt(3.0);
            lo = -hi;
          }
          return Cdf1D{[lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); },
                       [lo, hi](double p) { return lo + std::clamp(p, 0.0, 1.0) * (hi - lo); }};
        } else if constexpr (std::is_same_v<T, MeanShift>) {
          auto base = cdf_1d(*s.base);
          if (!base) return std::nullopt;
          const double m = s.mu[0];
          return Cdf1D{[b = base->cdf, m](double x) { return b(x - m); },
                       [q = base->quantile, m](double p) { return q(p) + m; }};
        } else {
          return std::nullopt;
        }
      },
      spec.variant());
}

}  // namespace rrl
