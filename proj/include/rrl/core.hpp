#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "vec.hpp"

namespace rrl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A point of R^d with finite coordinates.
class Point {
 public:
  Point() = default;

  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
    for (double v : coords_)
      if (!std::isfinite(v)) throw domain_error("point coordinate is not finite");
  }

  Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& values() const noexcept { return coords_; }
  std::span<const double> span() const noexcept { return coords_; }

  friend bool operator==(const Point&, const Point&) = default;
  friend bool operator<(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.coords_.begin(), a.coords_.end(),
                                        b.coords_.begin(), b.coords_.end());
  }

 private:
  std::vector<double> coords_;
};

inline double distance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) throw dimension_mismatch(a.dim(), b.dim());
  return vec::distance(a.span(), b.span());
}

enum class Label : int { negative = -1, positive = 1 };

/// sign(0) = +1.
constexpr Label sign_label(double v) noexcept {
  return v >= 0.0 ? Label::positive : Label::negative;
}
constexpr int sign_of(Label y) noexcept { return static_cast<int>(y); }
constexpr Label flip(Label y) noexcept {
  return y == Label::positive ? Label::negative : Label::positive;
}

/// External encoding is {0, 1}.
constexpr int to_binary(Label y) noexcept { return y == Label::positive ? 1 : 0; }
inline Label label_from_binary(long v) {
  if (v == 1) return Label::positive;
  if (v == 0) return Label::negative;
  throw domain_error("label must be 0 or 1, got " + std::to_string(v));
}

struct LabeledSample {
  Point point;
  Label label;
};

/// Finite multiset of labeled points sharing one dimension.
class Dataset {
 public:
  explicit Dataset(std::size_t dim) : dim_(dim) {}

  void add(Point x, Label y) {
    if (x.dim() != dim_) throw dimension_mismatch(dim_, x.dim());
    samples_.push_back({std::move(x), y});
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

 private:
  std::size_t dim_;
  std::vector<LabeledSample> samples_;
};

/// Base function f of an offset family x_{d+1} = f(x_{1..d}) + t, with a
/// declared Lipschitz constant used for distance bounds.
class BoundaryFunction {
 public:
  struct Constant {
    double value;
  };
  struct Affine {
    std::vector<double> slope;
    double intercept;
  };
  /// amplitude * sin(frequency * <direction, x> + phase)
  struct Sine {
    double amplitude;
    double frequency;
    std::vector<double> direction;
    double phase;
  };
  using Form = std::variant<Constant, Affine, Sine>;

  static BoundaryFunction constant(std::size_t input_dim, double value) {
    check_finite(value);
    return BoundaryFunction(input_dim, Constant{value}, 0.0);
  }

  static BoundaryFunction affine(std::vector<double> slope, double intercept) {
    for (double v : slope) check_finite(v);
    check_finite(intercept);
    const double lip = vec::norm(slope);
    const std::size_t n = slope.size();
    return BoundaryFunction(n, Affine{std::move(slope), intercept}, lip);
  }

  static BoundaryFunction sine(double amplitude, double frequency,
                               std::vector<double> direction, double phase) {
    check_finite(amplitude);
    check_finite(frequency);
    check_finite(phase);
    for (double v : direction) check_finite(v);
    const double lip = std::abs(amplitude) * std::abs(frequency) * vec::norm(direction);
    const std::size_t n = direction.size();
    return BoundaryFunction(n, Sine{amplitude, frequency, std::move(direction), phase}, lip);
  }

  std::size_t input_dim() const noexcept { return input_dim_; }
  double lipschitz() const noexcept { return lipschitz_; }
  const Form& form() const noexcept { return form_; }

  /// True when the distance bound derived from the Lipschitz constant is exact.
  bool is_affine() const noexcept { return !std::holds_alternative<Sine>(form_); }

  double operator()(std::span<const double> x) const {
    if (x.size() != input_dim_) throw dimension_mismatch(input_dim_, x.size());
    return std::visit(
        [&](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, Affine>) {
            return vec::dot(f.slope, x) + f.intercept;
          } else {
            return f.amplitude * std::sin(f.frequency * vec::dot(f.direction, x) + f.phase);
          }
        },
        form_);
  }

  std::vector<double> gradient(std::span<const double> x) const {
    if (x.size() != input_dim_) throw dimension_mismatch(input_dim_, x.size());
    return std::visit(
        [&](const auto& f) -> std::vector<double> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return std::vector<double>(input_dim_, 0.0);
          } else if constexpr (std::is_same_v<T, Affine>) {
            return f.slope;
          } else {
            const double c = f.amplitude * f.frequency *
                             std::cos(f.frequency * vec::dot(f.direction, x) + f.phase);
            return vec::scaled(f.direction, c);
          }
        },
        form_);
  }

 private:
  BoundaryFunction(std::size_t n, Form form, double lip)
      : input_dim_(n), form_(std::move(form)), lipschitz_(lip) {}

  static void check_finite(double v) {
    if (!std::isfinite(v)) throw domain_error("boundary function parameter is not finite");
  }

  std::size_t input_dim_;
  Form form_;
  double lipschitz_;
};

/// Predicts +1 iff x_1 >= t.
struct Threshold {
  double t;
};

/// Predicts +1 iff <w, x> >= 0. The normal is stored unit length.
class LinearHomogeneous {
 public:
  explicit LinearHomogeneous(std::vector<double> w) {
    for (double v : w)
      if (!std::isfinite(v)) throw domain_error("normal vector is not finite");
    const double n = vec::norm(w);
    if (w.empty() || n == 0.0) throw domain_error("normal vector must be nonzero");
    w_ = vec::scaled(w, 1.0 / n);
    for (double& v : w_) v += 0.0;  // no negative zeros in output
  }

  const std::vector<double>& w() const noexcept { return w_; }
  std::size_t dim() const noexcept { return w_.size(); }

 private:
  std::vector<double> w_;
};

/// Points live in R^{d+1}; predicts +1 iff x_{d+1} - f(x_{1..d}) >= offset.
struct OffsetBoundary {
  BoundaryFunction base;
  double offset;
};

using Hypothesis = std::variant<Threshold, LinearHomogeneous, OffsetBoundary>;

enum class ConceptClass { threshold, linear, offset };

inline std::string_view to_string(ConceptClass c) noexcept {
  switch (c) {
    case ConceptClass::threshold: return "threshold";
    case ConceptClass::linear: return "linear";
    case ConceptClass::offset: return "offset";
  }
  return "?";
}

/// A hypothesis class together with the data needed to instantiate members.
class HypothesisClass {
 public:
  static HypothesisClass thresholds() { return HypothesisClass(ConceptClass::threshold, 1, {}); }

  static HypothesisClass linear(std::size_t d) {
    if (d == 0) throw domain_error("linear class needs d >= 1");
    return HypothesisClass(ConceptClass::linear, d, {});
  }

  static HypothesisClass offsets(BoundaryFunction base) {
    const std::size_t d = base.input_dim() + 1;
    return HypothesisClass(ConceptClass::offset, d, std::move(base));
  }

  ConceptClass kind() const noexcept { return kind_; }
  /// Ambient dimension of the points.
  std::size_t dim() const noexcept { return dim_; }
  const BoundaryFunction& base() const {
    if (kind_ != ConceptClass::offset) throw domain_error("class has no base function");
    return *base_;
  }

  bool contains(const Hypothesis& h) const;

 private:
  HypothesisClass(ConceptClass k, std::size_t d, std::optional<BoundaryFunction> b)
      : kind_(k), dim_(d), base_(std::move(b)) {}

  ConceptClass kind_;
  std::size_t dim_;
  std::optional<BoundaryFunction> base_;
};

inline ConceptClass concept_class(const Hypothesis& h) noexcept {
  switch (h.index()) {
    case 0: return ConceptClass::threshold;
    case 1: return ConceptClass::linear;
    default: return ConceptClass::offset;
  }
}

inline std::size_t input_dimension(const Hypothesis& h) noexcept {
  if (const auto* lin = std::get_if<LinearHomogeneous>(&h)) return lin->dim();
  if (const auto* off = std::get_if<OffsetBoundary>(&h)) return off->base.input_dim() + 1;
  return 1;
}

inline bool HypothesisClass::contains(const Hypothesis& h) const {
  return concept_class(h) == kind_ && input_dimension(h) == dim_;
}

/// Signed score whose sign is the prediction; |score| is the Euclidean
/// distance to the boundary for thresholds and linear separators.
inline double decision_value(const Hypothesis& h, const Point& x) {
  const std::size_t d = input_dimension(h);
  if (x.dim() != d) throw dimension_mismatch(d, x.dim());
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Threshold>) {
          return x[0] - g.t;
        } else if constexpr (std::is_same_v<T, LinearHomogeneous>) {
          return vec::dot(g.w(), x.span());
        } else {
          return x[d - 1] - g.base(x.span().first(d - 1)) - g.offset;
        }
      },
      h);
}

inline Label predict(const Hypothesis& h, const Point& x) {
  return sign_label(decision_value(h, x));
}

inline double empirical_error(const Hypothesis& h, const Dataset& s) {
  if (s.empty()) throw domain_error("empirical error of an empty dataset");
  std::size_t wrong = 0;
  for (const auto& [x, y] : s) wrong += predict(h, x) != y;
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

inline double empirical_disagreement(const Hypothesis& a, const Hypothesis& b,
                                     std::span<const Point> xs) {
  if (xs.empty()) throw domain_error("empirical disagreement over no points");
  std::size_t diff = 0;
  for (const auto& x : xs) diff += predict(a, x) != predict(b, x);
  return static_cast<double>(diff) / static_cast<double>(xs.size());
}

/// Closed L2 ball of the given radius around every point.
struct MetricBall {
  double radius;

  explicit MetricBall(double r) : radius(r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw domain_error("ball radius must be finite and >= 0");
  }
};

/// Explicit perturbation sets U(x). Every listed x is a member of its own set.
class FiniteMap {
 public:
  void add(const Point& x, std::vector<Point> targets) {
    if (std::find(targets.begin(), targets.end(), x) == targets.end()) targets.push_back(x);
    for (const auto& z : targets)
      if (z.dim() != x.dim()) throw dimension_mismatch(x.dim(), z.dim());
    map_[x] = std::move(targets);
  }

  /// U(x); {x} when x is not listed.
  std::vector<Point> perturbations(const Point& x) const {
    const auto it = map_.find(x);
    if (it == map_.end()) return {x};
    return it->second;
  }

  /// All listed x with z in U(x), plus z itself.
  std::vector<Point> inverse(const Point& z) const {
    std::vector<Point> out{z};
    for (const auto& [x, us] : map_)
      if (x != z && std::find(us.begin(), us.end(), z) != us.end()) out.push_back(x);
    return out;
  }

  std::size_t size() const noexcept { return map_.size(); }

 private:
  std::map<Point, std::vector<Point>> map_;
};

using PerturbationModel = std::variant<MetricBall, FiniteMap>;

}  // namespace rrl
