#pragma once

// Text formats: dataset and point CSV, certificate / distribution / hypothesis
// JSON, estimate CSV rows. Requires nlohmann/json.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "core.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "reliability.hpp"

namespace rrl::io {

using json = nlohmann::json;

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw parse_error(line, "not a number: '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw parse_error(line, "non-finite value");
  return v;
}

inline bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;  // (line, values)
};

inline Table read_table(std::istream& in) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const auto cells = split(line);
    if (!have_header) {
      for (auto c : cells) t.header.emplace_back(c);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw parse_error(lineno, "expected " + std::to_string(t.header.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (auto c : cells) vals.push_back(parse_double(c, lineno));
    t.rows.emplace_back(lineno, std::move(vals));
  }
  if (!have_header) throw parse_error(lineno, "missing header");
  return t;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw error("cannot open '" + path + "'");
  return f;
}

}  // namespace detail

/// Dataset CSV: header x1,...,xd,label with labels in {0, 1}. Lines starting
/// with '#' are ignored.
inline Dataset read_dataset(std::istream& in) {
  const auto t = detail::read_table(in);
  if (t.header.size() < 2 || t.header.back() != "label")
    throw parse_error(1, "header must be x1,...,xd,label");
  const std::size_t d = t.header.size() - 1;
  Dataset s(d);
  for (const auto& [lineno, vals] : t.rows) {
    const double lab = vals.back();
    if (lab != 0.0 && lab != 1.0) throw parse_error(lineno, "label must be 0 or 1");
    s.add(Point(std::vector<double>(vals.begin(), vals.end() - 1)), lab == 1.0 ? Label::positive : Label::negative);
  }
  return s;
}

inline Dataset load_dataset(const std::string& path) {
  auto f = detail::open_in(path);
  return read_dataset(f);
}

inline std::string csv_header(std::size_t d, bool with_label) {
  std::string h;
  for (std::size_t i = 1; i <= d; ++i) h += (i > 1 ? ",x" : "x") + std::to_string(i);
  if (with_label) h += ",label";
  return h;
}

inline void write_dataset(std::ostream& out, const Dataset& s) {
  out << csv_header(s.dim(), true) << '\n';
  for (const auto& [x, y] : s) {
    for (std::size_t i = 0; i < x.dim(); ++i) out << format_double(x[i]) << ',';
    out << to_binary(y) << '\n';
  }
}

/// Point CSV: header x1,...,xd; a trailing label column is accepted and ignored.
inline std::vector<Point> read_points(std::istream& in) {
  const auto t = detail::read_table(in);
  std::size_t d = t.header.size();
  if (!t.header.empty() && t.header.back() == "label") --d;
  if (d == 0) throw parse_error(1, "header must be x1,...,xd");
  std::vector<Point> pts;
  pts.reserve(t.rows.size());
  for (const auto& [lineno, vals] : t.rows) pts.emplace_back(std::vector<double>(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(d)));
  return pts;
}

inline std::vector<Point> load_points(const std::string& path) {
  auto f = detail::open_in(path);
  return read_points(f);
}

inline void write_points(std::ostream& out, const std::vector<Point>& pts, std::size_t d) {
  out << csv_header(d, false) << '\n';
  for (const auto& x : pts) {
    for (std::size_t i = 0; i < x.dim(); ++i) out << (i ? "," : "") << format_double(x[i]);
    out << '\n';
  }
}

inline json radius_json(double r) {
  if (std::isinf(r)) return "inf";
  return r;
}

inline json certificate_json(const Point& z, const ReliabilityCertificate& c, std::uint64_t seed) {
  json j;
  j["point"] = z.values();
  if (c.prediction) {
    j["prediction"] = to_binary(*c.prediction);
  } else {
    j["prediction"] = "abstain";
  }
  j["radius"] = radius_json(c.radius);
  j["loss"] = std::string(to_string(c.loss));
  j["method"] = std::string(to_string(c.method));
  j["seed"] = seed;
  return j;
}

inline json distribution_json(const DistributionSpec& spec) {
  return std::visit(
      [&](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        json j;
        j["kind"] = std::string(spec.kind());
        if constexpr (std::is_same_v<T, MeanShift>) {
          j["mu"] = s.mu;
          j["base"] = distribution_json(*s.base);
        } else {
          j["d"] = s.d;
          if constexpr (std::is_same_v<T, UniformCube>) {
            j["lo"] = s.lo;
            j["hi"] = s.hi;
          } else if constexpr (std::is_same_v<T, NearlyUniform>) {
            j["a"] = s.a;
            j["b"] = s.b;
            j["tilt"] = s.tilt == Tilt::linear ? "linear" : "cosine";
          } else if constexpr (std::is_same_v<T, RadialHeavyTail>) {
            j["s"] = s.s;
          } else if constexpr (std::is_same_v<T, UniformSphere>) {
            j["radius"] = s.radius;
          }
        }
        return j;
      },
      spec.variant());
}

namespace detail {

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw error(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw error(std::string("bad field '") + key + "': " + e.what());
  }
}

template <class T>
T get_field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get_field<T>(j, key) : fallback;
}

}  // namespace detail

inline DistributionSpec distribution_from_json(const json& j) {
  const auto kind = detail::get_field<std::string>(j, "kind");
  if (kind == "mean_shift") {
    return DistributionSpec::mean_shift(distribution_from_json(j.at("base")),
                                        detail::get_field<std::vector<double>>(j, "mu"));
  }
  const auto d = detail::get_field<std::size_t>(j, "d");
  if (kind == "gaussian") return IsotropicGaussian{d};
  if (kind == "uniform_ball") return UniformBall{d};
  if (kind == "uniform_cube")
    return UniformCube{d, detail::get_field_or(j, "lo", 0.0), detail::get_field_or(j, "hi", 1.0)};
  if (kind == "nearly_uniform") {
    const auto tilt = detail::get_field_or<std::string>(j, "tilt", "linear");
    if (tilt != "linear" && tilt != "cosine") throw error("unknown tilt '" + tilt + "'");
    return NearlyUniform{d, detail::get_field<double>(j, "a"), detail::get_field<double>(j, "b"),
                         tilt == "linear" ? Tilt::linear : Tilt::cosine};
  }
  if (kind == "radial_heavy_tail") return RadialHeavyTail{d, detail::get_field<double>(j, "s")};
  if (kind == "uniform_sphere") return UniformSphere{d, detail::get_field_or(j, "radius", 1.0)};
  throw error("unknown distribution kind '" + kind + "'");
}

inline json boundary_json(const BoundaryFunction& f) {
  return std::visit(
      [&](const auto& g) -> json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, BoundaryFunction::Constant>) {
          return {{"kind", "constant"}, {"d", f.input_dim()}, {"value", g.value}};
        } else if constexpr (std::is_same_v<T, BoundaryFunction::Affine>) {
          return {{"kind", "affine"}, {"slope", g.slope}, {"intercept", g.intercept}};
        } else {
          return {{"kind", "sine"},
                  {"amplitude", g.amplitude},
                  {"frequency", g.frequency},
                  {"direction", g.direction},
                  {"phase", g.phase}};
        }
      },
      f.form());
}

inline BoundaryFunction boundary_from_json(const json& j) {
  const auto kind = detail::get_field<std::string>(j, "kind");
  if (kind == "constant")
    return BoundaryFunction::constant(detail::get_field<std::size_t>(j, "d"), detail::get_field_or(j, "value", 0.0));
  if (kind == "affine")
    return BoundaryFunction::affine(detail::get_field<std::vector<double>>(j, "slope"),
                                    detail::get_field_or(j, "intercept", 0.0));
  if (kind == "sine")
    return BoundaryFunction::sine(detail::get_field<double>(j, "amplitude"), detail::get_field<double>(j, "frequency"),
                                  detail::get_field<std::vector<double>>(j, "direction"),
                                  detail::get_field_or(j, "phase", 0.0));
  throw error("unknown boundary function kind '" + kind + "'");
}

inline json class_json(const HypothesisClass& c) {
  json j{{"kind", std::string(to_string(c.kind()))}};
  if (c.kind() == ConceptClass::linear) j["d"] = c.dim();
  if (c.kind() == ConceptClass::offset) j["base"] = boundary_json(c.base());
  return j;
}

inline HypothesisClass class_from_json(const json& j) {
  const auto kind = detail::get_field<std::string>(j, "kind");
  if (kind == "threshold") return HypothesisClass::thresholds();
  if (kind == "linear") return HypothesisClass::linear(detail::get_field<std::size_t>(j, "d"));
  if (kind == "offset") return HypothesisClass::offsets(boundary_from_json(j.at("base")));
  throw error("unknown class kind '" + kind + "'");
}

inline json hypothesis_json(const Hypothesis& h) {
  return std::visit(
      [](const auto& g) -> json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Threshold>) {
          return {{"kind", "threshold"}, {"t", g.t}};
        } else if constexpr (std::is_same_v<T, LinearHomogeneous>) {
          return {{"kind", "linear"}, {"w", g.w()}};
        } else {
          return {{"kind", "offset"}, {"offset", g.offset}, {"base", boundary_json(g.base)}};
        }
      },
      h);
}

inline Hypothesis hypothesis_from_json(const json& j) {
  const auto kind = detail::get_field<std::string>(j, "kind");
  if (kind == "threshold") return Threshold{detail::get_field<double>(j, "t")};
  if (kind == "linear") return LinearHomogeneous(detail::get_field<std::vector<double>>(j, "w"));
  if (kind == "offset")
    return OffsetBoundary{boundary_from_json(j.at("base")), detail::get_field_or(j, "offset", 0.0)};
  throw error("unknown hypothesis kind '" + kind + "'");
}

inline constexpr std::string_view kEstimateHeader = "quantity,class,loss,eta1,eta2,m,d,trials,n,mass,ci_low,ci_high,seed";

struct EstimateRow {
  std::string quantity;
  std::string cls;
  std::string loss;
  double eta1 = 0.0;
  double eta2 = 0.0;
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t trials = 0;
  RegionEstimate estimate;
};

inline std::string format_row(const EstimateRow& r) {
  std::ostringstream o;
  o << r.quantity << ',' << r.cls << ',' << r.loss << ',' << format_double(r.eta1) << ',' << format_double(r.eta2)
    << ',' << r.m << ',' << r.d << ',' << r.trials << ',' << r.estimate.n << ',' << format_double(r.estimate.mass)
    << ',' << format_double(r.estimate.ci_low) << ',' << format_double(r.estimate.ci_high) << ','
    << r.estimate.seed;
  return o.str();
}

}  // namespace rrl::io
