#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rrl/cone.hpp"
#include "rrl/lp.hpp"
#include "rrl/rng.hpp"
#include "rrl/vec.hpp"

using namespace rrl;

namespace {

using Rows = std::vector<std::vector<double>>;

/// max c.w over {Gw <= h, |w_j| <= 1} in 2-D by enumerating constraint pairs.
double brute_max_2d(const std::vector<double>& c, Rows g, std::vector<double> h) {
  g.push_back({1, 0});
  g.push_back({-1, 0});
  g.push_back({0, 1});
  g.push_back({0, -1});
  h.insert(h.end(), {1, 1, 1, 1});
  double best = -INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double det = g[i][0] * g[j][1] - g[i][1] * g[j][0];
      if (std::abs(det) < 1e-12) continue;
      const double x = (h[i] * g[j][1] - g[i][1] * h[j]) / det;
      const double y = (g[i][0] * h[j] - h[i] * g[j][0]) / det;
      bool ok = true;
      for (std::size_t k = 0; k < g.size() && ok; ++k) ok = g[k][0] * x + g[k][1] * y <= h[k] + 1e-9;
      if (ok) best = std::max(best, c[0] * x + c[1] * y);
    }
  }
  return best;
}

}  // namespace

TEST(Simplex, SmallStandardForm) {
  // min -x - y  s.t.  x + 2y + s1 = 4, 3x + y + s2 = 6
  Eigen::MatrixXd a(2, 4);
  a << 1, 2, 1, 0, 3, 1, 0, 1;
  Eigen::VectorXd b(2);
  b << 4, 6;
  Eigen::VectorXd c(4);
  c << -1, -1, 0, 0;
  const auto r = lp::solve_standard(a, b, c);
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_NEAR(r.value, -2.8, 1e-12);
  EXPECT_NEAR(r.x[0], 1.6, 1e-12);
  EXPECT_NEAR(r.x[1], 1.2, 1e-12);
}

TEST(Simplex, Infeasible) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 2;
  Eigen::VectorXd c(2);
  c << 0, 0;
  EXPECT_EQ(lp::solve_standard(a, b, c).status, lp::Status::infeasible);
}

TEST(Simplex, Unbounded) {
  Eigen::MatrixXd a(1, 2);
  a << 1, -1;
  Eigen::VectorXd b(1);
  b << 0;
  Eigen::VectorXd c(2);
  c << -1, 0;
  EXPECT_EQ(lp::solve_standard(a, b, c).status, lp::Status::unbounded);
}

TEST(Simplex, DegenerateRedundantRows) {
  Eigen::MatrixXd a(3, 3);
  a << 1, 1, 1, 2, 2, 2, 1, 0, 0;
  Eigen::VectorXd b(3);
  b << 1, 2, 0;
  Eigen::VectorXd c(3);
  c << 0, -1, -2;
  const auto r = lp::solve_standard(a, b, c);
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_NEAR(r.value, -2.0, 1e-12);
}

TEST(MaximizeBoxed, MatchesVertexEnumeration2d) {
  CounterRng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = rng.below(6);
    Rows g;
    std::vector<double> h;
    for (std::size_t i = 0; i < k; ++i) {
      g.push_back({rng.normal(), rng.normal()});
      h.push_back(trial % 2 ? 0.0 : rng.uniform());
    }
    const std::vector<double> c{rng.normal(), rng.normal()};
    const auto r = lp::maximize_boxed(c, g, h, std::vector<double>{1, 1});
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.value, brute_max_2d(c, g, h), 1e-9);
    EXPECT_NEAR(vec::dot(c, r.x), r.value, 1e-9);
    for (std::size_t i = 0; i < k; ++i) EXPECT_LE(vec::dot(g[i], r.x), h[i] + 1e-9);
  }
}

TEST(MaximizeBoxed, InfeasibleSystem) {
  const Rows g{{1, 0}, {-1, 0}};
  const std::vector<double> h{-1, -1};
  const auto r = lp::maximize_boxed(std::vector<double>{1, 0}, g, h, std::vector<double>{5, 5});
  EXPECT_EQ(r.status, lp::Status::infeasible);
}

TEST(ExtremeRays, Orthant) {
  const Rows a{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto e = cone::extreme_rays(a, 3);
  ASSERT_TRUE(e.pointed);
  ASSERT_EQ(e.rays.size(), 3u);
  for (const auto& r : e.rays) {
    EXPECT_NEAR(vec::norm(r), 1.0, 1e-12);
    EXPECT_NEAR(*std::max_element(r.begin(), r.end()), 1.0, 1e-12);
  }
}

TEST(ExtremeRays, RankDeficientIsNotPointed) {
  const Rows a{{1, 0, 0}, {0, 1, 0}};
  EXPECT_FALSE(cone::extreme_rays(a, 3).pointed);
}

TEST(ExtremeRays, SquarePyramid) {
  // w3 >= |w1|, w3 >= |w2|: four extreme rays (+-1, +-1, 1).
  const Rows a{{1, 0, 1}, {-1, 0, 1}, {0, 1, 1}, {0, -1, 1}};
  const auto e = cone::extreme_rays(a, 3);
  ASSERT_TRUE(e.pointed);
  ASSERT_EQ(e.rays.size(), 4u);
  for (const auto& r : e.rays) {
    EXPECT_NEAR(std::abs(r[0]), 1 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(std::abs(r[1]), 1 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(r[2], 1 / std::sqrt(3.0), 1e-12);
  }
}

// Rays lie in the cone, and a direction z has positive support over the cone
// exactly when some ray has a positive inner product with z.
TEST(ExtremeRays, GenerateTheCone) {
  CounterRng rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t d = 2 + rng.below(4);
    std::vector<double> center(d);
    for (double& v : center) v = rng.normal();
    center = vec::normalized(center);
    Rows a;
    const std::size_t k = d + rng.below(12);
    while (a.size() < k) {
      std::vector<double> x(d);
      for (double& v : x) v = rng.normal();
      if (vec::dot(x, center) < 0) x = vec::scaled(x, -1.0);
      a.push_back(x);
    }
    const auto e = cone::extreme_rays(a, d);
    ASSERT_TRUE(e.pointed);
    ASSERT_GE(e.rays.size(), d);
    for (const auto& r : e.rays)
      for (const auto& row : a) EXPECT_GE(vec::dot(row, r), -1e-9);

    Rows g;
    for (const auto& row : a) g.push_back(vec::scaled(row, -1.0));
    const std::vector<double> h(g.size(), 0.0), box(d, 1.0);
    for (int q = 0; q < 20; ++q) {
      std::vector<double> z(d);
      for (double& v : z) v = rng.normal();
      const auto r = lp::maximize_boxed(z, g, h, box);
      ASSERT_EQ(r.status, lp::Status::optimal);
      double best = -INFINITY;
      for (const auto& ray : e.rays) best = std::max(best, vec::dot(ray, z));
      if (std::abs(best) < 1e-7 || std::abs(r.value) < 1e-7) continue;
      EXPECT_EQ(best > 0, r.value > 0);
    }
  }
}

TEST(ExtremeRays, PlanarArcEndpoints) {
  // Constraints from two points at +-30 degrees off the y axis.
  const double a = std::numbers::pi / 6;
  const Rows rows{{std::sin(a), std::cos(a)}, {-std::sin(a), std::cos(a)}};
  const auto e = cone::extreme_rays(rows, 2);
  ASSERT_TRUE(e.pointed);
  ASSERT_EQ(e.rays.size(), 2u);
  std::vector<double> angles;
  for (const auto& r : e.rays) angles.push_back(std::atan2(r[1], r[0]));
  std::sort(angles.begin(), angles.end());
  EXPECT_NEAR(angles[0], a, 1e-12);
  EXPECT_NEAR(angles[1], std::numbers::pi - a, 1e-12);
}
