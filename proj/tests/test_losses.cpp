#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rrl/losses.hpp"
#include "rrl/rng.hpp"

using namespace rrl;

namespace {

LinearHomogeneous random_linear(CounterRng& rng, std::size_t d) {
  std::vector<double> w(d);
  for (double& v : w) v = rng.normal();
  return LinearHomogeneous(w);
}

Point random_point(CounterRng& rng, std::size_t d, double scale = 1.0) {
  std::vector<double> x(d);
  for (double& v : x) v = scale * rng.normal();
  return Point(x);
}

/// Fine sweep of the closed ball: boundary sphere plus interior shells.
int brute_sup_2d(LossKind kind, const Hypothesis& h, const Hypothesis& hs, const Point& x, double eta) {
  constexpr int kAngles = 4096;
  for (int shell = 0; shell <= 64; ++shell) {
    const double r = eta * shell / 64.0;
    for (int i = 0; i < kAngles; ++i) {
      const double a = 2 * std::numbers::pi * i / kAngles;
      const Point z{x[0] + r * std::cos(a), x[1] + r * std::sin(a)};
      if (fixed_loss(kind, h, hs, x, z)) return 1;
      if (shell == 0) break;
    }
  }
  return 0;
}

}  // namespace

TEST(FixedLoss, StAgreeingLabels) {
  const Hypothesis h = Threshold{0.0};
  EXPECT_EQ(fixed_loss(LossKind::st, h, h, Point{1.0}, Point{2.0}), 0);
}

TEST(FixedLoss, TlDisagreementAtZ) {
  // h(z) = -1, h*(z) = +1
  EXPECT_EQ(fixed_loss(LossKind::tl, Threshold{1.0}, Threshold{0.0}, Point{0.9}, Point{0.5}), 1);
}

TEST(FixedLoss, CaZeroWhenTrueLabelChanges) {
  // h*(z) != h*(x), so CA is 0 whatever h(z) is.
  for (double t : {-5.0, 0.0, 5.0})
    EXPECT_EQ(fixed_loss(LossKind::ca, Threshold{t}, Threshold{0.0}, Point{1.0}, Point{-1.0}), 0);
}

TEST(FixedLoss, MixedClassesRejected) {
  EXPECT_THROW(fixed_loss(LossKind::st, Threshold{0.0}, LinearHomogeneous({1.0}), Point{1.0}, Point{1.0}),
               domain_error);
}

TEST(FixedLoss, DominanceRelations) {
  CounterRng rng(1);
  for (int i = 0; i < 20000; ++i) {
    const auto h = random_linear(rng, 3);
    const auto hs = random_linear(rng, 3);
    const auto x = random_point(rng, 3);
    const auto z = random_point(rng, 3);
    const int ca = fixed_loss(LossKind::ca, h, hs, x, z);
    const int tl = fixed_loss(LossKind::tl, h, hs, x, z);
    const int st = fixed_loss(LossKind::st, h, hs, x, z);
    EXPECT_LE(ca, tl);
    if (ca) {
      EXPECT_EQ(st, 1);
    }
  }
}

TEST(LossKind, ParseRoundTrip) {
  for (auto k : {LossKind::ca, LossKind::tl, LossKind::st}) EXPECT_EQ(parse_loss_kind(to_string(k)), k);
  EXPECT_THROW(parse_loss_kind("xx"), domain_error);
}

TEST(RobustLossSup, StBallInsideSide) {
  const LinearHomogeneous hs({0, 1});
  const auto r = robust_loss_sup(LossKind::st, hs, hs, Point{0, 1}, MetricBall(0.5));
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(r.method, SupMethod::exact);
}

TEST(RobustLossSup, StBallCrossesBoundary) {
  const LinearHomogeneous hs({0, 1});
  EXPECT_EQ(robust_loss_sup(LossKind::st, hs, hs, Point{0, 1}, MetricBall(1.5)).value, 1);
}

TEST(RobustLossSup, TargetNeverLosesTl) {
  const LinearHomogeneous hs({0, 1});
  for (double eta : {0.0, 0.5, 1.5, 100.0}) {
    EXPECT_EQ(robust_loss_sup(LossKind::tl, hs, hs, Point{0, 1}, MetricBall(eta)).value, 0);
    EXPECT_EQ(robust_loss_sup(LossKind::ca, hs, hs, Point{0, 1}, MetricBall(eta)).value, 0);
  }
}

TEST(RobustLossSup, ClosedBallTie) {
  // Distance exactly eta: the closed ball touches the boundary, where the
  // label is +, so a negative point reaches a positive z.
  const Hypothesis hs = Threshold{0.0};
  EXPECT_EQ(robust_loss_sup(LossKind::st, hs, hs, Point{-0.5}, MetricBall(0.5)).value, 1);
  // A positive point needs to cross strictly below 0.
  EXPECT_EQ(robust_loss_sup(LossKind::st, hs, hs, Point{0.5}, MetricBall(0.5)).value, 0);
}

TEST(RobustLossSup, IdentityPerturbationCollapses) {
  CounterRng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const auto h = random_linear(rng, 2);
    const auto hs = random_linear(rng, 2);
    const auto x = random_point(rng, 2);
    const int base = predict(h, x) != predict(hs, x);
    for (auto k : {LossKind::ca, LossKind::tl, LossKind::st}) {
      EXPECT_EQ(robust_loss_sup(k, h, hs, x, MetricBall(0.0)).value, base);
      EXPECT_EQ(robust_loss_sup(k, h, hs, x, FiniteMap{}).value, base);
    }
  }
}

TEST(RobustLossSup, ExactMatchesDenseSweep) {
  CounterRng rng(4);
  int ones = 0;
  for (int i = 0; i < 300; ++i) {
    const auto h = random_linear(rng, 2);
    const auto hs = random_linear(rng, 2);
    const auto x = random_point(rng, 2);
    const double eta = 0.05 + rng.uniform();
    for (auto k : {LossKind::ca, LossKind::tl, LossKind::st}) {
      const int exact = robust_loss_sup(k, h, hs, x, MetricBall(eta)).value;
      const int brute = brute_sup_2d(k, h, hs, x, eta);
      // The sweep can miss slivers; it may never find a loss the exact path denies.
      EXPECT_LE(brute, exact);
      if (brute != exact) {
        // Confirm the miss is a sliver by widening the ball slightly.
        EXPECT_EQ(brute_sup_2d(k, h, hs, x, eta * 1.01), 1);
      }
      ones += exact;
    }
  }
  EXPECT_GT(ones, 100);
}

TEST(RobustLossSup, SampledNeverExceedsExact) {
  CounterRng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto hs = random_linear(rng, 2);
    const auto h = random_linear(rng, 2);
    const auto x = random_point(rng, 2);
    const double eta = rng.uniform();
    for (auto k : {LossKind::ca, LossKind::tl, LossKind::st}) {
      const int exact = robust_loss_sup(k, h, hs, x, MetricBall(eta)).value;
      // Same decision rule expressed as an offset boundary forces sampling.
      // x2 >= -(u0/u1) x1 is the same half-plane when u1 > 0.
      const auto& w = hs.w();
      const auto& v = h.w();
      if (w[1] < 0.1 || v[1] < 0.1) continue;
      const auto off = [](const std::vector<double>& u) -> Hypothesis {
        return OffsetBoundary{BoundaryFunction::affine({-u[0] / u[1]}, 0.0), 0.0};
      };
      const auto r = robust_loss_sup(k, off(v), off(w), x, MetricBall(eta), {256, 9, true});
      EXPECT_EQ(r.method, SupMethod::sampled_lower_bound);
      EXPECT_LE(r.value, exact);
      EXPECT_GT(r.evaluated, 0u);
    }
  }
}

TEST(RobustLossSup, SamplingCanBeDisabled) {
  const Hypothesis h = OffsetBoundary{BoundaryFunction::sine(0.1, 3, {1.0}, 0), 0.0};
  EXPECT_THROW(robust_loss_sup(LossKind::st, h, h, Point{0.5, 0.5}, MetricBall(0.1), {16, 0, false}), unsupported);
}

TEST(RobustLossSup, FiniteMapEnumerates) {
  FiniteMap u;
  const Point x{0.5};
  u.add(x, {Point{0.2}, Point{0.8}});
  const auto r = robust_loss_sup(LossKind::st, Threshold{0.3}, Threshold{0.3}, x, u);
  EXPECT_EQ(r.value, 1);
  EXPECT_EQ(r.method, SupMethod::enumerated);
  const auto r2 = robust_loss_sup(LossKind::tl, Threshold{0.3}, Threshold{0.3}, x, u);
  EXPECT_EQ(r2.value, 0);
  EXPECT_EQ(r2.evaluated, 3u);
}

TEST(MinLinearOverBallHalfspace, MatchesSweep) {
  CounterRng rng(8);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> c{rng.normal(), rng.normal()};
    const std::vector<double> n{rng.normal(), rng.normal()};
    const std::vector<double> x{rng.normal(), rng.normal()};
    const double beta = rng.normal();
    const double b = rng.normal();
    const double eta = 0.1 + rng.uniform();
    const double got = min_linear_over_ball_halfspace(c, beta, x, eta, n, b);
    double best = INFINITY;
    for (int shell = 0; shell <= 200; ++shell) {
      const double r = eta * shell / 200.0;
      for (int k = 0; k < 720; ++k) {
        const double a = 2 * std::numbers::pi * k / 720;
        const double z0 = x[0] + r * std::cos(a), z1 = x[1] + r * std::sin(a);
        if (n[0] * z0 + n[1] * z1 + b < 0) continue;
        best = std::min(best, c[0] * z0 + c[1] * z1 + beta);
      }
    }
    if (std::isinf(best)) {
      // Feasible set is at most a sliver the sweep missed.
      if (!std::isinf(got)) {
        const double fx = n[0] * x[0] + n[1] * x[1] + b;
        EXPECT_GT(fx + eta * std::hypot(n[0], n[1]), -1e-12);
        EXPECT_LT(fx + eta * std::hypot(n[0], n[1]), 0.05);
      }
      continue;
    }
    EXPECT_LE(got, best + 1e-9);
    EXPECT_GE(got, best - 0.02 * (1 + std::hypot(c[0], c[1])));
  }
}
