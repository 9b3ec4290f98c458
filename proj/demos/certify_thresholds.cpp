// Fits thresholds on Gaussian data and prints certificates for a few points.

#include <cstdio>

#include "rrl/rrl.hpp"

int main() {
  using namespace rrl;
  const Hypothesis target = Threshold{0.0};
  const DistributionSpec data = IsotropicGaussian{1};

  Dataset s(1);
  for (const auto& x : sample(data, 7, 200)) s.add(x, predict(target, x));
  const VersionSpace vs = fit_version_space(s, HypothesisClass::thresholds());
  const auto& iv = std::get<Interval>(vs.shape());
  std::printf("consistent thresholds: (%.4f, %.4f]\n", iv.lo, iv.hi);

  for (double z : {-1.5, -0.2, 0.0, 0.3, 2.0}) {
    const Point p{z};
    std::printf("z=%5.2f", z);
    for (LossKind k : {LossKind::ca, LossKind::tl, LossKind::st}) {
      const auto c = certify(vs, p, k);
      if (c.abstained()) {
        std::printf("  %s: abstain", to_string(k).data());
      } else {
        std::printf("  %s: %+d r=%g", to_string(k).data(), sign_of(*c.prediction), c.radius);
      }
    }
    std::printf("\n");
  }

  const auto est = sr_mass(HypothesisClass::thresholds(), target, data, 200, 0.05, 0.05, LossKind::st, 20, 2000, 1);
  std::printf("safely-reliable mass (eta1 = eta2 = 0.05): %.4f [%.4f, %.4f]\n", est.mass, est.ci_low, est.ci_high);
}
