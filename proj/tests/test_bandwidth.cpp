#include <gtest/gtest.h>

#include "dekernel/bandwidth.hpp"
#include "oracles.hpp"

using dekernel::DesignDensity;
using dekernel::ErrorCode;
using dekernel::KernelSpec;
using dekernel::NoiseSpec;
using dekernel::QuasiExpModel;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const dekernel::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected dekernel::Error";
  return ErrorCode::ParseError;
}

const QuasiExpModel kWorked(0.5, 1.0, 1.0);
const DesignDensity kUnit = DesignDensity::uniform(0.0, 4.0);

}  // namespace

TEST(Bandwidth, WorkedBias) {
  EXPECT_NEAR(dekernel::asymptotic_bias(kWorked, 2.0, 1, 0.2, KernelSpec(), kUnit), 0.002, 1e-15);
  // alpha = 0.5 gives g''' = 0, so the degree-2 bias vanishes.
  EXPECT_EQ(dekernel::asymptotic_bias(kWorked, 2.0, 2, 0.2, KernelSpec(), kUnit), 0.0);
}

TEST(Bandwidth, WorkedVariance) {
  EXPECT_NEAR(dekernel::asymptotic_variance(NoiseSpec(0.1), 1000, 0.2, KernelSpec(), kUnit, 2.0), 1.2e-4, 1e-18);
}

TEST(Bandwidth, WorkedOptimalBandwidth) {
  const double h = dekernel::optimal_bandwidth_direct(kWorked, 2.0, 1, 1000, NoiseSpec(0.1), KernelSpec(), kUnit);
  EXPECT_NEAR(std::pow(h, 5), 0.0024, 1e-15);
  EXPECT_NEAR(h, 0.2993, 5e-5);
}

TEST(Bandwidth, FirstOrderConditionAtOptimum) {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    const QuasiExpModel m(gen.uniform(0.05, 1.0), gen.uniform(0.2, 2.0), gen.uniform(0.5, 2.0));
    const int k = 2 * gen.integer(0, 2) + 1;
    if (dekernel::detail::pi_vanishes(m.alpha(), k + 1)) continue;
    const long n = gen.integer(100, 10000);
    const NoiseSpec noise(gen.uniform(0.01, 1.0));
    const double x = gen.uniform(0.5, 3.5);
    const double h = dekernel::optimal_bandwidth_direct(m, x, k, n, noise, KernelSpec(), kUnit);
    const double b = dekernel::asymptotic_bias(m, x, k, h, KernelSpec(), kUnit);
    const double v = dekernel::asymptotic_variance(noise, n, h, KernelSpec(), kUnit, x);
    EXPECT_NEAR((2.0 * k + 2.0) * b * b / v, 1.0, 1e-10);
  }
}

TEST(Bandwidth, OptimumMinimizesAmse) {
  oracle::Gen gen(13);
  for (int trial = 0; trial < 60; ++trial) {
    const QuasiExpModel m(gen.uniform(0.6, 1.0), gen.uniform(0.2, 2.0), 1.0);
    const int k = gen.integer(0, 3);
    const double x = gen.uniform(0.5, 3.5);
    const auto density = DesignDensity::tabulated({0.0, 4.0}, {0.15, 0.35});
    const NoiseSpec noise(0.2);
    double h = 0.0;
    try {
      h = dekernel::optimal_bandwidth_direct(m, x, k, 500, noise, KernelSpec(), density);
    } catch (const dekernel::Error&) {
      continue;
    }
    auto amse = [&](double t) {
      const double b = dekernel::asymptotic_bias(m, x, k, t, KernelSpec(), density);
      return b * b + dekernel::asymptotic_variance(noise, 500, t, KernelSpec(), density, x);
    };
    EXPECT_LT(amse(h), amse(h * 1.01));
    EXPECT_LT(amse(h), amse(h * 0.99));
  }
}

TEST(Bandwidth, DegenerateCases) {
  // pi_{0.5, 3} = 0: the k = 2 optimum diverges.
  EXPECT_EQ(code_of([] {
              dekernel::optimal_bandwidth_direct(kWorked, 2.0, 2, 1000, NoiseSpec(0.1), KernelSpec(), kUnit);
            }),
            ErrorCode::DegenerateBias);
  // The step from k = 1 at alpha = 0.5 involves (2 alpha - 1) = 0.
  EXPECT_EQ(code_of([] { dekernel::optimal_bandwidth_step(kWorked, 2.0, 1, 0.3, kUnit); }), ErrorCode::DegenerateBias);
  EXPECT_EQ(code_of([] { dekernel::asymptotic_bias(kWorked, 2.0, 7, 0.2, KernelSpec(), kUnit); }),
            ErrorCode::DegreeOutOfRange);
  EXPECT_EQ(code_of([] { dekernel::asymptotic_variance(NoiseSpec(0.1), 1000, 0.0, KernelSpec(), kUnit, 2.0); }),
            ErrorCode::NonPositiveBandwidth);
  EXPECT_EQ(code_of([] { dekernel::optimal_bandwidth_step(kWorked, 2.0, 5, 0.3, kUnit); }),
            ErrorCode::DegreeOutOfRange);
}

TEST(Bandwidth, StepRegressionValue) {
  // alpha = 0.8, lambda = 1, g0 = 1, x = 2, k = 1, h_k = 0.3:
  // g = 1.4^5, common = (0.6 * 0.4)^2 g^(-0.8), h^9 = 8 h^5 / common.
  const QuasiExpModel m(0.8, 1.0, 1.0);
  const double g = std::pow(1.4, 5);
  const double common = 0.24 * 0.24 * std::pow(g, -0.8);
  const double expected = std::pow(8.0 * std::pow(0.3, 5) / common, 1.0 / 9.0);
  EXPECT_NEAR(dekernel::optimal_bandwidth_step(m, 2.0, 1, 0.3, kUnit), expected, 1e-14);
  EXPECT_GT(expected, 0.0);
}

TEST(Bandwidth, DirectOptimaSatisfyDerivedRecursion) {
  // Dividing the direct optima at degrees k + 2 and k gives
  // h_{k+2}^{2k+7} = (k+3)(k+2)^2(k+1) mu_{k+1}^2 / mu_{k+3}^2 / common * h_k^{2k+3}.
  for (double alpha : {0.3, 0.7, 0.8, 1.0}) {
    const QuasiExpModel m(alpha, 0.9, 1.0);
    for (int k : {1, 3}) {
      const auto kern = KernelSpec();
      const double x = 2.0;
      const double g = dekernel::solution(m, x);
      const double c1 = (k + 1) * alpha - k, c2 = (k + 2) * alpha - (k + 1);
      if (std::abs(c1 * c2) < 1e-9 || dekernel::detail::pi_vanishes(alpha, k + 1)) continue;
      const double common = std::pow(0.9, 4) * c1 * c1 * c2 * c2 * std::pow(g, 4 * alpha - 4);
      const double hk = dekernel::optimal_bandwidth_direct(m, x, k, 800, NoiseSpec(0.1), kern, kUnit);
      const double mu_ratio = kern.moment(k + 1) / kern.moment(k + 3);
      const double derived = std::pow((k + 3.0) * (k + 2.0) * (k + 2.0) * (k + 1.0) * mu_ratio * mu_ratio / common *
                                          std::pow(hk, 2 * k + 3),
                                      1.0 / (2 * k + 7));
      const double direct = dekernel::optimal_bandwidth_direct(m, x, k + 2, 800, NoiseSpec(0.1), kern, kUnit);
      EXPECT_NEAR(derived / direct, 1.0, 1e-12) << "alpha=" << alpha << " k=" << k;
    }
  }
}

TEST(Bandwidth, AuditFlagsVerbatimRecursion) {
  const QuasiExpModel m(0.8, 1.0, 1.0);
  const auto kern = KernelSpec();
  const auto audit = dekernel::audit_bandwidth_step(m, 2.0, 1, 1000, NoiseSpec(0.1), kern, kUnit);
  EXPECT_GT(audit.h_step, 0.0);
  EXPECT_GT(audit.h_direct_k2, 0.0);
  EXPECT_TRUE(std::isfinite(audit.ratio));
  EXPECT_TRUE(audit.discrepancy);
  // The verbatim recursion lacks (k+2)^2 mu_{k+1}^2 / mu_{k+3}^2 inside the root.
  const double missing = 9.0 * std::pow(kern.moment(2) / kern.moment(4), 2);
  EXPECT_NEAR(audit.ratio, std::pow(1.0 / missing, 1.0 / 9.0), 1e-12);
}

TEST(Bandwidth, TabulatedDensity) {
  const auto d = DesignDensity::tabulated({0.0, 1.0, 3.0}, {0.2, 0.4, 0.4});
  EXPECT_NEAR(d.value_at(0.5), 0.3, 1e-15);
  EXPECT_NEAR(d.derivative_at(0.5), 0.2, 1e-15);
  EXPECT_NEAR(d.derivative_at(2.0), 0.0, 1e-15);
  EXPECT_EQ(code_of([&] { d.value_at(3.5); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { DesignDensity::tabulated({0.0, 0.0}, {1.0, 1.0}); }), ErrorCode::ConfigInvalid);
}

TEST(Loocv, ScoreMatchesBruteForceOracle) {
  oracle::Gen gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen.integer(15, 30);
    std::vector<double> x(n), z(n);
    for (int i = 0; i < n; ++i) {
      x[i] = 3.0 * i / (n - 1);
      z[i] = std::exp(0.5 * x[i]) + gen.normal(0.1);
    }
    const int degree = gen.integer(0, 2);
    const double h = gen.uniform(0.6, 1.5);
    const auto est = dekernel::Estimator::local_poly(degree);
    const KernelSpec k;
    long double ref = 0.0L;
    for (int i = 0; i < n; ++i) {
      std::vector<double> xs, zs;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        xs.push_back(x[j]);
        zs.push_back(z[j]);
      }
      const long double fit =
          oracle::weighted_poly_intercept(xs, zs, x[i], degree, [&](double u) { return k.scaled_weight(h, u); });
      ref += (z[i] - fit) * (z[i] - fit);
    }
    ref /= n;
    EXPECT_NEAR(dekernel::loocv_score(x, z, est, h), static_cast<double>(ref), 1e-10);
  }
}

TEST(Loocv, PicksGridMinimumAndSkipsInfeasible) {
  std::vector<double> x, z;
  oracle::Gen gen(5);
  for (int i = 0; i < 30; ++i) {
    x.push_back(0.1 * i);
    z.push_back(std::sin(2.0 * x.back()) + gen.normal(0.1));
  }
  const auto est = dekernel::Estimator::local_poly(1);
  const std::vector<double> grid = {2.0, 0.05, 0.3, 0.6, 1.0};
  const auto res = dekernel::loocv_bandwidth(x, z, est, grid);
  ASSERT_EQ(res.grid.size(), 5u);
  EXPECT_TRUE(std::is_sorted(res.grid.begin(), res.grid.end()));
  EXPECT_TRUE(std::isnan(res.scores[0]));  // h = 0.05 leaves single-point windows
  double best = std::numeric_limits<double>::infinity();
  for (double s : res.scores) {
    if (std::isfinite(s)) best = std::min(best, s);
  }
  EXPECT_EQ(res.score, best);
  EXPECT_EQ(code_of([&] { dekernel::loocv_bandwidth(x, z, est, std::vector<double>{0.01, 0.02}); }),
            ErrorCode::AllBandwidthsInfeasible);
  EXPECT_EQ(code_of([&] { dekernel::loocv_bandwidth(x, z, est, std::vector<double>{}); }),
            ErrorCode::AllBandwidthsInfeasible);
}

TEST(Bandwidth, StepAtExponentialUnitState) {
  // alpha = 1, lambda = 1, g = 1: every bracketed factor equals one.
  const QuasiExpModel m(1.0, 1.0, 1.0);
  for (int k : {1, 3}) {
    const double h = 0.4;
    const double expected = std::pow((k + 3.0) * (k + 1.0), 1.0 / (2 * k + 7)) * std::pow(h, (2.0 * k + 3) / (2 * k + 7));
    EXPECT_NEAR(dekernel::optimal_bandwidth_step(m, 0.0, k, h, kUnit), expected, 1e-14) << "k=" << k;
  }
}
