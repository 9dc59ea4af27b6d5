#include <gtest/gtest.h>

#include "dekernel/growth_model.hpp"
#include "oracles.hpp"

using dekernel::ErrorCode;
using dekernel::QuasiExpModel;
using dekernel::Scale;

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

}  // namespace

TEST(GrowthModel, RejectsInvalidParameters) {
  EXPECT_EQ(code_of([] { QuasiExpModel(0.0, 1.0); }), ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { QuasiExpModel(1.2, 1.0); }), ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { QuasiExpModel(0.5, 0.0); }), ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { QuasiExpModel(0.5, 1.0, 0.0); }), ErrorCode::InvalidModel);
  EXPECT_EQ(code_of([] { QuasiExpModel(0.5, 1.0, -2.0); }), ErrorCode::InvalidModel);
  EXPECT_NO_THROW(QuasiExpModel(1.0, -0.3, 2.0));
}

TEST(GrowthModel, PiProduct) {
  EXPECT_DOUBLE_EQ(dekernel::pi_product(0.5, 1), 1.0);
  EXPECT_DOUBLE_EQ(dekernel::pi_product(0.5, 2), 0.5);
  EXPECT_DOUBLE_EQ(dekernel::pi_product(0.5, 3), 0.0);
  EXPECT_DOUBLE_EQ(dekernel::pi_product(1.0, 4), 1.0);
  EXPECT_NEAR(dekernel::pi_product(0.8, 3), 0.8 * 0.6, 1e-15);
}

TEST(GrowthModel, WorkedDerivativeValues) {
  const QuasiExpModel m(0.5, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(dekernel::solution(m, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(dekernel::derivative_linear(m, 4.0, 1), 2.0);
  EXPECT_DOUBLE_EQ(dekernel::derivative_linear(m, 4.0, 2), 0.5);
  EXPECT_DOUBLE_EQ(dekernel::derivative_linear(m, 4.0, 3), 0.0);
  EXPECT_EQ(code_of([&] { dekernel::derivative_linear(m, 0.0, 1); }), ErrorCode::NonPositiveState);
}

TEST(GrowthModel, DerivativesMatchFiniteDifferences) {
  for (double alpha : {0.3, 0.5, 0.8, 1.0}) {
    const QuasiExpModel m(alpha, 0.7, 1.5);
    for (double x : {0.5, 1.0, 2.5}) {
      auto g = [&](long double t) { return oracle::exact_solution(alpha, 0.7L, 1.5L, t); };
      auto G = [&](long double t) { return std::log(oracle::exact_solution(alpha, 0.7L, 1.5L, t)); };
      const double gx = dekernel::solution(m, x);
      for (int p = 1; p <= 4; ++p) {
        const long double ref = oracle::fd_derivative(g, x, p);
        const double got = dekernel::derivative_linear(m, gx, p);
        if (std::abs(ref) < 1e-6) {
          EXPECT_NEAR(got, 0.0, 1e-6) << "alpha=" << alpha << " p=" << p;
        } else {
          EXPECT_NEAR(got / static_cast<double>(ref), 1.0, 1e-6) << "alpha=" << alpha << " p=" << p;
        }
        const long double ref_log = oracle::fd_derivative(G, x, p);
        const double got_log = dekernel::derivative_log(m, std::log(gx), p);
        if (std::abs(ref_log) < 1e-6) {
          EXPECT_NEAR(got_log, 0.0, 1e-6) << "alpha=" << alpha << " p=" << p;
        } else {
          EXPECT_NEAR(got_log / static_cast<double>(ref_log), 1.0, 1e-6) << "alpha=" << alpha << " p=" << p;
        }
      }
    }
  }
}

TEST(GrowthModel, SolutionMatchesRk4) {
  for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
    for (double lambda : {0.5, 1.3}) {
      const QuasiExpModel m(alpha, lambda, 0.8);
      for (double x = 0.0; x <= 4.0; x += 0.5) {
        const double g = dekernel::solution(m, x);
        EXPECT_NEAR(dekernel::solve_ode_rk4(m, x, 1e-3) / g, 1.0, 1e-10);
        EXPECT_NEAR(dekernel::log_solution(m, x), std::log(g), 1e-12);
      }
    }
  }
}

TEST(GrowthModel, SolutionSatisfiesOde) {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = gen.uniform(0.05, 1.0);
    const double lambda = gen.uniform(0.1, 2.0);
    const double g0 = gen.uniform(0.2, 3.0);
    const double x = gen.uniform(0.0, 3.0);
    const QuasiExpModel m(alpha, lambda, g0);
    auto g = [&](long double t) { return oracle::exact_solution(alpha, lambda, g0, t); };
    const double lhs = static_cast<double>(oracle::fd_derivative(g, x, 1, 0.01L));
    const double rhs = lambda * std::pow(dekernel::solution(m, x), alpha);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-9);
    EXPECT_NEAR(dekernel::solution(m, 0.0), g0, 1e-12 * g0);
  }
}

TEST(GrowthModel, DecayingSolutionBecomesUndefined) {
  const QuasiExpModel m(0.5, -1.0, 1.0);
  EXPECT_NEAR(dekernel::solution(m, 1.0), 0.25, 1e-15);
  EXPECT_EQ(code_of([&] { dekernel::solution(m, 2.5); }), ErrorCode::SolutionUndefined);
  EXPECT_EQ(code_of([&] { dekernel::log_solution(m, 2.5); }), ErrorCode::SolutionUndefined);
  EXPECT_EQ(code_of([&] { dekernel::solve_ode_rk4(m, 2.5, 1e-3); }), ErrorCode::StateCollapse);
}

TEST(GrowthModel, TaylorDegreeBounds) {
  const QuasiExpModel m(0.5, 1.0);
  EXPECT_EQ(code_of([&] { dekernel::TaylorPolynomial(m, Scale::Log, 0, 1.0); }), ErrorCode::DegreeOutOfRange);
  EXPECT_EQ(code_of([&] { dekernel::TaylorPolynomial(m, Scale::Log, 7, 1.0); }), ErrorCode::DegreeOutOfRange);
  EXPECT_EQ(code_of([&] { dekernel::TaylorPolynomial(m, Scale::Linear, 2, -1.0); }), ErrorCode::NonPositiveState);
}

TEST(GrowthModel, TaylorPredictionWorkedValues) {
  const QuasiExpModel m(0.5, 1.0);
  // g(2) = 4, g' = 2, g'' = 0.5: 4 + 2(0.1) + 0.25(0.01).
  EXPECT_NEAR(dekernel::taylor_predict_linear(m, 4.0, 0.1, 2), 4.2025, 1e-14);
  // Exact for alpha = 0.5 at any k >= 2 since the solution is quadratic.
  EXPECT_NEAR(dekernel::taylor_predict_linear(m, 4.0, 0.7, 3), dekernel::solution(m, 2.7), 1e-12);
}

TEST(GrowthModel, TaylorTruncationErrorShrinks) {
  for (double alpha : {0.3, 0.8, 1.0}) {
    const QuasiExpModel m(alpha, 0.9, 1.2);
    const double x = 1.5;
    const double g = dekernel::solution(m, x);
    const double G = std::log(g);
    for (int k = 1; k <= 5; ++k) {
      const double e1 = std::abs(dekernel::taylor_predict_linear(m, g, 0.1, k) - dekernel::solution(m, x + 0.1));
      const double e2 = std::abs(dekernel::taylor_predict_linear(m, g, 0.05, k) - dekernel::solution(m, x + 0.05));
      if (e1 > 1e-13) {
        EXPECT_LT(e2, e1 * std::pow(0.5, k + 1) * 1.3) << "alpha=" << alpha << " k=" << k;
      }
      const double l1 = std::abs(dekernel::taylor_predict_log(m, G, 0.1, k) - dekernel::log_solution(m, x + 0.1));
      const double l2 = std::abs(dekernel::taylor_predict_log(m, G, 0.05, k) - dekernel::log_solution(m, x + 0.05));
      if (l1 > 1e-13) {
        EXPECT_LT(l2, l1 * std::pow(0.5, k + 1) * 1.3) << "alpha=" << alpha << " k=" << k;
      }
    }
  }
}

TEST(GrowthModel, TaylorSlopeIsCenterDerivative) {
  oracle::Gen gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const QuasiExpModel m(gen.uniform(0.1, 1.0), gen.uniform(-1.0, 2.0) + 0.01, 1.0);
    const Scale scale = gen.coin() ? Scale::Log : Scale::Linear;
    const int k = gen.integer(1, 6);
    const double c = gen.uniform(0.5, 3.0);
    const double dx = gen.uniform(-0.5, 0.5);
    const dekernel::TaylorPolynomial p(m, scale, k, c);
    auto value_at = [&](long double cc) {
      return static_cast<long double>(dekernel::TaylorPolynomial(m, scale, k, static_cast<double>(cc)).value(dx));
    };
    const double fd = static_cast<double>(oracle::fd_derivative(value_at, c, 1, 1e-3L));
    EXPECT_NEAR(p.slope(dx), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}
