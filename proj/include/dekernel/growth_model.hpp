#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "dekernel/error.hpp"

namespace dekernel {

enum class Scale { Linear, Log };

inline constexpr int kMaxTaylorDegree = 6;

/// Quasi-exponential growth law g' = lambda * g^alpha with initial value g(0) = g0.
///
/// On the log scale G = log g obeys G' = lambda * exp((alpha - 1) G).
class QuasiExpModel {
public:
  QuasiExpModel(double alpha, double lambda, double g0 = 1.0) : alpha_(alpha), lambda_(lambda), g0_(g0) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw Error(ErrorCode::InvalidModel, "alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    if (!(lambda != 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorCode::InvalidModel, "lambda must be finite and nonzero");
    }
    if (!(g0 > 0.0) || !std::isfinite(g0)) {
      throw Error(ErrorCode::InvalidModel, "g0 must be finite and positive");
    }
  }

  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  double g0() const { return g0_; }

private:
  double alpha_;
  double lambda_;
  double g0_;
};

inline void check_taylor_degree(int k) {
  if (k < 1 || k > kMaxTaylorDegree) {
    throw Error(ErrorCode::DegreeOutOfRange, "Taylor degree " + std::to_string(k) + " not in [1, 6]");
  }
}

/// prod_{l=1}^{p} [(l - 1) alpha - (l - 2)]
inline double pi_product(double alpha, int p) {
  double prod = 1.0;
  for (int l = 1; l <= p; ++l) prod *= (l - 1) * alpha - (l - 2);
  return prod;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// g^(p) expressed through g itself.
inline double derivative_linear(const QuasiExpModel& model, double g_value, int p) {
  if (!(g_value > 0.0)) {
    throw Error(ErrorCode::NonPositiveState, "g must be positive, got " + std::to_string(g_value));
  }
  const double a = model.alpha();
  return std::pow(model.lambda(), p) * pi_product(a, p) * std::pow(g_value, p * a - p + 1.0);
}

/// G^(p) expressed through G = log g.
inline double derivative_log(const QuasiExpModel& model, double G_value, int p) {
  const double am1 = model.alpha() - 1.0;
  return factorial(p - 1) * std::pow(model.lambda(), p) * std::pow(am1, p - 1) * std::exp(p * am1 * G_value);
}

/// Closed-form solution of the growth ODE starting at (0, g0).
inline double solution(const QuasiExpModel& model, double x) {
  const double a = model.alpha();
  if (a == 1.0) return model.g0() * std::exp(model.lambda() * x);
  const double base = std::pow(model.g0(), 1.0 - a) + (1.0 - a) * model.lambda() * x;
  if (!(base > 0.0)) {
    throw Error(ErrorCode::SolutionUndefined, "solution base non-positive at x = " + std::to_string(x));
  }
  return std::pow(base, 1.0 / (1.0 - a));
}

/// log(solution(model, x)) without forming the power first.
inline double log_solution(const QuasiExpModel& model, double x) {
  const double a = model.alpha();
  if (a == 1.0) return std::log(model.g0()) + model.lambda() * x;
  const double base = std::pow(model.g0(), 1.0 - a) + (1.0 - a) * model.lambda() * x;
  if (!(base > 0.0)) {
    throw Error(ErrorCode::SolutionUndefined, "solution base non-positive at x = " + std::to_string(x));
  }
  return std::log(base) / (1.0 - a);
}

/// Classical RK4 integration of g' = lambda g^alpha from (0, g0) to x.
inline double solve_ode_rk4(const QuasiExpModel& model, double x, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "RK4 step must be positive");
  if (x == 0.0) return model.g0();
  const long steps = static_cast<long>(std::ceil(std::abs(x) / step));
  const double h = x / static_cast<double>(steps);
  auto rhs = [&](double g) {
    if (!(g > 0.0)) throw Error(ErrorCode::StateCollapse, "integrated state left the positive half-line");
    return model.lambda() * std::pow(g, model.alpha());
  };
  double g = model.g0();
  for (long i = 0; i < steps; ++i) {
    const double k1 = rhs(g);
    const double k2 = rhs(g + 0.5 * h * k1);
    const double k3 = rhs(g + 0.5 * h * k2);
    const double k4 = rhs(g + h * k3);
    g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!(g > 0.0)) throw Error(ErrorCode::StateCollapse, "integrated state left the positive half-line");
  return g;
}

/// Degree-k Taylor polynomial in dx around a point whose value is `center`,
/// with all derivatives tied to `center` through the growth ODE.
///
/// value(dx) = center + sum_p coef[p] dx^p and slope(dx) = d value / d center.
class TaylorPolynomial {
public:
  TaylorPolynomial(const QuasiExpModel& model, Scale scale, int k, double center)
      : degree_(std::clamp(k, 0, kMaxTaylorDegree)), center_(center) {
    check_taylor_degree(k);
    const double a = model.alpha();
    const double lam = model.lambda();
    double lam_p = 1.0;
    if (scale == Scale::Linear) {
      if (!(center > 0.0)) {
        throw Error(ErrorCode::NonPositiveState, "linear-scale Taylor center must be positive");
      }
      double pi = 1.0;
      for (int p = 1; p <= degree_; ++p) {
        lam_p *= lam;
        pi *= (p - 1) * a - (p - 2);
        const double expo = p * a - p + 1.0;
        coef_[p] = lam_p * pi * std::pow(center, expo) / factorial(p);
        dcoef_[p] = coef_[p] * expo / center;
      }
    } else {
      const double am1 = a - 1.0;
      double am1_pm1 = 1.0;
      for (int p = 1; p <= degree_; ++p) {
        lam_p *= lam;
        if (p > 1) am1_pm1 *= am1;
        coef_[p] = lam_p * am1_pm1 * std::exp(p * am1 * center) / p;
        dcoef_[p] = coef_[p] * p * am1;
      }
    }
  }

  double value(double dx) const {
    double acc = 0.0;
    for (int p = degree_; p >= 1; --p) acc = (acc + coef_[p]) * dx;
    return center_ + acc;
  }

  double slope(double dx) const {
    double acc = 0.0;
    for (int p = degree_; p >= 1; --p) acc = (acc + dcoef_[p]) * dx;
    return 1.0 + acc;
  }

  /// Coefficient of dx^p (p >= 1).
  double coefficient(int p) const { return coef_.at(p); }

private:
  int degree_;
  double center_;
  std::array<double, kMaxTaylorDegree + 1> coef_{};
  std::array<double, kMaxTaylorDegree + 1> dcoef_{};
};

inline double taylor_predict_linear(const QuasiExpModel& model, double g_at_x, double dx, int k) {
  return TaylorPolynomial(model, Scale::Linear, k, g_at_x).value(dx);
}

inline double taylor_predict_log(const QuasiExpModel& model, double G_at_x, double dx, int k) {
  return TaylorPolynomial(model, Scale::Log, k, G_at_x).value(dx);
}

}  // namespace dekernel
