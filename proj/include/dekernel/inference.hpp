#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dekernel/dataset.hpp"
#include "dekernel/error.hpp"

namespace dekernel {

struct AlphaEstimate {
  double alpha_hat = 0.0;
  double slope = 0.0;      ///< OLS slope of log y on log x, estimates 1 / (1 - alpha)
  double intercept = 0.0;
};

struct ParamEstimate {
  double alpha_hat = 0.0;
  double lambda_hat = 0.0;
  double slope = 0.0;
  double residual_sse = 0.0;
};

namespace detail {

inline std::vector<double> positive_linear_responses(const Dataset& data) {
  auto y = working_responses(data, Scale::Linear);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(data.x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveData, "power-law inference needs x > 0 and y > 0 (row " +
                                                  std::to_string(i + 1) + ")");
    }
  }
  return y;
}

}  // namespace detail

/// Log-log OLS slope b, read as 1 / (1 - alpha): alpha_hat = 1 - 1 / b.
///
/// Not clipped to (0, 1]; callers decide what an out-of-range estimate means.
inline AlphaEstimate estimate_alpha(const Dataset& data) {
  const auto y = detail::positive_linear_responses(data);
  const std::size_t n = y.size();
  std::vector<double> lx(n), ly(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(data.x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateDesign, "log x has no spread");
  AlphaEstimate est;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  if (std::abs(est.slope) < 1e-8) throw Error(ErrorCode::NearZeroSlope, "log-log slope is numerically zero");
  est.alpha_hat = 1.0 - 1.0 / est.slope;
  return est;
}

/// Sum of squares of y - ((1 - alpha) lambda x)^(1 / (1 - alpha)).
inline double lambda_objective(const Dataset& data, double alpha_hat, double lambda) {
  const auto y = working_responses(data, Scale::Linear);
  const double e = 1.0 / (1.0 - alpha_hat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - std::pow((1.0 - alpha_hat) * lambda * data.x[i], e);
    s += r * r;
  }
  return s;
}

/// One-parameter NLS for lambda with alpha held at `alpha_hat`: coarse scan and
/// golden section on log|lambda|, then a Gauss-Newton polish in lambda.
inline double estimate_lambda(const Dataset& data, double alpha_hat) {
  const auto y = detail::positive_linear_responses(data);
  if (!std::isfinite(alpha_hat) || alpha_hat == 1.0) {
    throw Error(ErrorCode::NoFeasibleLambda, "alpha_hat must be finite and differ from 1");
  }
  const double om = 1.0 - alpha_hat;
  const double sign = om > 0.0 ? 1.0 : -1.0;
  const double e = 1.0 / om;
  const std::size_t n = y.size();

  // Model value is (|1 - alpha| x)^e * exp(e * theta) with lambda = sign * exp(theta).
  std::vector<double> log_base(n);
  for (std::size_t i = 0; i < n; ++i) log_base[i] = e * std::log(std::abs(om) * data.x[i]);
  auto sse_theta = [&](double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - std::exp(log_base[i] + e * theta);
      s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
  };

  // Start from the intercept relation log y ~ e (log|1 - alpha| + log|lambda| + log x).
  double theta0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) theta0 += std::log(y[i]) / e - log_base[i] / e;
  theta0 /= static_cast<double>(n);

  constexpr int kScan = 401;
  constexpr double kHalfWidth = 20.0;
  const double step = 2.0 * kHalfWidth / (kScan - 1);
  int best = -1;
  double best_s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    const double s = sse_theta(theta0 - kHalfWidth + step * i);
    if (s < best_s) {
      best_s = s;
      best = i;
    }
  }
  if (best < 0) throw Error(ErrorCode::NoFeasibleLambda, "lambda objective is not finite anywhere in the bracket");

  double lo = theta0 - kHalfWidth + step * std::max(best - 1, 0);
  double hi = theta0 - kHalfWidth + step * std::min(best + 1, kScan - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
  double fc = sse_theta(c), fd = sse_theta(d);
  while (hi - lo > 1e-9) {
    if (fc <= fd) {
      hi = d; d = c; fd = fc;
      c = hi - inv_phi * (hi - lo); fc = sse_theta(c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + inv_phi * (hi - lo); fd = sse_theta(d);
    }
  }
  double lambda = sign * std::exp(0.5 * (lo + hi));

  auto sse_lambda = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - std::pow(om * lam * data.x[i], e);
      s += r * r;
    }
    return s;
  };
  double s = sse_lambda(lambda);
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::pow(om * lambda * data.x[i], e);
      const double j = e * m / lambda;
      num += (y[i] - m) * j;
      den += j * j;
    }
    if (!(den > 0.0)) break;
    const double delta = num / den;
    if (std::abs(delta) <= 1e-13 * std::abs(lambda)) {
      converged = true;
      break;
    }
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const double cand = lambda + t * delta;
      if (!(om * cand > 0.0)) continue;
      const double sc = sse_lambda(cand);
      if (sc < s) {
        lambda = cand;
        s = sc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      converged = true;
      break;
    }
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "lambda polish did not settle");
  return lambda;
}

inline ParamEstimate estimate_params(const Dataset& data) {
  const auto a = estimate_alpha(data);
  ParamEstimate p;
  p.alpha_hat = a.alpha_hat;
  p.slope = a.slope;
  p.lambda_hat = estimate_lambda(data, a.alpha_hat);
  p.residual_sse = lambda_objective(data, p.alpha_hat, p.lambda_hat);
  return p;
}

struct NlsOptions {
  bool refine_alpha = true;
  /// Fixed initial value; defaults to 1e-8 * max y.
  std::optional<double> g0;
  int max_iter = 200;
  double rel_tol = 1e-12;
  int max_halvings = 40;
};

struct NlsFit {
  ParamEstimate params;
  double g0 = 0.0;
  std::vector<double> fitted_log;  ///< log solution at the design points
  bool converged = false;
  int accepted_steps = 0;
};

/// log of the ODE solution for arbitrary alpha != 1 (no range restriction on alpha);
/// NaN when the solution base is non-positive.
inline double nls_log_solution(double alpha, double lambda, double g0, double x) {
  if (alpha == 1.0) return std::log(g0) + lambda * x;
  const double u = std::pow(g0, 1.0 - alpha) + (1.0 - alpha) * lambda * x;
  if (!(u > 0.0)) return std::nan("");
  return std::log(u) / (1.0 - alpha);
}

/// Global NLS fit of the explicit solution (small fixed g0) to log responses by
/// Gauss-Newton with step halving, jointly in (alpha, lambda) or in lambda alone.
inline NlsFit nls_solution_fit(const Dataset& data, const ParamEstimate& init, const NlsOptions& opt = {}) {
  const auto ly = working_responses(data, Scale::Log);
  const std::size_t n = ly.size();
  double max_y = -std::numeric_limits<double>::infinity();
  for (double v : ly) max_y = std::max(max_y, v);
  NlsFit fit;
  fit.g0 = opt.g0.value_or(1e-8 * std::exp(max_y));
  const double g0 = fit.g0;
  const double log_g0 = std::log(g0);

  auto sse = [&](double a, double lam) {
    if (a == 1.0) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - nls_log_solution(a, lam, g0, data.x[i]);
      s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
  };

  double a = init.alpha_hat;
  double lam = init.lambda_hat;
  double s = sse(a, lam);
  if (!std::isfinite(s)) throw Error(ErrorCode::NoFeasibleLambda, "NLS starting point outside the solution domain");

  const int p = opt.refine_alpha ? 2 : 1;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    Eigen::MatrixXd J(n, p);
    Eigen::VectorXd r(n);
    const double om = 1.0 - a;
    const double g0_pow = std::pow(g0, om);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = data.x[i];
      const double u = g0_pow + om * lam * x;
      const double lu = std::log(u);
      r(i) = ly[i] - lu / om;
      J(i, 0) = x / u;
      if (p == 2) {
        const double du_da = -log_g0 * g0_pow - lam * x;
        J(i, 1) = lu / (om * om) + du_da / (u * om);
      }
    }
    const Eigen::VectorXd delta = J.colPivHouseholderQr().solve(r);
    if (!delta.allFinite()) break;
    const double d_lam = delta(0);
    const double d_a = p == 2 ? delta(1) : 0.0;
    if (std::abs(d_lam) <= opt.rel_tol * std::abs(lam) && std::abs(d_a) <= opt.rel_tol * std::max(std::abs(a), 1.0)) {
      fit.converged = true;
      break;
    }
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving, t *= 0.5) {
      const double a_new = a + t * d_a;
      const double lam_new = lam + t * d_lam;
      const double s_new = sse(a_new, lam_new);
      if (s_new < s) {
        const bool tiny = std::abs(t * d_lam) <= opt.rel_tol * std::abs(lam) &&
                          std::abs(t * d_a) <= opt.rel_tol * std::max(std::abs(a), 1.0);
        a = a_new;
        lam = lam_new;
        s = s_new;
        ++fit.accepted_steps;
        accepted = true;
        if (tiny) fit.converged = true;
        break;
      }
    }
    if (!accepted) {
      fit.converged = true;
      break;
    }
    if (fit.converged) break;
  }

  fit.params.alpha_hat = a;
  fit.params.lambda_hat = lam;
  fit.params.slope = 1.0 / (1.0 - a);
  fit.params.residual_sse = s;
  fit.fitted_log.resize(n);
  for (std::size_t i = 0; i < n; ++i) fit.fitted_log[i] = nls_log_solution(a, lam, g0, data.x[i]);
  return fit;
}

}  // namespace dekernel
