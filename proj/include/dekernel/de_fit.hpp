#pragma once

#include <cfloat>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dekernel/dataset.hpp"
#include "dekernel/error.hpp"
#include "dekernel/growth_model.hpp"
#include "dekernel/kernel.hpp"

namespace dekernel {

struct GaussNewtonOptions {
  int max_iter = 100;
  double rel_tol = 1e-10;
  int max_halvings = 30;
};

/// Inputs of the DE-constrained local estimator.
struct FitRequest {
  QuasiExpModel model;
  int degree_k = 1;
  KernelSpec kernel{};
  double bandwidth_h = 1.0;
  Scale scale = Scale::Log;
  GaussNewtonOptions gauss_newton{};

  void validate() const {
    check_taylor_degree(degree_k);
    if (!(bandwidth_h > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive");
    if (gauss_newton.max_iter < 1 || gauss_newton.max_halvings < 0 || !(gauss_newton.rel_tol > 0.0)) {
      throw Error(ErrorCode::ConfigInvalid, "Gauss-Newton options must be positive");
    }
  }
};

struct DeFitResult {
  double estimate = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  /// Objective after the warm start and after every accepted step.
  std::vector<double> objective_trace;
};

namespace detail {

struct LocalWindow {
  std::vector<double> dx, w, z;
};

inline LocalWindow gather_window(std::span<const double> x, std::span<const double> z, double x0,
                                 const KernelSpec& kernel, double h) {
  LocalWindow win;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = kernel.scaled_weight(h, x[i] - x0);
    if (w > 0.0) {
      win.dx.push_back(x[i] - x0);
      win.w.push_back(w);
      win.z.push_back(z[i]);
    }
  }
  return win;
}

inline double window_objective(const LocalWindow& win, const FitRequest& req, double a) {
  const TaylorPolynomial poly(req.model, req.scale, req.degree_k, a);
  double s = 0.0;
  for (std::size_t i = 0; i < win.w.size(); ++i) {
    const double r = win.z[i] - poly.value(win.dx[i]);
    s += win.w[i] * r * r;
  }
  return s;
}

inline bool in_domain(Scale scale, double a) {
  return std::isfinite(a) && (scale == Scale::Log || a > 0.0);
}

}  // namespace detail

/// Taylor-expanded local objective sum_i K_h(x_i - x0) (z_i - P(a, x_i - x0))^2.
inline double de_objective(std::span<const double> x, std::span<const double> z, double x0, const FitRequest& req,
                           double a) {
  return detail::window_objective(detail::gather_window(x, z, x0, req.kernel, req.bandwidth_h), req, a);
}

/// Minimizes the local objective over the single unknown g(x0) (or G(x0) on the log
/// scale) by damped Gauss-Newton, starting from the local constant estimate.
///
/// `z` holds responses on `req.scale`. Non-convergence is reported through
/// `converged = false`, not thrown.
inline DeFitResult de_fit_at(std::span<const double> x, std::span<const double> z, double x0, const FitRequest& req,
                             std::optional<double> initial = std::nullopt) {
  req.validate();
  const auto win = detail::gather_window(x, z, x0, req.kernel, req.bandwidth_h);
  if (win.w.empty()) {
    throw Error(ErrorCode::InsufficientLocalData, "no weighted design points near x0 = " + std::to_string(x0));
  }

  double a = 0.0;
  if (initial) {
    a = *initial;
  } else {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < win.w.size(); ++i) {
      num += win.w[i] * win.z[i];
      den += win.w[i];
    }
    a = num / den;
  }
  if (!detail::in_domain(req.scale, a)) {
    throw Error(ErrorCode::IterateLeftDomain, "starting value outside the positive domain at x0 = " + std::to_string(x0));
  }

  const auto& gn = req.gauss_newton;
  const double floor = req.scale == Scale::Linear ? DBL_EPSILON * std::abs(a) : -std::numeric_limits<double>::infinity();

  DeFitResult res;
  double s = detail::window_objective(win, req, a);
  res.objective_trace.push_back(s);

  for (int iter = 0; iter < gn.max_iter; ++iter) {
    const TaylorPolynomial poly(req.model, req.scale, req.degree_k, a);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < win.w.size(); ++i) {
      const double r = win.z[i] - poly.value(win.dx[i]);
      const double j = poly.slope(win.dx[i]);
      num += win.w[i] * r * j;
      den += win.w[i] * j * j;
    }
    const double scale_ref = req.scale == Scale::Linear ? std::abs(a) : std::max(std::abs(a), 1.0);
    if (den == 0.0 || !std::isfinite(num / den)) break;
    const double delta = num / den;
    if (std::abs(delta) <= gn.rel_tol * scale_ref) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    bool saw_feasible = false;
    double t = 1.0;
    double a_new = a, s_new = s;
    for (int halving = 0; halving <= gn.max_halvings; ++halving, t *= 0.5) {
      a_new = a + t * delta;
      if (!detail::in_domain(req.scale, a_new) || a_new <= floor) continue;
      saw_feasible = true;
      s_new = detail::window_objective(win, req, a_new);
      if (s_new < s) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!saw_feasible) {
        throw Error(ErrorCode::IterateLeftDomain, "Gauss-Newton step left the positive domain at x0 = " +
                                                      std::to_string(x0));
      }
      // No descent along the Gauss-Newton direction: stationary to working precision.
      res.converged = true;
      break;
    }
    const double change = std::abs(a_new - a);
    a = a_new;
    s = s_new;
    ++res.iterations;
    res.objective_trace.push_back(s);
    if (change <= gn.rel_tol * scale_ref) {
      res.converged = true;
      break;
    }
  }

  res.estimate = a;
  res.objective = s;
  return res;
}

inline DeFitResult de_fit_at(const Dataset& data, double x0, const FitRequest& req,
                             std::optional<double> initial = std::nullopt) {
  const auto z = working_responses(data, req.scale);
  return de_fit_at(data.x, z, x0, req, initial);
}

/// Closed-form minimizer for the exponential case, where the objective is quadratic:
/// sum w y c / sum w c^2 with c_i = sum_{p=0}^{k} (lambda dx_i)^p / p!.
inline double closed_form_exp_ratio(std::span<const double> x, std::span<const double> y, double x0, double lambda,
                                    int k, const KernelSpec& kernel, double h) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = kernel.scaled_weight(h, x[i] - x0);
    if (!(w > 0.0)) continue;
    double c = 0.0, term = 1.0;
    for (int p = 0; p <= k; ++p) {
      if (p > 0) term *= lambda * (x[i] - x0) / p;
      c += term;
    }
    num += w * y[i] * c;
    den += w * c * c;
  }
  if (den == 0.0) throw Error(ErrorCode::DegenerateDenominator, "closed-form denominator vanished");
  return num / den;
}

inline double de_fit_closed_form_exp(const Dataset& data, double x0, const FitRequest& req) {
  req.validate();
  if (req.model.alpha() != 1.0) throw Error(ErrorCode::WrongAlpha, "closed form requires alpha = 1");
  if (req.scale != Scale::Linear) throw Error(ErrorCode::WrongAlpha, "closed form requires the linear scale");
  const auto y = working_responses(data, Scale::Linear);
  return closed_form_exp_ratio(data.x, y, x0, req.model.lambda(), req.degree_k, req.kernel, req.bandwidth_h);
}

/// Brute-force minimizer: uniform scan of [lo, hi], then golden-section refinement
/// of the best cell. Independent of the Gauss-Newton path.
inline double de_fit_grid_oracle(std::span<const double> x, std::span<const double> z, double x0,
                                 const FitRequest& req, double lo, double hi, int points) {
  req.validate();
  if (!(lo < hi) || points < 2) throw Error(ErrorCode::EmptyBracket, "oracle bracket is empty");
  const auto win = detail::gather_window(x, z, x0, req.kernel, req.bandwidth_h);
  if (win.w.empty()) throw Error(ErrorCode::InsufficientLocalData, "no weighted design points near x0");

  const double step = (hi - lo) / (points - 1);
  int best = -1;
  double best_s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double a = lo + step * i;
    if (!detail::in_domain(req.scale, a)) continue;
    const double s = detail::window_objective(win, req, a);
    if (s < best_s) {
      best_s = s;
      best = i;
    }
  }
  if (best < 0) throw Error(ErrorCode::EmptyBracket, "no feasible candidate in oracle bracket");

  double left = lo + step * std::max(best - 1, 0);
  double right = lo + step * std::min(best + 1, points - 1);
  if (req.scale == Scale::Linear && left <= 0.0) left = 0.5 * (lo + step * best);
  auto f = [&](double a) { return detail::window_objective(win, req, a); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = right - inv_phi * (right - left);
  double d = left + inv_phi * (right - left);
  double fc = f(c), fd = f(d);
  while (right - left > 1e-10) {
    if (fc <= fd) {
      right = d;
      d = c;
      fd = fc;
      c = right - inv_phi * (right - left);
      fc = f(c);
    } else {
      left = c;
      c = d;
      fc = fd;
      d = left + inv_phi * (right - left);
      fd = f(d);
    }
  }
  return 0.5 * (left + right);
}

/// Per-grid-point DE fits; evaluation failures are recorded, not thrown.
inline CurveEstimate de_fit_curve(const Dataset& data, std::span<const double> grid, const FitRequest& req) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "evaluation grid is empty");
  req.validate();
  const auto z = working_responses(data, req.scale);
  CurveEstimate curve;
  curve.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    curve.grid[g] = grid[g];
    try {
      const auto fit = de_fit_at(data.x, z, grid[g], req);
      curve.values[g] = fit.estimate;
      curve.iterations[g] = fit.iterations;
      curve.converged[g] = fit.converged;
      curve.objective[g] = fit.objective;
      curve.status[g] = fit.converged ? PointStatus::Ok : PointStatus::NotConverged;
      if (!fit.converged) curve.message[g] = "Gauss-Newton iteration budget exhausted";
    } catch (const Error& e) {
      curve.message[g] = e.what();
    }
  }
  return curve;
}

}  // namespace dekernel
