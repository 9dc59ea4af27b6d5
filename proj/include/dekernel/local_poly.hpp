#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dekernel/dataset.hpp"
#include "dekernel/error.hpp"
#include "dekernel/kernel.hpp"

namespace dekernel {

struct LocalPolyFit {
  double estimate = 0.0;
  /// coefficients[j] * j! estimates the j-th derivative at x0.
  std::vector<double> coefficients;
  int effective_n = 0;
};

inline constexpr double kMaxNormalCondition = 1e12;

namespace detail {

inline int count_distinct_sorted(std::span<const double> xs) {
  int distinct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i == 0 || xs[i] != xs[i - 1]) ++distinct;
  }
  return distinct;
}

}  // namespace detail

/// Kernel-weighted least squares of z on (x - x0)^0..degree.
///
/// The design is centered at x0 and scaled by h before the QR solve; only points
/// with positive kernel weight enter the system.
inline LocalPolyFit local_poly_fit_at(std::span<const double> x, std::span<const double> z, double x0, int degree,
                                      const KernelSpec& kernel, double h) {
  if (degree < 0) throw Error(ErrorCode::DegreeOutOfRange, "polynomial degree must be nonnegative");
  if (!(h > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive");

  std::vector<double> ws, us, zs, xs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = kernel.scaled_weight(h, x[i] - x0);
    if (w > 0.0) {
      ws.push_back(w);
      us.push_back((x[i] - x0) / h);
      zs.push_back(z[i]);
      xs.push_back(x[i]);
    }
  }
  const int m = static_cast<int>(ws.size());
  const int distinct = detail::count_distinct_sorted(xs);
  if (distinct < degree + 1) {
    throw Error(ErrorCode::InsufficientLocalData, std::to_string(distinct) + " distinct weighted points near x0 = " +
                                                      std::to_string(x0) + ", need " + std::to_string(degree + 1));
  }

  LocalPolyFit fit;
  fit.effective_n = m;
  if (degree == 0) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
      num += ws[i] * zs[i];
      den += ws[i];
    }
    fit.estimate = num / den;
    fit.coefficients = {fit.estimate};
    return fit;
  }

  const int cols = degree + 1;
  Eigen::MatrixXd A(m, cols);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double sw = std::sqrt(ws[i]);
    double p = 1.0;
    for (int j = 0; j < cols; ++j) {
      A(i, j) = sw * p;
      p *= us[i];
    }
    b(i) = sw * zs[i];
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? (sv(0) / smin) * (sv(0) / smin) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxNormalCondition)) {
    throw Error(ErrorCode::SingularDesign, "local design condition number too large near x0 = " + std::to_string(x0));
  }

  const Eigen::VectorXd beta = A.householderQr().solve(b);
  fit.coefficients.resize(cols);
  double hj = 1.0;
  for (int j = 0; j < cols; ++j) {
    fit.coefficients[j] = beta(j) / hj;
    hj *= h;
  }
  fit.estimate = fit.coefficients[0];
  return fit;
}

inline LocalPolyFit local_poly_fit_at(const Dataset& data, double x0, int degree, const KernelSpec& kernel, double h) {
  return local_poly_fit_at(data.x, data.y, x0, degree, kernel, h);
}

/// Evaluates the local polynomial fit at every grid point; failures are recorded per point.
inline CurveEstimate local_poly_curve(const Dataset& data, std::span<const double> grid, int degree,
                                      const KernelSpec& kernel, double h) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "evaluation grid is empty");
  CurveEstimate curve;
  curve.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    curve.grid[g] = grid[g];
    try {
      const auto fit = local_poly_fit_at(data, grid[g], degree, kernel, h);
      curve.values[g] = fit.estimate;
      curve.converged[g] = true;
      curve.status[g] = PointStatus::Ok;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonPositiveBandwidth || e.code() == ErrorCode::DegreeOutOfRange) throw;
      curve.message[g] = e.what();
    }
  }
  return curve;
}

}  // namespace dekernel
