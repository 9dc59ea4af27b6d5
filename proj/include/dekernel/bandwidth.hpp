#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dekernel/dataset.hpp"
#include "dekernel/error.hpp"
#include "dekernel/estimator.hpp"
#include "dekernel/growth_model.hpp"
#include "dekernel/kernel.hpp"

namespace dekernel {

/// Design density f with its derivative; uniform on [a, b] or tabulated
/// (piecewise linear through the given nodes).
class DesignDensity {
public:
  static DesignDensity uniform(double a, double b) {
    if (!(b > a)) throw Error(ErrorCode::ConfigInvalid, "uniform density needs a < b");
    DesignDensity d;
    d.nodes_ = {a, b};
    d.values_ = {1.0 / (b - a), 1.0 / (b - a)};
    return d;
  }

  static DesignDensity tabulated(std::vector<double> nodes, std::vector<double> values) {
    if (nodes.size() != values.size() || nodes.size() < 2) {
      throw Error(ErrorCode::ConfigInvalid, "tabulated density needs at least two matching nodes");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!(values[i] > 0.0)) throw Error(ErrorCode::ConfigInvalid, "density values must be positive");
      if (i > 0 && !(nodes[i] > nodes[i - 1])) throw Error(ErrorCode::ConfigInvalid, "density nodes must increase");
    }
    DesignDensity d;
    d.nodes_ = std::move(nodes);
    d.values_ = std::move(values);
    d.is_uniform_ = false;
    return d;
  }

  bool is_uniform() const { return is_uniform_; }
  double lower() const { return nodes_.front(); }
  double upper() const { return nodes_.back(); }

  double value_at(double x) const {
    const auto i = segment(x);
    const double t = (x - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
    return values_[i] + t * (values_[i + 1] - values_[i]);
  }

  double derivative_at(double x) const {
    if (is_uniform_) return 0.0;
    const auto i = segment(x);
    return (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
  }

private:
  std::size_t segment(double x) const {
    if (x < nodes_.front() || x > nodes_.back()) {
      throw Error(ErrorCode::ConfigInvalid, "x = " + std::to_string(x) + " outside the design density support");
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const auto i = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
    return std::min(i == 0 ? 0 : i - 1, nodes_.size() - 2);
  }

  std::vector<double> nodes_;
  std::vector<double> values_;
  bool is_uniform_ = true;
};

struct NoiseSpec {
  double sigma;
  explicit NoiseSpec(double s) : sigma(s) {
    if (!(s > 0.0)) throw Error(ErrorCode::ConfigInvalid, "noise sigma must be positive");
  }
};

namespace detail {

inline void check_bandwidth_degree(int k) {
  if (k < 0 || k > kMaxTaylorDegree) {
    throw Error(ErrorCode::DegreeOutOfRange, "degree " + std::to_string(k) + " not in [0, 6]");
  }
}

inline bool near_zero(double v) { return std::abs(v) <= 1e-12; }

/// True if pi_{alpha,p} vanishes (some factor (l-1)alpha - (l-2) is zero).
inline bool pi_vanishes(double alpha, int p) {
  for (int l = 1; l <= p; ++l) {
    if (near_zero((l - 1) * alpha - (l - 2))) return true;
  }
  return false;
}

/// lambda ((k+1)alpha - k) g^(alpha-1) / (k+2) + f'/f, the extra even-degree bias factor.
inline double even_bias_bracket(const QuasiExpModel& m, double g, int k, double f, double fprime) {
  return m.lambda() * ((k + 1) * m.alpha() - k) * std::pow(g, m.alpha() - 1.0) / (k + 2) + fprime / f;
}

}  // namespace detail

/// Leading conditional bias of the degree-k DE estimator at an interior point.
inline double asymptotic_bias(const QuasiExpModel& model, double x, int k, double h, const KernelSpec& kernel,
                              const DesignDensity& density) {
  detail::check_bandwidth_degree(k);
  if (!(h > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive");
  const double g = solution(model, x);
  const double lead = derivative_linear(model, g, k + 1) / factorial(k + 1);
  if (k % 2 == 1) return lead * std::pow(h, k + 1) * kernel.moment(k + 1);
  const double bracket = detail::even_bias_bracket(model, g, k, density.value_at(x), density.derivative_at(x));
  return lead * bracket * std::pow(h, k + 2) * kernel.moment(k + 2);
}

/// sigma^2 R(K) / (n h f(x)).
inline double asymptotic_variance(const NoiseSpec& noise, long n, double h, const KernelSpec& kernel,
                                  const DesignDensity& density, double x) {
  if (n < 1) throw Error(ErrorCode::ConfigInvalid, "sample size must be positive");
  if (!(h > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive");
  return noise.sigma * noise.sigma * kernel.roughness() / (static_cast<double>(n) * h * density.value_at(x));
}

/// AMSE-optimal bandwidth of the degree-k DE estimator.
inline double optimal_bandwidth_direct(const QuasiExpModel& model, double x, int k, long n, const NoiseSpec& noise,
                                       const KernelSpec& kernel, const DesignDensity& density) {
  detail::check_bandwidth_degree(k);
  if (detail::pi_vanishes(model.alpha(), k + 1)) {
    throw Error(ErrorCode::DegenerateBias, "pi_{alpha," + std::to_string(k + 1) + "} vanishes; optimal h diverges");
  }
  const double a = model.alpha();
  const double lam = model.lambda();
  const double g = solution(model, x);
  const double f = density.value_at(x);
  const double num = noise.sigma * noise.sigma * kernel.roughness() * factorial(k + 1) * factorial(k + 1);
  const double pi = pi_product(a, k + 1);
  double den = static_cast<double>(n) * f * std::pow(lam, 2 * k + 2) * pi * pi *
               std::pow(g, 2.0 * (k + 1) * a - 2.0 * k);
  if (k % 2 == 1) {
    const double mu = kernel.moment(k + 1);
    den *= (2.0 * k + 2.0) * mu * mu;
    return std::pow(num / den, 1.0 / (2.0 * k + 3.0));
  }
  const double bracket = detail::even_bias_bracket(model, g, k, f, density.derivative_at(x));
  if (detail::near_zero(bracket)) throw Error(ErrorCode::DegenerateBias, "even-degree bias bracket vanishes");
  const double mu = kernel.moment(k + 2);
  den *= bracket * bracket * (2.0 * k + 4.0) * mu * mu;
  return std::pow(num / den, 1.0 / (2.0 * k + 5.0));
}

/// Recursive step h_{o,k} -> h_{o,k+2}, evaluated verbatim from the closed-form
/// recursion (see `audit_bandwidth_step` for its agreement with the direct formula).
inline double optimal_bandwidth_step(const QuasiExpModel& model, double x, int k, double h_ok,
                                     const DesignDensity& density) {
  if (k < 0 || k + 2 > kMaxTaylorDegree) {
    throw Error(ErrorCode::DegreeOutOfRange, "step needs 0 <= k and k + 2 <= 6");
  }
  if (!(h_ok > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "start bandwidth must be positive");
  const double a = model.alpha();
  const double lam = model.lambda();
  const double g = solution(model, x);
  const double c1 = (k + 1) * a - k;
  const double c2 = (k + 2) * a - (k + 1);
  if (detail::near_zero(c1) || detail::near_zero(c2)) {
    throw Error(ErrorCode::DegenerateBias, "derivative factor vanishes between degrees k and k + 2");
  }
  const double common = std::pow(lam, 4) * c1 * c1 * c2 * c2 * std::pow(g, 4.0 * a - 4.0);
  if (k % 2 == 1) {
    const double inner = (k + 3.0) * (k + 1.0) / common * std::pow(h_ok, 2.0 * k + 3.0);
    return std::pow(inner, 1.0 / (2.0 * k + 7.0));
  }
  const double f = density.value_at(x);
  const double fp = density.derivative_at(x);
  const double b_k = detail::even_bias_bracket(model, g, k, f, fp);
  const double b_k2 = detail::even_bias_bracket(model, g, k + 2, f, fp);
  if (detail::near_zero(b_k) || detail::near_zero(b_k2)) {
    throw Error(ErrorCode::DegenerateBias, "even-degree bias bracket vanishes");
  }
  const double inner = std::pow(k + 2.0, 3) / ((k + 4.0) * common) * (b_k * b_k) / (b_k2 * b_k2) *
                       std::pow(h_ok, 2.0 * k + 5.0);
  return std::pow(inner, 1.0 / (2.0 * k + 9.0));
}

struct BandwidthAudit {
  int k = 0;
  double h_k = 0.0;          ///< direct optimum at degree k
  double h_step = 0.0;       ///< recursion applied to h_k
  double h_direct_k2 = 0.0;  ///< direct optimum at degree k + 2
  double ratio = 0.0;        ///< h_step / h_direct_k2
  bool discrepancy = false;  ///< ratio differs from 1 beyond 1e-6
};

/// Compares the recursive step against the direct optimum at degree k + 2.
inline BandwidthAudit audit_bandwidth_step(const QuasiExpModel& model, double x, int k, long n,
                                           const NoiseSpec& noise, const KernelSpec& kernel,
                                           const DesignDensity& density) {
  BandwidthAudit audit;
  audit.k = k;
  audit.h_k = optimal_bandwidth_direct(model, x, k, n, noise, kernel, density);
  audit.h_step = optimal_bandwidth_step(model, x, k, audit.h_k, density);
  audit.h_direct_k2 = optimal_bandwidth_direct(model, x, k + 2, n, noise, kernel, density);
  audit.ratio = audit.h_step / audit.h_direct_k2;
  audit.discrepancy = std::abs(audit.ratio - 1.0) > 1e-6;
  return audit;
}

struct LoocvResult {
  double bandwidth = 0.0;
  double score = 0.0;
  /// Mean leave-one-out squared error per grid value; NaN where infeasible.
  std::vector<double> scores;
  std::vector<double> grid;
};

/// Mean leave-one-out squared prediction error, or NaN if any held-out fit fails.
inline double loocv_score(std::span<const double> x, std::span<const double> z, const Estimator& est, double h) {
  const std::size_t n = x.size();
  std::vector<double> xs(n - 1), zs(n - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, o = 0; j < n; ++j) {
      if (j == i) continue;
      xs[o] = x[j];
      zs[o] = z[j];
      ++o;
    }
    try {
      const double r = z[i] - est.evaluate(xs, zs, x[i], h).estimate;
      sum += r * r;
    } catch (const Error&) {
      return std::nan("");
    }
  }
  return sum / static_cast<double>(n);
}

/// Grid search for the bandwidth minimizing leave-one-out error. Infeasible
/// bandwidths are skipped; ties go to the smaller bandwidth.
inline LoocvResult loocv_bandwidth(std::span<const double> x, std::span<const double> z, const Estimator& est,
                                   std::span<const double> h_grid) {
  if (h_grid.empty()) throw Error(ErrorCode::AllBandwidthsInfeasible, "bandwidth grid is empty");
  if (x.size() < 2) throw Error(ErrorCode::AllBandwidthsInfeasible, "cross-validation needs two or more points");
  LoocvResult res;
  res.grid.assign(h_grid.begin(), h_grid.end());
  std::sort(res.grid.begin(), res.grid.end());
  res.scores.resize(res.grid.size());
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t g = 0; g < res.grid.size(); ++g) {
    if (!(res.grid[g] > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth grid must be positive");
    const double s = loocv_score(x, z, est, res.grid[g]);
    res.scores[g] = s;
    if (std::isnan(s)) continue;
    if (!found || s < best - 1e-12 * std::max(best, 1.0)) {
      best = s;
      res.bandwidth = res.grid[g];
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::AllBandwidthsInfeasible, "no bandwidth in the grid admits every held-out fit");
  res.score = best;
  return res;
}

inline LoocvResult loocv_bandwidth(const Dataset& data, const Estimator& est, std::span<const double> h_grid) {
  const Scale working = est.kind == Estimator::Kind::DeConstrained ? est.scale : data.scale;
  const auto z = working_responses(data, working);
  return loocv_bandwidth(data.x, z, est, h_grid);
}

}  // namespace dekernel
