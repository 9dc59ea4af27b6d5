#pragma once

#include <optional>
#include <span>
#include <string>

#include "dekernel/de_fit.hpp"
#include "dekernel/local_poly.hpp"

namespace dekernel {

/// A local estimator that can be evaluated at a point for a given bandwidth:
/// either a local polynomial of some degree or the DE-constrained fit.
struct Estimator {
  enum class Kind { LocalPoly, DeConstrained };

  Kind kind = Kind::LocalPoly;
  int degree = 1;
  Scale scale = Scale::Log;
  std::optional<QuasiExpModel> model;
  KernelSpec kernel{};
  GaussNewtonOptions gauss_newton{};

  static Estimator local_poly(int degree, KernelSpec kernel = {}) {
    Estimator e;
    e.kind = Kind::LocalPoly;
    e.degree = degree;
    e.kernel = kernel;
    return e;
  }

  static Estimator de(const QuasiExpModel& model, int k, Scale scale, KernelSpec kernel = {}) {
    Estimator e;
    e.kind = Kind::DeConstrained;
    e.degree = k;
    e.scale = scale;
    e.model = model;
    e.kernel = kernel;
    return e;
  }

  FitRequest request(double h) const {
    if (!model) throw Error(ErrorCode::ConfigInvalid, "DE estimator needs model parameters");
    return FitRequest{*model, degree, kernel, h, scale, gauss_newton};
  }

  struct Value {
    double estimate;
    bool converged;
  };

  /// `z` must already be on the estimator's working scale.
  Value evaluate(std::span<const double> x, std::span<const double> z, double x0, double h) const {
    if (kind == Kind::LocalPoly) return {local_poly_fit_at(x, z, x0, degree, kernel, h).estimate, true};
    const auto fit = de_fit_at(x, z, x0, request(h));
    return {fit.estimate, fit.converged};
  }

  std::string describe() const {
    if (kind == Kind::LocalPoly) return "local_poly(degree=" + std::to_string(degree) + ")";
    return std::string("de(k=") + std::to_string(degree) + ", scale=" + (scale == Scale::Log ? "log" : "linear") + ")";
  }
};

}  // namespace dekernel
