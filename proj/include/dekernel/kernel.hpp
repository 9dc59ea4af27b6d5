#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dekernel/error.hpp"

namespace dekernel {

enum class KernelFamily { Epanechnikov, Biweight, Uniform };

/// Symmetric probability density supported on [-1, 1].
///
/// Moments are stored in closed form; `moment_by_quadrature` integrates the
/// density numerically and exists as an independent cross-check.
class KernelSpec {
public:
  static constexpr int kMaxMomentOrder = 8;

  constexpr KernelSpec() = default;
  constexpr explicit KernelSpec(KernelFamily family) : family_(family) {}

  constexpr KernelFamily family() const { return family_; }

  double evaluate(double w) const {
    if (!(std::abs(w) <= 1.0)) return 0.0;
    switch (family_) {
      case KernelFamily::Epanechnikov: return 0.75 * (1.0 - w * w);
      case KernelFamily::Biweight: {
        const double t = 1.0 - w * w;
        return 15.0 / 16.0 * t * t;
      }
      case KernelFamily::Uniform: return 0.5;
    }
    return 0.0;
  }

  /// K_h(u) = K(u / h) / h.
  double scaled_weight(double h, double u) const {
    if (!(h > 0.0)) {
      throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive, got " + std::to_string(h));
    }
    return evaluate(u / h) / h;
  }

  /// Closed-form mu_j = int w^j K(w) dw.
  double moment(int j) const {
    check_order(j);
    if (j % 2 == 1) return 0.0;
    const double a = j + 1.0, b = j + 3.0, c = j + 5.0;
    switch (family_) {
      case KernelFamily::Epanechnikov: return 3.0 / (a * b);
      case KernelFamily::Biweight: return 15.0 / (a * b * c);
      case KernelFamily::Uniform: return 1.0 / a;
    }
    return 0.0;
  }

  double moment_by_quadrature(int j) const {
    check_order(j);
    auto integrand = [this, j](double w) { return std::pow(w, j) * evaluate(w); };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, -1.0, 1.0, 15, 1e-15);
  }

  /// R(K) = int K^2(w) dw.
  double roughness() const {
    switch (family_) {
      case KernelFamily::Epanechnikov: return 0.6;
      case KernelFamily::Biweight: return 5.0 / 7.0;
      case KernelFamily::Uniform: return 0.5;
    }
    return 0.0;
  }

  std::string_view name() const {
    switch (family_) {
      case KernelFamily::Epanechnikov: return "epanechnikov";
      case KernelFamily::Biweight: return "biweight";
      case KernelFamily::Uniform: return "uniform";
    }
    return "";
  }

  friend constexpr bool operator==(KernelSpec, KernelSpec) = default;

private:
  static void check_order(int j) {
    if (j < 0 || j > kMaxMomentOrder) {
      throw Error(ErrorCode::UnsupportedOrder, "kernel moment order " + std::to_string(j) + " not in [0, 8]");
    }
  }

  KernelFamily family_ = KernelFamily::Epanechnikov;
};

inline std::optional<KernelSpec> parse_kernel(std::string_view name) {
  if (name == "epanechnikov") return KernelSpec(KernelFamily::Epanechnikov);
  if (name == "biweight") return KernelSpec(KernelFamily::Biweight);
  if (name == "uniform") return KernelSpec(KernelFamily::Uniform);
  return std::nullopt;
}

}  // namespace dekernel
