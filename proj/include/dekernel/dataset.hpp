#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dekernel/error.hpp"
#include "dekernel/growth_model.hpp"

namespace dekernel {

/// Design points with responses. `scale` records whether y already holds log-responses.
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  Scale scale = Scale::Linear;

  std::size_t size() const { return x.size(); }

  void validate() const {
    if (x.size() != y.size()) throw Error(ErrorCode::InvalidDataset, "x and y differ in length");
    if (x.empty()) throw Error(ErrorCode::InvalidDataset, "dataset is empty");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
        throw Error(ErrorCode::InvalidDataset, "non-finite value at row " + std::to_string(i + 1));
      }
      if (i > 0 && x[i] < x[i - 1]) {
        throw Error(ErrorCode::InvalidDataset, "design points must be sorted non-decreasing");
      }
    }
  }
};

/// Responses expressed on `target` scale. Log transforms require positive responses.
inline std::vector<double> working_responses(const Dataset& data, Scale target) {
  if (data.scale == target) return data.y;
  std::vector<double> z(data.y.size());
  if (target == Scale::Log) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!(data.y[i] > 0.0)) {
        throw Error(ErrorCode::NonPositiveData, "log transform needs positive responses (row " + std::to_string(i + 1) + ")");
      }
      z[i] = std::log(data.y[i]);
    }
  } else {
    std::transform(data.y.begin(), data.y.end(), z.begin(), [](double v) { return std::exp(v); });
  }
  return z;
}

inline Dataset with_responses(const Dataset& data, std::vector<double> z, Scale scale) {
  return Dataset{data.x, std::move(z), scale};
}

enum class PointStatus { Ok, NotConverged, Failed };

/// Fitted values on a grid with per-point diagnostics.
struct CurveEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<double> objective;
  std::vector<PointStatus> status;
  std::vector<std::string> message;

  void resize(std::size_t n) {
    grid.resize(n);
    values.assign(n, std::nan(""));
    iterations.assign(n, 0);
    converged.assign(n, false);
    objective.assign(n, std::nan(""));
    status.assign(n, PointStatus::Failed);
    message.assign(n, {});
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count(status.begin(), status.end(), PointStatus::Failed));
  }
  bool all_ok() const {
    return std::all_of(status.begin(), status.end(), [](PointStatus s) { return s == PointStatus::Ok; });
  }
};

inline const char* to_string(PointStatus s) {
  switch (s) {
    case PointStatus::Ok: return "ok";
    case PointStatus::NotConverged: return "not_converged";
    case PointStatus::Failed: return "failed";
  }
  return "";
}

}  // namespace dekernel
