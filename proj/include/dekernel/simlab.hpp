#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dekernel/bandwidth.hpp"
#include "dekernel/dataset.hpp"
#include "dekernel/de_fit.hpp"
#include "dekernel/estimator.hpp"
#include "dekernel/growth_model.hpp"
#include "dekernel/inference.hpp"
#include "dekernel/kernel.hpp"
#include "dekernel/local_poly.hpp"
#include "dekernel/parallel.hpp"

namespace dekernel {

enum class DesignKind { Equispaced, UniformRandom, Explicit };

struct DesignSpec {
  DesignKind kind = DesignKind::Equispaced;
  double a = 0.0;
  double b = 1.0;
  std::vector<double> points;  ///< explicit designs only
};

/// LogNormal: Normal noise added to log responses (multiplicative on the raw scale).
/// AdditiveLinear: Normal noise added to raw responses.
enum class NoiseModel { LogNormal, AdditiveLinear };

enum class PseudoTruthKind { ExplicitSolution, LocalLinearOnFullData };

struct PseudoTruthSpec {
  PseudoTruthKind kind = PseudoTruthKind::ExplicitSolution;
  double bandwidth = 2.38;
  Dataset base;  ///< log-scale reference data for LocalLinearOnFullData
};

enum class MethodFamily { LocalPoly, DeConstrained, Nls };
enum class BandwidthMode { Fixed, Loocv, AsymptoticOptimal };

struct BandwidthSpec {
  BandwidthMode mode = BandwidthMode::Loocv;
  double h = 0.0;
  std::vector<double> grid;  ///< empty: default grid relative to the training range
};

struct MethodSpec {
  std::string label;
  MethodFamily family = MethodFamily::LocalPoly;
  int degree = 1;
  Scale scale = Scale::Log;
  BandwidthSpec bandwidth{};
};

/// Where DE and NLS methods get (alpha, lambda) from.
enum class ParamSource { PerReplicate, FixedFromBase, True };

struct ScenarioConfig {
  QuasiExpModel model{0.5, 1.0, 1.0};
  int n = 10;
  DesignSpec design{};
  double noise_sd = 0.1;
  NoiseModel noise_model = NoiseModel::LogNormal;
  std::vector<int> removed_indices;
  int replicates = 1;
  std::uint64_t master_seed = 1;
  std::vector<MethodSpec> methods;
  PseudoTruthSpec pseudo_truth{};
  KernelSpec kernel{};
  ParamSource param_source = ParamSource::PerReplicate;
  bool nls_refine_alpha = true;

  int design_size() const { return design.kind == DesignKind::Explicit ? static_cast<int>(design.points.size()) : n; }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
    if (design.kind == DesignKind::Explicit) {
      if (design.points.empty()) fail("design.points: explicit design is empty");
      if (!std::is_sorted(design.points.begin(), design.points.end())) fail("design.points: must be sorted");
    } else {
      if (n < 1) fail("n: must be positive");
      if (!(design.b > design.a)) fail("design: need a < b");
    }
    if (!(noise_sd >= 0.0)) fail("noise.sd: must be nonnegative");
    if (replicates < 1) fail("replicates: must be at least 1");
    const int size = design_size();
    std::vector<int> sorted = removed_indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("removed_indices: duplicates");
    for (int idx : sorted) {
      if (idx < 1 || idx > size) fail("removed_indices: index " + std::to_string(idx) + " outside [1, n]");
    }
    if (pseudo_truth.kind == PseudoTruthKind::LocalLinearOnFullData) {
      if (pseudo_truth.base.size() < 2) fail("pseudo_truth.data: base dataset needs at least two points");
      if (!(pseudo_truth.bandwidth > 0.0)) fail("pseudo_truth.bandwidth: must be positive");
      pseudo_truth.base.validate();
    }
    if (param_source == ParamSource::FixedFromBase && pseudo_truth.kind != PseudoTruthKind::LocalLinearOnFullData) {
      fail("parameters: fixed_from_base needs a base dataset");
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto& ms = methods[m];
      const std::string where = "methods[" + std::to_string(m) + "]";
      if (ms.family == MethodFamily::DeConstrained && (ms.degree < 1 || ms.degree > kMaxTaylorDegree)) {
        fail(where + ".degree: DE degree must lie in [1, 6]");
      }
      if (ms.family == MethodFamily::LocalPoly && ms.degree < 0) fail(where + ".degree: must be nonnegative");
      if (ms.family != MethodFamily::Nls) {
        if (ms.bandwidth.mode == BandwidthMode::Fixed && !(ms.bandwidth.h > 0.0)) {
          fail(where + ".bandwidth.h: must be positive");
        }
        if (ms.bandwidth.mode == BandwidthMode::AsymptoticOptimal && ms.family != MethodFamily::DeConstrained) {
          fail(where + ".bandwidth.mode: theorem3 applies to DE methods only");
        }
      }
    }
  }
};

/// Method presets: NW, LL, LQ (local polynomials on log responses),
/// DE1, DE2 (log-scale DE fits) and NLS (global solution fit).
inline std::optional<MethodSpec> method_preset(const std::string& name) {
  MethodSpec m;
  m.label = name;
  if (name == "NW") { m.family = MethodFamily::LocalPoly; m.degree = 0; }
  else if (name == "LL") { m.family = MethodFamily::LocalPoly; m.degree = 1; }
  else if (name == "LQ") { m.family = MethodFamily::LocalPoly; m.degree = 2; }
  else if (name == "DE1") { m.family = MethodFamily::DeConstrained; m.degree = 1; }
  else if (name == "DE2") { m.family = MethodFamily::DeConstrained; m.degree = 2; }
  else if (name == "NLS") { m.family = MethodFamily::Nls; }
  else return std::nullopt;
  return m;
}

/// Reference curve against which simulated fits are scored.
class PseudoTruth {
public:
  PseudoTruth(const ScenarioConfig& cfg) : cfg_(&cfg) {}

  double log_value(double x) const {
    if (cfg_->pseudo_truth.kind == PseudoTruthKind::ExplicitSolution) return log_solution(cfg_->model, x);
    const auto& base = cfg_->pseudo_truth.base;
    const auto z = working_responses(base, Scale::Log);
    return local_poly_fit_at(base.x, z, x, 1, cfg_->kernel, cfg_->pseudo_truth.bandwidth).estimate;
  }

  double value(double x, Scale scale) const {
    if (scale == Scale::Log) return log_value(x);
    if (cfg_->pseudo_truth.kind == PseudoTruthKind::ExplicitSolution) return solution(cfg_->model, x);
    return std::exp(log_value(x));
  }

private:
  const ScenarioConfig* cfg_;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent generator for one replicate, a pure function of (master_seed, index).
inline std::mt19937_64 replicate_stream(std::uint64_t master_seed, int replicate_index) {
  std::uint64_t state = master_seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(replicate_index));
  std::seed_seq seq{splitmix64(state), splitmix64(state), splitmix64(state), splitmix64(state)};
  return std::mt19937_64(seq);
}

inline std::vector<double> design_points(const ScenarioConfig& cfg, std::mt19937_64& rng) {
  switch (cfg.design.kind) {
    case DesignKind::Explicit: return cfg.design.points;
    case DesignKind::Equispaced: {
      std::vector<double> x(cfg.n);
      for (int i = 0; i < cfg.n; ++i) {
        x[i] = cfg.n == 1 ? 0.5 * (cfg.design.a + cfg.design.b)
                          : cfg.design.a + (cfg.design.b - cfg.design.a) * i / (cfg.n - 1);
      }
      return x;
    }
    case DesignKind::UniformRandom: {
      std::uniform_real_distribution<double> unif(cfg.design.a, cfg.design.b);
      std::vector<double> x(cfg.n);
      for (auto& v : x) v = unif(rng);
      std::sort(x.begin(), x.end());
      return x;
    }
  }
  return {};
}

/// Simulated dataset for one replicate (1-based index). Log-normal noise yields a
/// log-scale dataset; additive noise yields a linear-scale one.
inline Dataset generate_dataset(const ScenarioConfig& cfg, int replicate_index) {
  if (replicate_index < 1 || replicate_index > cfg.replicates) {
    throw Error(ErrorCode::IndexOutOfRange, "replicate index " + std::to_string(replicate_index) + " out of range");
  }
  auto rng = replicate_stream(cfg.master_seed, replicate_index);
  Dataset data;
  data.x = design_points(cfg, rng);
  data.y.resize(data.x.size());
  const PseudoTruth truth(cfg);
  std::normal_distribution<double> normal(0.0, cfg.noise_sd > 0.0 ? cfg.noise_sd : 1.0);
  auto noise = [&](std::mt19937_64& g) { return cfg.noise_sd > 0.0 ? normal(g) : 0.0; };
  if (cfg.noise_model == NoiseModel::LogNormal) {
    data.scale = Scale::Log;
    for (std::size_t i = 0; i < data.x.size(); ++i) data.y[i] = truth.log_value(data.x[i]) + noise(rng);
  } else {
    data.scale = Scale::Linear;
    for (std::size_t i = 0; i < data.x.size(); ++i) data.y[i] = truth.value(data.x[i], Scale::Linear) + noise(rng);
  }
  return data;
}

struct SparseSplit {
  Dataset train;
  Dataset holdout;
};

/// Removes the 1-based `removed_indices`; holdout keeps them in original order.
inline SparseSplit apply_sparse_design(const Dataset& data, const std::vector<int>& removed_indices) {
  std::vector<bool> removed(data.size(), false);
  for (int idx : removed_indices) {
    if (idx < 1 || idx > static_cast<int>(data.size())) {
      throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(idx) + " outside [1, " +
                                                  std::to_string(data.size()) + "]");
    }
    removed[idx - 1] = true;
  }
  SparseSplit split;
  split.train.scale = split.holdout.scale = data.scale;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& dst = removed[i] ? split.holdout : split.train;
    dst.x.push_back(data.x[i]);
    dst.y.push_back(data.y[i]);
  }
  return split;
}

/// 40 geometric steps from the larger of 5% of the range and the widest gap
/// between neighbouring design points, up to twice the range. Starting at the
/// widest gap keeps every fitted curve defined across the design range.
inline std::vector<double> default_bandwidth_grid(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double range = std::max(sorted.back() - sorted.front(), 1e-12);
  double gap = 0.0;
  for (std::size_t i = 1; i < sorted.size(); ++i) gap = std::max(gap, sorted[i] - sorted[i - 1]);
  const double lo = std::max(0.05 * range, gap);
  const double hi = 2.0 * range;
  constexpr int kCount = 40;
  std::vector<double> grid(kCount);
  for (int i = 0; i < kCount; ++i) grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (kCount - 1));
  return grid;
}

struct MethodOutcome {
  bool failed = false;
  std::string message;
  double ase_log = 0.0;
  double ase_original = 0.0;
  double bandwidth = std::nan("");  ///< NaN for bandwidth-free or per-point bandwidths
  bool converged = true;
};

struct ReplicateRecord {
  int replicate = 0;
  double alpha_hat = std::nan("");
  double lambda_hat = std::nan("");
  std::string param_message;
  std::vector<MethodOutcome> outcomes;  ///< parallel to config.methods
};

struct MethodSummary {
  std::string label;
  double mean_ase_log = std::nan("");
  double mean_ase_original = std::nan("");
  int failures = 0;
  int not_converged = 0;
};

struct StudyReport {
  ScenarioConfig config;
  std::vector<MethodSummary> summary;
  std::vector<ReplicateRecord> records;
};

namespace detail {

/// Order-insensitive mean: values are summed in sorted order.
inline double sorted_mean(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline Estimator make_estimator(const MethodSpec& ms, const KernelSpec& kernel, const std::optional<QuasiExpModel>& model) {
  if (ms.family == MethodFamily::LocalPoly) return Estimator::local_poly(ms.degree, kernel);
  if (!model) throw Error(ErrorCode::InvalidModel, "no admissible (alpha, lambda) for DE fit");
  return Estimator::de(*model, ms.degree, ms.scale, kernel);
}

inline Scale working_scale(const MethodSpec& ms, Scale data_scale) {
  return ms.family == MethodFamily::DeConstrained ? ms.scale : data_scale;
}

struct ParamsForReplicate {
  std::optional<ParamEstimate> estimate;
  std::optional<QuasiExpModel> model;
  std::string message;
};

inline ParamsForReplicate resolve_params(const ScenarioConfig& cfg, const Dataset& train) {
  ParamsForReplicate out;
  if (cfg.param_source == ParamSource::True) {
    out.estimate = ParamEstimate{cfg.model.alpha(), cfg.model.lambda(), 1.0 / (1.0 - cfg.model.alpha()), 0.0};
    out.model = cfg.model;
    return out;
  }
  const Dataset& source = cfg.param_source == ParamSource::FixedFromBase ? cfg.pseudo_truth.base : train;
  try {
    out.estimate = estimate_params(source);
    out.model = QuasiExpModel(out.estimate->alpha_hat, out.estimate->lambda_hat, 1.0);
  } catch (const Error& e) {
    out.message = e.what();
  }
  return out;
}

}  // namespace detail

/// Recomputes the per-method means from replicate records.
inline std::vector<MethodSummary> summarize_records(const ScenarioConfig& cfg, const std::vector<ReplicateRecord>& records) {
  std::vector<MethodSummary> summary(cfg.methods.size());
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    std::vector<double> log_vals, orig_vals;
    auto& s = summary[m];
    s.label = cfg.methods[m].label;
    for (const auto& rec : records) {
      const auto& o = rec.outcomes[m];
      if (o.failed) {
        ++s.failures;
        continue;
      }
      if (!o.converged) ++s.not_converged;
      log_vals.push_back(o.ase_log);
      orig_vals.push_back(o.ase_original);
    }
    s.mean_ase_log = detail::sorted_mean(std::move(log_vals));
    s.mean_ase_original = detail::sorted_mean(std::move(orig_vals));
  }
  return summary;
}

/// One replicate of the sparse-design comparison.
inline ReplicateRecord run_replicate(const ScenarioConfig& cfg, int replicate_index) {
  ReplicateRecord rec;
  rec.replicate = replicate_index;
  const Dataset data = generate_dataset(cfg, replicate_index);
  const auto split = apply_sparse_design(data, cfg.removed_indices);
  const PseudoTruth truth(cfg);

  std::vector<double> truth_log(split.holdout.size());
  for (std::size_t j = 0; j < truth_log.size(); ++j) truth_log[j] = truth.log_value(split.holdout.x[j]);

  const bool needs_params = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                        [](const MethodSpec& m) { return m.family != MethodFamily::LocalPoly; });
  detail::ParamsForReplicate params;
  if (needs_params) {
    params = detail::resolve_params(cfg, split.train);
    if (params.estimate) {
      rec.alpha_hat = params.estimate->alpha_hat;
      rec.lambda_hat = params.estimate->lambda_hat;
    }
    if (!params.model && params.message.empty() && params.estimate) {
      params.message = "alpha_hat outside (0, 1]";
    }
    rec.param_message = params.message;
  }

  for (const auto& ms : cfg.methods) {
    MethodOutcome out;
    try {
      std::vector<double> pred_log(split.holdout.size());
      if (ms.family == MethodFamily::Nls) {
        if (!params.estimate) throw Error(ErrorCode::NoFeasibleLambda, params.message);
        NlsOptions opt;
        opt.refine_alpha = cfg.nls_refine_alpha;
        const auto fit = nls_solution_fit(split.train, *params.estimate, opt);
        out.converged = fit.converged;
        for (std::size_t j = 0; j < pred_log.size(); ++j) {
          pred_log[j] = nls_log_solution(fit.params.alpha_hat, fit.params.lambda_hat, fit.g0, split.holdout.x[j]);
        }
      } else {
        const Scale ws = detail::working_scale(ms, split.train.scale);
        const auto z = working_responses(split.train, ws);
        const auto est = detail::make_estimator(ms, cfg.kernel, params.model);
        double h = ms.bandwidth.h;
        if (ms.bandwidth.mode == BandwidthMode::Loocv) {
          const auto grid = ms.bandwidth.grid.empty() ? default_bandwidth_grid(split.train.x) : ms.bandwidth.grid;
          h = loocv_bandwidth(split.train.x, z, est, grid).bandwidth;
        } else if (ms.bandwidth.mode == BandwidthMode::AsymptoticOptimal) {
          throw Error(ErrorCode::ConfigInvalid, "theorem3 bandwidths are available in the asymptotics harness only");
        }
        out.bandwidth = h;
        for (std::size_t j = 0; j < pred_log.size(); ++j) {
          const auto v = est.evaluate(split.train.x, z, split.holdout.x[j], h);
          out.converged = out.converged && v.converged;
          if (ws == Scale::Log) {
            pred_log[j] = v.estimate;
          } else {
            if (!(v.estimate > 0.0)) throw Error(ErrorCode::NonPositiveState, "non-positive fitted value");
            pred_log[j] = std::log(v.estimate);
          }
        }
      }
      double sl = 0.0, so = 0.0;
      for (std::size_t j = 0; j < pred_log.size(); ++j) {
        if (!std::isfinite(pred_log[j])) throw Error(ErrorCode::SolutionUndefined, "non-finite prediction");
        const double dl = pred_log[j] - truth_log[j];
        const double dor = std::exp(pred_log[j]) - std::exp(truth_log[j]);
        sl += dl * dl;
        so += dor * dor;
      }
      out.ase_log = sl / static_cast<double>(pred_log.size());
      out.ase_original = so / static_cast<double>(pred_log.size());
    } catch (const Error& e) {
      out.failed = true;
      out.message = e.what();
    }
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

/// Monte-Carlo sparse-design comparison. Results depend only on the config
/// (including its master seed), never on `threads`.
inline StudyReport run_comparison(const ScenarioConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  if (cfg.methods.empty()) throw Error(ErrorCode::ConfigInvalid, "methods: at least one method required");
  if (cfg.removed_indices.empty()) throw Error(ErrorCode::ConfigInvalid, "removed_indices: holdout set is empty");
  StudyReport report;
  report.config = cfg;
  report.records.resize(cfg.replicates);
  parallel_for(static_cast<std::size_t>(cfg.replicates), threads,
               [&](std::size_t i) { report.records[i] = run_replicate(cfg, static_cast<int>(i) + 1); });
  report.summary = summarize_records(cfg, report.records);
  return report;
}

struct McStats {
  double h = 0.0;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double se_bias = 0.0;
  double se_variance = 0.0;
  double se_mse = 0.0;
  int used = 0;
  int failures = 0;
};

namespace detail {

inline McStats mc_reduce(const std::vector<double>& est, double truth, double h) {
  McStats st;
  st.h = h;
  st.truth = truth;
  std::vector<double> ok;
  for (double v : est) {
    if (std::isnan(v)) ++st.failures;
    else ok.push_back(v);
  }
  const double r = static_cast<double>(ok.size());
  st.used = static_cast<int>(ok.size());
  if (ok.size() < 2) return st;
  double mean = 0.0;
  for (double v : ok) mean += v;
  mean /= r;
  double m2 = 0.0, m4 = 0.0, mse = 0.0, mse2 = 0.0;
  for (double v : ok) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
    const double e = (v - truth) * (v - truth);
    mse += e;
    mse2 += e * e;
  }
  st.mean = mean;
  st.bias = mean - truth;
  st.variance = m2 / (r - 1.0);
  st.se_bias = std::sqrt(st.variance / r);
  const double m2n = m2 / r, m4n = m4 / r;
  st.se_variance = std::sqrt(std::max(m4n - m2n * m2n, 0.0) / r);
  st.mse = mse / r;
  st.se_mse = std::sqrt(std::max(mse2 / r - st.mse * st.mse, 0.0) / r);
  return st;
}

}  // namespace detail

/// Design density implied by a generated design (uniform over its interval).
inline DesignDensity design_density(const ScenarioConfig& cfg) {
  if (cfg.design.kind == DesignKind::Explicit) {
    return DesignDensity::uniform(cfg.design.points.front(), cfg.design.points.back());
  }
  return DesignDensity::uniform(cfg.design.a, cfg.design.b);
}

/// Bandwidth a method uses at x0 in the asymptotics harness; NaN means per-replicate LOOCV.
inline double harness_bandwidth(const ScenarioConfig& cfg, const MethodSpec& ms, double x0) {
  switch (ms.bandwidth.mode) {
    case BandwidthMode::Fixed: return ms.bandwidth.h;
    case BandwidthMode::AsymptoticOptimal:
      return optimal_bandwidth_direct(cfg.model, x0, ms.degree, cfg.design_size(), NoiseSpec(cfg.noise_sd), cfg.kernel,
                                      design_density(cfg));
    case BandwidthMode::Loocv: return std::nan("");
  }
  return std::nan("");
}

/// Empirical bias/variance/MSE of one estimator at x0 for each bandwidth in
/// `bandwidths`, sharing the simulated datasets across bandwidths.
inline std::vector<McStats> mc_sweep(const ScenarioConfig& cfg, double x0, const MethodSpec& ms,
                                     const std::vector<double>& bandwidths, unsigned threads = 1) {
  cfg.validate();
  if (ms.family == MethodFamily::Nls) throw Error(ErrorCode::ConfigInvalid, "asymptotics harness needs a local method");
  if (bandwidths.empty()) throw Error(ErrorCode::ConfigInvalid, "bandwidth list is empty");
  const Scale data_scale = cfg.noise_model == NoiseModel::LogNormal ? Scale::Log : Scale::Linear;
  const Scale ws = detail::working_scale(ms, data_scale);
  const auto est = detail::make_estimator(ms, cfg.kernel, cfg.model);
  const double truth = PseudoTruth(cfg).value(x0, ws);
  const std::size_t nh = bandwidths.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  std::vector<double> values(reps * nh, std::nan(""));

  parallel_for(reps, threads, [&](std::size_t r) {
    const Dataset data = generate_dataset(cfg, static_cast<int>(r) + 1);
    const auto z = working_responses(data, ws);
    for (std::size_t k = 0; k < nh; ++k) {
      double h = bandwidths[k];
      try {
        if (std::isnan(h)) {
          const auto grid = ms.bandwidth.grid.empty() ? default_bandwidth_grid(data.x) : ms.bandwidth.grid;
          h = loocv_bandwidth(data.x, z, est, grid).bandwidth;
        }
        values[r * nh + k] = est.evaluate(data.x, z, x0, h).estimate;
      } catch (const Error&) {
      }
    }
  });

  std::vector<McStats> out(nh);
  std::vector<double> column(reps);
  for (std::size_t k = 0; k < nh; ++k) {
    for (std::size_t r = 0; r < reps; ++r) column[r] = values[r * nh + k];
    out[k] = detail::mc_reduce(column, truth, bandwidths[k]);
  }
  return out;
}

/// Empirical bias and variance of a method at x0 against the explicit solution.
inline McStats mc_bias_variance(const ScenarioConfig& cfg, double x0, const MethodSpec& ms, unsigned threads = 1) {
  if (cfg.pseudo_truth.kind != PseudoTruthKind::ExplicitSolution) {
    throw Error(ErrorCode::ConfigInvalid, "pseudo_truth: asymptotic checks need the explicit solution");
  }
  return mc_sweep(cfg, x0, ms, {harness_bandwidth(cfg, ms, x0)}, threads).front();
}

}  // namespace dekernel
