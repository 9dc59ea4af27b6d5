#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dekernel/bandwidth.hpp"
#include "dekernel/dataset.hpp"
#include "dekernel/error.hpp"
#include "dekernel/simlab.hpp"
#include "dekernel/version.hpp"

namespace dekernel::io {

using json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, where + ": cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << content;
}

/// Parses `x,y` CSV text. Lines starting with '#' and blank lines are skipped;
/// the first remaining line must be the header.
inline Dataset parse_csv(std::string_view text, Scale scale, const std::string& source = "<csv>") {
  Dataset data;
  data.scale = scale;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = source + ":" + std::to_string(line_no);
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorCode::ParseError, where + ": expected exactly two comma-separated fields");
    }
    if (!header_seen) {
      if (line != "x,y") throw Error(ErrorCode::ParseError, where + ": header must be 'x,y'");
      header_seen = true;
    } else {
      data.x.push_back(parse_double(line.substr(0, comma), where));
      data.y.push_back(parse_double(line.substr(comma + 1), where));
    }
    if (end == text.size()) break;
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, source + ": missing 'x,y' header");
  try {
    data.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what());
  }
  return data;
}

inline Dataset read_csv(const std::filesystem::path& path, Scale scale) {
  return parse_csv(read_file(path), scale, path.string());
}

inline std::string dataset_csv(const Dataset& data, const std::string& header_comment) {
  std::string out = "# " + header_comment + "\nx,y\n";
  for (std::size_t i = 0; i < data.size(); ++i) out += format_double(data.x[i]) + "," + format_double(data.y[i]) + "\n";
  return out;
}

inline std::string tool_banner(std::string_view command) {
  return std::string("dekernel ") + kVersion + " " + std::string(command);
}

inline const char* scale_name(Scale s) { return s == Scale::Log ? "log" : "linear"; }

inline std::optional<Scale> parse_scale(std::string_view s) {
  if (s == "log") return Scale::Log;
  if (s == "linear") return Scale::Linear;
  return std::nullopt;
}

/// JSON number that survives NaN (emitted as null).
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Scenario configuration

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, "at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) config_error(path + "/" + key, "unknown key");
  }
}

inline double get_number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) config_error(path + "/" + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) config_error(path + "/" + key, "expected a number");
  return v.get<double>();
}

inline double get_number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.contains(key) ? get_number(obj, key, path) : fallback;
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) config_error(path + "/" + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_string()) config_error(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

inline long long get_integer(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) config_error(path + "/" + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) config_error(path + "/" + key, "expected an integer");
  return v.get<long long>();
}

inline std::vector<double> get_number_list(const json& v, const std::string& path) {
  if (!v.is_array()) config_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) config_error(path + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline BandwidthSpec parse_bandwidth(const json& j, const std::string& path) {
  check_keys(j, path, {"mode", "h", "grid"});
  BandwidthSpec bw;
  const auto mode = get_string(j, "mode", path);
  if (mode == "fixed") {
    bw.mode = BandwidthMode::Fixed;
    bw.h = get_number(j, "h", path);
  } else if (mode == "loocv") {
    bw.mode = BandwidthMode::Loocv;
    if (j.contains("grid")) bw.grid = get_number_list(j.at("grid"), path + "/grid");
  } else if (mode == "theorem3") {
    bw.mode = BandwidthMode::AsymptoticOptimal;
  } else {
    config_error(path + "/mode", "expected fixed, loocv or theorem3");
  }
  return bw;
}

inline MethodSpec parse_method(const json& j, const std::string& path) {
  if (j.is_string()) {
    auto preset = method_preset(j.get<std::string>());
    if (!preset) config_error(path, "unknown method '" + j.get<std::string>() + "'");
    return *preset;
  }
  check_keys(j, path, {"name", "family", "degree", "scale", "bandwidth"});
  const auto name = get_string(j, "name", path);
  MethodSpec ms;
  if (auto preset = method_preset(name)) {
    ms = *preset;
  } else {
    ms.label = name;
    if (!j.contains("family")) config_error(path + "/family", "required for non-preset method names");
  }
  if (j.contains("family")) {
    const auto fam = get_string(j, "family", path);
    if (fam == "local_poly") ms.family = MethodFamily::LocalPoly;
    else if (fam == "de") ms.family = MethodFamily::DeConstrained;
    else if (fam == "nls") ms.family = MethodFamily::Nls;
    else config_error(path + "/family", "expected local_poly, de or nls");
  }
  if (j.contains("degree")) ms.degree = static_cast<int>(get_integer(j, "degree", path));
  if (j.contains("scale")) {
    const auto s = parse_scale(get_string(j, "scale", path));
    if (!s) config_error(path + "/scale", "expected log or linear");
    ms.scale = *s;
  }
  if (j.contains("bandwidth")) ms.bandwidth = parse_bandwidth(j.at("bandwidth"), path + "/bandwidth");
  return ms;
}

}  // namespace detail

/// Builds a ScenarioConfig from JSON. Relative `data_csv` paths resolve against `base_dir`.
inline ScenarioConfig parse_scenario(const json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  check_keys(j, "", {"model", "n", "design", "noise", "removed_indices", "replicates", "master_seed", "kernel",
                     "methods", "pseudo_truth", "parameters", "nls_refine_alpha", "comment"});
  ScenarioConfig cfg;

  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, "/model", {"alpha", "lambda", "g0"});
    try {
      cfg.model = QuasiExpModel(get_number(m, "alpha", "/model"), get_number(m, "lambda", "/model"),
                                get_number_or(m, "g0", "/model", 1.0));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigInvalid) throw;
      config_error("/model", e.what());
    }
  }

  if (j.contains("pseudo_truth")) {
    const auto& p = j.at("pseudo_truth");
    check_keys(p, "/pseudo_truth", {"kind", "bandwidth", "data_csv", "data", "scale"});
    const auto kind = get_string(p, "kind", "/pseudo_truth");
    if (kind == "explicit_solution") {
      cfg.pseudo_truth.kind = PseudoTruthKind::ExplicitSolution;
    } else if (kind == "local_linear_on_full_data") {
      cfg.pseudo_truth.kind = PseudoTruthKind::LocalLinearOnFullData;
      cfg.pseudo_truth.bandwidth = get_number(p, "bandwidth", "/pseudo_truth");
      Scale scale = Scale::Log;
      if (p.contains("scale")) {
        const auto s = parse_scale(get_string(p, "scale", "/pseudo_truth"));
        if (!s) config_error("/pseudo_truth/scale", "expected log or linear");
        scale = *s;
      }
      Dataset base;
      if (p.contains("data_csv")) {
        const auto rel = get_string(p, "data_csv", "/pseudo_truth");
        std::filesystem::path path(rel);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        base = read_csv(path, scale);
      } else if (p.contains("data")) {
        const auto& d = p.at("data");
        check_keys(d, "/pseudo_truth/data", {"x", "y"});
        if (!d.contains("x") || !d.contains("y")) config_error("/pseudo_truth/data", "needs x and y");
        base.x = get_number_list(d.at("x"), "/pseudo_truth/data/x");
        base.y = get_number_list(d.at("y"), "/pseudo_truth/data/y");
        base.scale = scale;
        try {
          base.validate();
        } catch (const Error& e) {
          config_error("/pseudo_truth/data", e.what());
        }
      } else {
        config_error("/pseudo_truth", "needs data_csv or data");
      }
      // Stored on the log scale.
      cfg.pseudo_truth.base = with_responses(base, working_responses(base, Scale::Log), Scale::Log);
    } else {
      config_error("/pseudo_truth/kind", "expected explicit_solution or local_linear_on_full_data");
    }
  }

  if (j.contains("design")) {
    const auto& d = j.at("design");
    check_keys(d, "/design", {"kind", "a", "b", "points"});
    const auto kind = get_string(d, "kind", "/design");
    if (kind == "equispaced" || kind == "uniform_random") {
      cfg.design.kind = kind == "equispaced" ? DesignKind::Equispaced : DesignKind::UniformRandom;
      cfg.design.a = get_number(d, "a", "/design");
      cfg.design.b = get_number(d, "b", "/design");
    } else if (kind == "explicit") {
      cfg.design.kind = DesignKind::Explicit;
      if (!d.contains("points")) config_error("/design/points", "missing");
      cfg.design.points = get_number_list(d.at("points"), "/design/points");
    } else {
      config_error("/design/kind", "expected equispaced, uniform_random or explicit");
    }
  } else if (cfg.pseudo_truth.kind == PseudoTruthKind::LocalLinearOnFullData) {
    cfg.design.kind = DesignKind::Explicit;
    cfg.design.points = cfg.pseudo_truth.base.x;
  } else {
    config_error("/design", "missing");
  }
  if (j.contains("n")) cfg.n = static_cast<int>(get_integer(j, "n", ""));
  if (cfg.design.kind == DesignKind::Explicit) cfg.n = static_cast<int>(cfg.design.points.size());

  if (j.contains("noise")) {
    const auto& nz = j.at("noise");
    check_keys(nz, "/noise", {"sd", "model"});
    cfg.noise_sd = get_number(nz, "sd", "/noise");
    if (nz.contains("model")) {
      const auto m = get_string(nz, "model", "/noise");
      if (m == "lognormal") cfg.noise_model = NoiseModel::LogNormal;
      else if (m == "additive_linear") cfg.noise_model = NoiseModel::AdditiveLinear;
      else config_error("/noise/model", "expected lognormal or additive_linear");
    }
  }

  if (j.contains("removed_indices")) {
    const auto& r = j.at("removed_indices");
    if (!r.is_array()) config_error("/removed_indices", "expected an array of integers");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i].is_number_integer()) config_error("/removed_indices/" + std::to_string(i), "expected an integer");
      cfg.removed_indices.push_back(r[i].get<int>());
    }
  }
  if (j.contains("replicates")) cfg.replicates = static_cast<int>(get_integer(j, "replicates", ""));
  if (j.contains("master_seed")) {
    const auto& s = j.at("master_seed");
    if (!s.is_number_integer()) config_error("/master_seed", "expected an integer");
    cfg.master_seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<long long>());
  }
  if (j.contains("kernel")) {
    const auto k = parse_kernel(get_string(j, "kernel", ""));
    if (!k) config_error("/kernel", "expected epanechnikov, biweight or uniform");
    cfg.kernel = *k;
  }
  if (j.contains("methods")) {
    const auto& ms = j.at("methods");
    if (!ms.is_array()) config_error("/methods", "expected an array");
    for (std::size_t i = 0; i < ms.size(); ++i) cfg.methods.push_back(parse_method(ms[i], "/methods/" + std::to_string(i)));
  }
  if (j.contains("parameters")) {
    const auto p = get_string(j, "parameters", "");
    if (p == "per_replicate") cfg.param_source = ParamSource::PerReplicate;
    else if (p == "fixed_from_base") cfg.param_source = ParamSource::FixedFromBase;
    else if (p == "true") cfg.param_source = ParamSource::True;
    else config_error("/parameters", "expected per_replicate, fixed_from_base or true");
  }
  if (j.contains("nls_refine_alpha")) {
    if (!j.at("nls_refine_alpha").is_boolean()) config_error("/nls_refine_alpha", "expected a boolean");
    cfg.nls_refine_alpha = j.at("nls_refine_alpha").get<bool>();
  }

  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("at /") + (e.what() + std::string_view("ConfigInvalid: ").size()));
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

inline json bandwidth_to_json(const BandwidthSpec& bw) {
  json j;
  switch (bw.mode) {
    case BandwidthMode::Fixed: j["mode"] = "fixed"; j["h"] = bw.h; break;
    case BandwidthMode::Loocv:
      j["mode"] = "loocv";
      if (!bw.grid.empty()) j["grid"] = bw.grid;
      break;
    case BandwidthMode::AsymptoticOptimal: j["mode"] = "theorem3"; break;
  }
  return j;
}

inline json method_to_json(const MethodSpec& ms) {
  json j;
  j["name"] = ms.label;
  j["family"] = ms.family == MethodFamily::LocalPoly ? "local_poly" : ms.family == MethodFamily::DeConstrained ? "de" : "nls";
  if (ms.family != MethodFamily::Nls) {
    j["degree"] = ms.degree;
    if (ms.family == MethodFamily::DeConstrained) j["scale"] = scale_name(ms.scale);
    j["bandwidth"] = bandwidth_to_json(ms.bandwidth);
  }
  return j;
}

/// Fully resolved configuration; parsing it back yields an equivalent config.
inline json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["model"] = {{"alpha", cfg.model.alpha()}, {"lambda", cfg.model.lambda()}, {"g0", cfg.model.g0()}};
  j["n"] = cfg.design_size();
  json d;
  switch (cfg.design.kind) {
    case DesignKind::Equispaced: d = {{"kind", "equispaced"}, {"a", cfg.design.a}, {"b", cfg.design.b}}; break;
    case DesignKind::UniformRandom: d = {{"kind", "uniform_random"}, {"a", cfg.design.a}, {"b", cfg.design.b}}; break;
    case DesignKind::Explicit: d = {{"kind", "explicit"}, {"points", cfg.design.points}}; break;
  }
  j["design"] = d;
  j["noise"] = {{"sd", cfg.noise_sd}, {"model", cfg.noise_model == NoiseModel::LogNormal ? "lognormal" : "additive_linear"}};
  j["removed_indices"] = cfg.removed_indices;
  j["replicates"] = cfg.replicates;
  j["master_seed"] = cfg.master_seed;
  j["kernel"] = std::string(cfg.kernel.name());
  json methods = json::array();
  for (const auto& ms : cfg.methods) methods.push_back(method_to_json(ms));
  j["methods"] = methods;
  if (cfg.pseudo_truth.kind == PseudoTruthKind::ExplicitSolution) {
    j["pseudo_truth"] = {{"kind", "explicit_solution"}};
  } else {
    j["pseudo_truth"] = {{"kind", "local_linear_on_full_data"},
                         {"bandwidth", cfg.pseudo_truth.bandwidth},
                         {"scale", "log"},
                         {"data", {{"x", cfg.pseudo_truth.base.x}, {"y", cfg.pseudo_truth.base.y}}}};
  }
  const char* ps = cfg.param_source == ParamSource::PerReplicate ? "per_replicate"
                   : cfg.param_source == ParamSource::FixedFromBase ? "fixed_from_base" : "true";
  j["parameters"] = ps;
  j["nls_refine_alpha"] = cfg.nls_refine_alpha;
  return j;
}

// ---------------------------------------------------------------------------
// Study reports

inline json report_to_json(const StudyReport& report) {
  json j;
  j["tool"] = "dekernel";
  j["version"] = kVersion;
  j["command"] = "compare";
  j["seed"] = report.config.master_seed;
  j["config"] = scenario_to_json(report.config);
  json summary = json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"method", s.label},
                       {"mean_ase_log", num(s.mean_ase_log)},
                       {"mean_ase_original", num(s.mean_ase_original)},
                       {"failures", s.failures},
                       {"not_converged", s.not_converged}});
  }
  j["summary"] = summary;
  json records = json::array();
  for (const auto& rec : report.records) {
    json r;
    r["replicate"] = rec.replicate;
    r["alpha_hat"] = num(rec.alpha_hat);
    r["lambda_hat"] = num(rec.lambda_hat);
    if (!rec.param_message.empty()) r["param_message"] = rec.param_message;
    json outs = json::array();
    for (std::size_t m = 0; m < rec.outcomes.size(); ++m) {
      const auto& o = rec.outcomes[m];
      json oj;
      oj["method"] = report.config.methods[m].label;
      if (o.failed) {
        oj["failed"] = true;
        oj["message"] = o.message;
      } else {
        oj["ase_log"] = o.ase_log;
        oj["ase_original"] = o.ase_original;
        oj["bandwidth"] = num(o.bandwidth);
        oj["converged"] = o.converged;
      }
      outs.push_back(oj);
    }
    r["methods"] = outs;
    records.push_back(r);
  }
  j["replicates"] = records;
  return j;
}

inline std::string config_comment(const ScenarioConfig& cfg) {
  return tool_banner("compare") + " seed=" + std::to_string(cfg.master_seed) + " config=" + scenario_to_json(cfg).dump();
}

/// Long format: one row per (method, scale).
inline std::string report_summary_csv(const StudyReport& report) {
  std::string out = "# " + config_comment(report.config) + "\nmethod,scale,mean_ase,failures\n";
  for (const auto& s : report.summary) {
    out += s.label + ",log," + format_double(s.mean_ase_log) + "," + std::to_string(s.failures) + "\n";
    out += s.label + ",original," + format_double(s.mean_ase_original) + "," + std::to_string(s.failures) + "\n";
  }
  return out;
}

/// Wide format: one row per method, one column per scale.
inline std::string report_table_csv(const StudyReport& report) {
  std::string out = "# " + config_comment(report.config) + "\nmethod,log_scale,original_scale,failures\n";
  for (const auto& s : report.summary) {
    out += s.label + "," + format_double(s.mean_ase_log) + "," + format_double(s.mean_ase_original) + "," +
           std::to_string(s.failures) + "\n";
  }
  return out;
}

}  // namespace dekernel::io
