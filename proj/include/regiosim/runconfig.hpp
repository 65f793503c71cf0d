#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "regiosim/errors.hpp"
#include "regiosim/model.hpp"

namespace regiosim {

/// Weight-matrix source: either coordinates (haversine) or an explicit
/// distance matrix, which takes precedence when both are given.
struct WeightSource {
  std::optional<std::string> coordinates_path;
  std::optional<std::string> distances_path;
};

struct IntegrationConfig {
  double dt = 0.05;
  double horizon = 3000.0;
  double tol = 1e-8;
};

/// Initial log-state; scalars broadcast across regions.
struct InitialConfig {
  std::vector<double> ln_A{0.0};
  std::vector<double> ln_K{0.0};
  std::vector<double> ln_L{0.0};
  bool broadcast_A = true, broadcast_K = true, broadcast_L = true;
};

struct EstimatorConfig {
  std::string mode = "sfa";  // sfa | fe | re | hausman | bands
  int n_starts = 3;
  int max_iter = 300;
  double tol = 1e-6;
  bool estimate_mu_trunc = true;
};

struct StocksConfig {
  double delta = 0.10;
  double tau = 0.0714;
  std::optional<std::pair<int, int>> growth_span;  // defaults to the full panel span
  bool plus_one = false;                           // ln(P+1) substitution for zero lead patents
};

struct MoranConfig {
  std::string method = "permutation";  // analytic | permutation
  int permutations = 999;
  std::optional<std::string> values_path;
};

struct ConvergenceConfig {
  std::optional<double> gstar;
};

struct PanelSource {
  std::optional<std::string> raw_path;    // region,year,patents,... schema
  std::optional<std::string> built_path;  // region,year,y,<regressors> schema
};

struct SynthDynamicsConfig {
  double dt = 0.05;
  int horizon_years = 40;
  double obs_noise_sd = 0.0;
};

struct SynthSfaConfig {
  int n_regions = 100;
  int t_periods = 15;
  std::vector<double> beta{0.0, 1.0};
  double sigma_sq = 0.25;
  double gamma_var = 0.6;
  double eta = 0.02;
  double mu_trunc = 0.0;
  std::vector<double> x_mean{0.0};
  std::vector<double> x_sd{1.0};
};

struct SynthConfig {
  std::string mode = "dynamics";  // dynamics | sfa
  SynthDynamicsConfig dynamics;
  SynthSfaConfig sfa;
};

/// Parsed and validated run configuration. Relative input paths are resolved
/// against the config file's directory.
struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<std::string> out_dir;
  std::optional<ModelParams> model;
  std::vector<RegionParams> regions;
  std::vector<std::string> region_ids;  // optional explicit ids
  std::optional<WeightSource> weights;
  std::vector<double> bands;
  IntegrationConfig integration;
  InitialConfig initial;
  EstimatorConfig estimator;
  StocksConfig stocks;
  MoranConfig moran;
  ConvergenceConfig convergence;
  PanelSource panel;
  SynthConfig synth;

  std::string config_dir;  // directory of the config file, for path resolution

  std::string resolve(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.is_absolute() || config_dir.empty()) return path;
    return (std::filesystem::path(config_dir) / p).string();
  }
};

namespace detail_config {

using nlohmann::json;

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
  detail::fail(ErrorCode::ConfigError, path + ": " + what);
}

inline void expect_keys(const json& j, const std::string& path,
                        const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) bad(path + "." + it.key(), "unknown key");
  }
}

inline double num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<int>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> num_array(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline ModelParams parse_model(const json& j, const std::string& path) {
  expect_keys(j, path, {"alpha", "beta", "gamma", "theta", "B", "a_K", "a_L"});
  ModelParams p;
  for (const char* key : {"alpha", "beta", "gamma", "theta", "B", "a_K", "a_L"}) {
    if (!j.contains(key)) bad(path + "." + key, "missing required key");
  }
  p.alpha = num(j["alpha"], path + ".alpha");
  p.beta = num(j["beta"], path + ".beta");
  p.gamma = num(j["gamma"], path + ".gamma");
  p.theta = num(j["theta"], path + ".theta");
  p.B = num(j["B"], path + ".B");
  p.a_K = num(j["a_K"], path + ".a_K");
  p.a_L = num(j["a_L"], path + ".a_L");
  return p;
}

inline void parse_regions(const json& j, const std::string& path, RunConfig& cfg) {
  if (j.is_object()) {
    expect_keys(j, path, {"count", "mu", "s", "n"});
    for (const char* key : {"count", "mu", "s", "n"}) {
      if (!j.contains(key)) bad(path + "." + key, "missing required key");
    }
    const int count = integer(j["count"], path + ".count");
    if (count < 1) bad(path + ".count", "must be >= 1");
    RegionParams r{num(j["mu"], path + ".mu"), num(j["s"], path + ".s"),
                   num(j["n"], path + ".n")};
    cfg.regions.assign(static_cast<std::size_t>(count), r);
    return;
  }
  if (!j.is_array() || j.empty()) bad(path, "expected an object or a non-empty array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    expect_keys(j[i], p, {"id", "mu", "s", "n"});
    for (const char* key : {"mu", "s", "n"}) {
      if (!j[i].contains(key)) bad(p + "." + key, "missing required key");
    }
    cfg.regions.push_back({num(j[i]["mu"], p + ".mu"), num(j[i]["s"], p + ".s"),
                           num(j[i]["n"], p + ".n")});
    if (j[i].contains("id")) cfg.region_ids.push_back(str(j[i]["id"], p + ".id"));
  }
  if (!cfg.region_ids.empty() && cfg.region_ids.size() != cfg.regions.size()) {
    bad(path, "either every region carries an id or none does");
  }
}

inline void parse_initial_entry(const json& j, const std::string& path, std::vector<double>& out,
                                bool& broadcast) {
  if (j.is_number()) {
    out = {j.get<double>()};
    broadcast = true;
    return;
  }
  out = num_array(j, path);
  broadcast = false;
  if (out.empty()) bad(path, "array must be non-empty");
}

}  // namespace detail_config

/// Parses a run-config JSON document with strict validation: unknown keys are
/// rejected anywhere in the tree and every diagnostic carries the JSON path.
/// The accepted layout is published in docs/runconfig.schema.json.
inline RunConfig parse_run_config(const nlohmann::json& root, const std::string& config_dir) {
  using namespace detail_config;
  const std::string top = "$";
  expect_keys(root, top,
              {"seed", "out_dir", "model", "regions", "weights", "bands", "integration",
               "initial", "estimator", "stocks", "moran", "convergence", "panel", "synth"});

  RunConfig cfg;
  cfg.config_dir = config_dir;
  if (root.contains("seed")) {
    const auto& j = root["seed"];
    if (!j.is_number_unsigned()) bad(top + ".seed", "expected an unsigned integer");
    cfg.seed = j.get<std::uint64_t>();
  }
  if (root.contains("out_dir")) cfg.out_dir = str(root["out_dir"], top + ".out_dir");
  if (root.contains("model")) cfg.model = parse_model(root["model"], top + ".model");
  if (root.contains("regions")) parse_regions(root["regions"], top + ".regions", cfg);

  if (root.contains("weights")) {
    const auto& j = root["weights"];
    expect_keys(j, top + ".weights", {"coordinates", "distances"});
    WeightSource ws;
    if (j.contains("coordinates")) ws.coordinates_path = str(j["coordinates"], top + ".weights.coordinates");
    if (j.contains("distances")) ws.distances_path = str(j["distances"], top + ".weights.distances");
    if (!ws.coordinates_path && !ws.distances_path) {
      bad(top + ".weights", "needs 'coordinates' or 'distances'");
    }
    cfg.weights = ws;
  }

  if (root.contains("bands")) {
    cfg.bands = num_array(root["bands"], top + ".bands");
    for (std::size_t i = 0; i + 1 < cfg.bands.size(); ++i) {
      if (!(cfg.bands[i] < cfg.bands[i + 1])) bad(top + ".bands", "must be strictly increasing");
    }
  }

  if (root.contains("integration")) {
    const auto& j = root["integration"];
    expect_keys(j, top + ".integration", {"dt", "horizon", "tol"});
    if (j.contains("dt")) cfg.integration.dt = num(j["dt"], top + ".integration.dt");
    if (j.contains("horizon")) cfg.integration.horizon = num(j["horizon"], top + ".integration.horizon");
    if (j.contains("tol")) cfg.integration.tol = num(j["tol"], top + ".integration.tol");
  }

  if (root.contains("initial")) {
    const auto& j = root["initial"];
    expect_keys(j, top + ".initial", {"ln_A", "ln_K", "ln_L"});
    if (j.contains("ln_A"))
      parse_initial_entry(j["ln_A"], top + ".initial.ln_A", cfg.initial.ln_A, cfg.initial.broadcast_A);
    if (j.contains("ln_K"))
      parse_initial_entry(j["ln_K"], top + ".initial.ln_K", cfg.initial.ln_K, cfg.initial.broadcast_K);
    if (j.contains("ln_L"))
      parse_initial_entry(j["ln_L"], top + ".initial.ln_L", cfg.initial.ln_L, cfg.initial.broadcast_L);
  }

  if (root.contains("estimator")) {
    const auto& j = root["estimator"];
    expect_keys(j, top + ".estimator", {"mode", "n_starts", "max_iter", "tol", "estimate_mu_trunc"});
    if (j.contains("mode")) {
      cfg.estimator.mode = str(j["mode"], top + ".estimator.mode");
      const std::set<std::string> modes{"sfa", "fe", "re", "hausman", "bands"};
      if (!modes.count(cfg.estimator.mode)) bad(top + ".estimator.mode", "must be one of sfa|fe|re|hausman|bands");
    }
    if (j.contains("n_starts")) cfg.estimator.n_starts = integer(j["n_starts"], top + ".estimator.n_starts");
    if (j.contains("max_iter")) cfg.estimator.max_iter = integer(j["max_iter"], top + ".estimator.max_iter");
    if (j.contains("tol")) cfg.estimator.tol = num(j["tol"], top + ".estimator.tol");
    if (j.contains("estimate_mu_trunc"))
      cfg.estimator.estimate_mu_trunc = boolean(j["estimate_mu_trunc"], top + ".estimator.estimate_mu_trunc");
  }

  if (root.contains("stocks")) {
    const auto& j = root["stocks"];
    expect_keys(j, top + ".stocks", {"delta", "tau", "growth_span", "plus_one"});
    if (j.contains("delta")) cfg.stocks.delta = num(j["delta"], top + ".stocks.delta");
    if (j.contains("tau")) cfg.stocks.tau = num(j["tau"], top + ".stocks.tau");
    if (j.contains("growth_span")) {
      auto span = num_array(j["growth_span"], top + ".stocks.growth_span");
      if (span.size() != 2) bad(top + ".stocks.growth_span", "expected [first_year, last_year]");
      cfg.stocks.growth_span = {static_cast<int>(span[0]), static_cast<int>(span[1])};
    }
    if (j.contains("plus_one")) cfg.stocks.plus_one = boolean(j["plus_one"], top + ".stocks.plus_one");
  }

  if (root.contains("moran")) {
    const auto& j = root["moran"];
    expect_keys(j, top + ".moran", {"method", "permutations", "values"});
    if (j.contains("method")) {
      cfg.moran.method = str(j["method"], top + ".moran.method");
      if (cfg.moran.method != "analytic" && cfg.moran.method != "permutation") {
        bad(top + ".moran.method", "must be 'analytic' or 'permutation'");
      }
    }
    if (j.contains("permutations"))
      cfg.moran.permutations = integer(j["permutations"], top + ".moran.permutations");
    if (j.contains("values")) cfg.moran.values_path = str(j["values"], top + ".moran.values");
  }

  if (root.contains("convergence")) {
    const auto& j = root["convergence"];
    expect_keys(j, top + ".convergence", {"gstar"});
    if (j.contains("gstar")) cfg.convergence.gstar = num(j["gstar"], top + ".convergence.gstar");
  }

  if (root.contains("panel")) {
    const auto& j = root["panel"];
    expect_keys(j, top + ".panel", {"raw", "built"});
    if (j.contains("raw")) cfg.panel.raw_path = str(j["raw"], top + ".panel.raw");
    if (j.contains("built")) cfg.panel.built_path = str(j["built"], top + ".panel.built");
  }

  if (root.contains("synth")) {
    const auto& j = root["synth"];
    expect_keys(j, top + ".synth", {"mode", "dynamics", "sfa"});
    if (j.contains("mode")) {
      cfg.synth.mode = str(j["mode"], top + ".synth.mode");
      if (cfg.synth.mode != "dynamics" && cfg.synth.mode != "sfa") {
        bad(top + ".synth.mode", "must be 'dynamics' or 'sfa'");
      }
    }
    if (j.contains("dynamics")) {
      const auto& d = j["dynamics"];
      expect_keys(d, top + ".synth.dynamics", {"dt", "horizon_years", "obs_noise_sd"});
      if (d.contains("dt")) cfg.synth.dynamics.dt = num(d["dt"], top + ".synth.dynamics.dt");
      if (d.contains("horizon_years"))
        cfg.synth.dynamics.horizon_years = integer(d["horizon_years"], top + ".synth.dynamics.horizon_years");
      if (d.contains("obs_noise_sd"))
        cfg.synth.dynamics.obs_noise_sd = num(d["obs_noise_sd"], top + ".synth.dynamics.obs_noise_sd");
    }
    if (j.contains("sfa")) {
      const auto& s = j["sfa"];
      expect_keys(s, top + ".synth.sfa",
                  {"n_regions", "t_periods", "beta", "sigma_sq", "gamma_var", "eta", "mu_trunc",
                   "x_mean", "x_sd"});
      if (s.contains("n_regions")) cfg.synth.sfa.n_regions = integer(s["n_regions"], top + ".synth.sfa.n_regions");
      if (s.contains("t_periods")) cfg.synth.sfa.t_periods = integer(s["t_periods"], top + ".synth.sfa.t_periods");
      if (s.contains("beta")) cfg.synth.sfa.beta = num_array(s["beta"], top + ".synth.sfa.beta");
      if (s.contains("sigma_sq")) cfg.synth.sfa.sigma_sq = num(s["sigma_sq"], top + ".synth.sfa.sigma_sq");
      if (s.contains("gamma_var")) cfg.synth.sfa.gamma_var = num(s["gamma_var"], top + ".synth.sfa.gamma_var");
      if (s.contains("eta")) cfg.synth.sfa.eta = num(s["eta"], top + ".synth.sfa.eta");
      if (s.contains("mu_trunc")) cfg.synth.sfa.mu_trunc = num(s["mu_trunc"], top + ".synth.sfa.mu_trunc");
      if (s.contains("x_mean")) cfg.synth.sfa.x_mean = num_array(s["x_mean"], top + ".synth.sfa.x_mean");
      if (s.contains("x_sd")) cfg.synth.sfa.x_sd = num_array(s["x_sd"], top + ".synth.sfa.x_sd");
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), ErrorCode::ConfigError, "cannot open config " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    detail::fail(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return parse_run_config(root, std::filesystem::path(path).parent_path().string());
}

}  // namespace regiosim
