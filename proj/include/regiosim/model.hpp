#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regiosim/errors.hpp"
#include "regiosim/spatial.hpp"

namespace regiosim {

/// Economy-wide technology and allocation parameters, shared by all regions.
///
/// Output is Cobb-Douglas in industrial capital and effective labor;
/// knowledge production is Cobb-Douglas in R&D capital, R&D labor, the local
/// knowledge stock and a weighted geometric mean of the other regions'
/// stocks.
struct ModelParams {
  double alpha = 0.5;   // output elasticity of capital, 0 < alpha < 1
  double beta = 0.0;    // R&D-capital elasticity in knowledge production
  double gamma = 0.0;   // R&D-labor elasticity
  double theta = 0.0;   // own-knowledge elasticity, 0 <= theta < 1
  double B = 1.0;       // knowledge-production scale constant
  double a_K = 0.0;     // share of capital allocated to R&D, 0 <= a_K < 1
  double a_L = 0.0;     // share of labor allocated to R&D, 0 <= a_L < 1

  /// c_A = B * a_K^beta * a_L^gamma (std::pow(0,0) == 1, so zero shares are
  /// fine as long as the matching elasticity is zero).
  double c_A() const { return B * std::pow(a_K, beta) * std::pow(a_L, gamma); }
};

/// Per-region exogenous parameters.
struct RegionParams {
  double mu = 0.0;  // absorption elasticity of exterior knowledge, 0 <= mu < 1
  double s = 0.0;   // saving rate
  double n = 0.0;   // labor growth rate per unit time

  double c_K(const ModelParams& p) const {
    return s * std::pow(1.0 - p.a_K, p.alpha) * std::pow(1.0 - p.a_L, 1.0 - p.alpha);
  }
};

struct EconomyConfig {
  ModelParams params;
  std::vector<RegionParams> regions;
  SpatialWeights weights;

  Eigen::Index n_regions() const { return static_cast<Eigen::Index>(regions.size()); }

  Eigen::VectorXd labor_growth() const {
    Eigen::VectorXd n(n_regions());
    for (Eigen::Index i = 0; i < n.size(); ++i) n(i) = regions[static_cast<std::size_t>(i)].n;
    return n;
  }

  Eigen::VectorXd absorption() const {
    Eigen::VectorXd mu(n_regions());
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = regions[static_cast<std::size_t>(i)].mu;
    return mu;
  }
};

/// Log-level state of the economy: per-region natural logs of knowledge,
/// capital and labor. Keeping the state in logs preserves positivity of the
/// levels and keeps long-horizon integration away from overflow.
struct EconomyState {
  double t = 0.0;
  Eigen::VectorXd ln_A;
  Eigen::VectorXd ln_K;
  Eigen::VectorXd ln_L;

  Eigen::Index size() const { return ln_A.size(); }

  bool finite() const {
    return ln_A.allFinite() && ln_K.allFinite() && ln_L.allFinite();
  }
};

struct GrowthRates {
  Eigen::VectorXd g_A;
  Eigen::VectorXd g_K;
};

namespace detail_model {

inline void check_param(bool ok, const std::string& msg) {
  detail::require(ok, ErrorCode::ParameterOutOfRange, msg);
}

inline void check_state(const EconomyState& state, const EconomyConfig& config) {
  const Eigen::Index n = config.n_regions();
  detail::require(state.ln_A.size() == n && state.ln_K.size() == n && state.ln_L.size() == n,
                  ErrorCode::DimensionMismatch, "state dimension does not match config");
}

}  // namespace detail_model

/// Checks every parameter bound, the per-region convergence condition
/// beta + theta + mu_i < 1 (strict), the positivity of the derived constants
/// c_A and c_K, and the spatial-weights invariants. Returns the config
/// unchanged when everything holds.
inline EconomyConfig validate_config(const EconomyConfig& config) {
  using detail_model::check_param;
  const ModelParams& p = config.params;
  check_param(p.alpha > 0.0 && p.alpha < 1.0, "alpha must lie in (0,1)");
  check_param(p.beta >= 0.0, "beta must be >= 0");
  check_param(p.gamma >= 0.0, "gamma must be >= 0");
  check_param(p.theta >= 0.0 && p.theta < 1.0, "theta must lie in [0,1)");
  check_param(p.B > 0.0, "B must be > 0");
  check_param(p.a_K >= 0.0 && p.a_K < 1.0, "a_K must lie in [0,1)");
  check_param(p.a_L >= 0.0 && p.a_L < 1.0, "a_L must lie in [0,1)");
  check_param(p.c_A() > 0.0, "derived constant c_A = B*a_K^beta*a_L^gamma must be > 0");

  detail::require(!config.regions.empty(), ErrorCode::DimensionMismatch,
                  "config needs at least one region");
  for (std::size_t i = 0; i < config.regions.size(); ++i) {
    const RegionParams& r = config.regions[i];
    const std::string who = "region " + std::to_string(i + 1);
    check_param(r.mu >= 0.0 && r.mu < 1.0, who + ": mu must lie in [0,1)");
    check_param(r.s >= 0.0, who + ": saving rate must be >= 0");
    check_param(r.n >= 0.0, who + ": labor growth rate must be >= 0");
    check_param(r.c_K(p) > 0.0, who + ": derived constant c_K must be > 0 (saving rate 0?)");
    const double sum = p.beta + p.theta + r.mu;
    detail::require(sum < 1.0, ErrorCode::DivergentRegime,
                    who + ": beta + theta + mu = " + std::to_string(sum) +
                        " must be < 1 for convergent knowledge growth");
  }

  detail::require(config.weights.size() == config.n_regions(), ErrorCode::DimensionMismatch,
                  "weight matrix dimension does not match region count");
  config.weights.check();
  detail::require(config.weights.standardized, ErrorCode::ParameterOutOfRange,
                  "config weights must be row-standardized");
  return config;
}

/// Goods output per region, Y_i = [(1-a_K)K_i]^alpha * [A_i(1-a_L)L_i]^(1-alpha),
/// evaluated in log space and exponentiated.
inline Eigen::VectorXd output(const EconomyState& state, const EconomyConfig& config) {
  detail_model::check_state(state, config);
  const ModelParams& p = config.params;
  const double ln_cap_share = std::log(1.0 - p.a_K);
  const double ln_lab_share = std::log(1.0 - p.a_L);
  Eigen::ArrayXd ln_y = p.alpha * (ln_cap_share + state.ln_K.array()) +
                        (1.0 - p.alpha) * (state.ln_A.array() + ln_lab_share + state.ln_L.array());
  return ln_y.exp().matrix();
}

/// Instantaneous growth rates:
///   g_A_i = c_A K_i^beta L_i^gamma A_i^(theta-1) * prod_j A_j^(mu_i w_ij)
///   g_K_i = c_K_i (A_i L_i / K_i)^(1-alpha)
/// The spillover product is evaluated as mu_i * sum_j w_ij ln A_j.
inline GrowthRates growth_rates(const EconomyState& state, const EconomyConfig& config) {
  detail_model::check_state(state, config);
  const ModelParams& p = config.params;
  const Eigen::Index n = config.n_regions();
  const double ln_c_A = std::log(p.c_A());

  Eigen::VectorXd spill = config.weights.w * state.ln_A;
  GrowthRates out;
  out.g_A.resize(n);
  out.g_K.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RegionParams& r = config.regions[static_cast<std::size_t>(i)];
    const double ln_gA = ln_c_A + p.beta * state.ln_K(i) + p.gamma * state.ln_L(i) +
                         (p.theta - 1.0) * state.ln_A(i) + r.mu * spill(i);
    const double ln_gK = std::log(r.c_K(p)) +
                         (1.0 - p.alpha) * (state.ln_A(i) + state.ln_L(i) - state.ln_K(i));
    out.g_A(i) = std::exp(ln_gA);
    out.g_K(i) = std::exp(ln_gK);
  }
  return out;
}

}  // namespace regiosim
