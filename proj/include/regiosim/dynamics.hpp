#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "regiosim/errors.hpp"
#include "regiosim/model.hpp"

namespace regiosim {

/// Discrete record of a simulated path: times, log-states and the growth
/// rates evaluated analytically at each record (never finite-differenced).
struct Trajectory {
  std::vector<double> times;
  std::vector<EconomyState> states;
  std::vector<GrowthRates> rates;
  bool early_stopped = false;  // successive g_A change fell below tol

  std::size_t size() const { return times.size(); }
  const EconomyState& back_state() const { return states.back(); }
  const GrowthRates& back_rates() const { return rates.back(); }
};

struct EquilibriumRates {
  Eigen::VectorXd g_A_star;
  Eigen::VectorXd g_K_star;
};

namespace detail_dynamics {

struct Derivative {
  Eigen::VectorXd d_ln_A;
  Eigen::VectorXd d_ln_K;
  Eigen::VectorXd d_ln_L;
};

inline Derivative log_derivative(const EconomyState& state, const EconomyConfig& config) {
  GrowthRates g = growth_rates(state, config);
  detail::require(g.g_A.allFinite() && g.g_K.allFinite(), ErrorCode::NonFiniteState,
                  "non-finite growth rate at t=" + std::to_string(state.t));
  Derivative d;
  d.d_ln_A = g.g_A;
  d.d_ln_K = g.g_K;
  d.d_ln_L = config.labor_growth();
  return d;
}

inline EconomyState advanced(const EconomyState& s, const Derivative& d, double h) {
  EconomyState out = s;
  out.t = s.t + h;
  out.ln_A = s.ln_A + h * d.d_ln_A;
  out.ln_K = s.ln_K + h * d.d_ln_K;
  out.ln_L = s.ln_L + h * d.d_ln_L;
  return out;
}

}  // namespace detail_dynamics

/// One classical 4th-order Runge-Kutta step of the log-state system
///   d ln A_i/dt = g_A_i,  d ln K_i/dt = g_K_i,  d ln L_i/dt = n_i.
inline EconomyState step(const EconomyState& state, const EconomyConfig& config, double dt) {
  detail::require(dt >= 0.0, ErrorCode::ParameterOutOfRange, "dt must be >= 0");
  detail::require(state.finite(), ErrorCode::NonFiniteState, "state has non-finite entries");
  if (dt == 0.0) return state;

  using detail_dynamics::advanced;
  using detail_dynamics::log_derivative;
  const auto k1 = log_derivative(state, config);
  const auto k2 = log_derivative(advanced(state, k1, 0.5 * dt), config);
  const auto k3 = log_derivative(advanced(state, k2, 0.5 * dt), config);
  const auto k4 = log_derivative(advanced(state, k3, dt), config);

  EconomyState out = state;
  out.t = state.t + dt;
  const double w = dt / 6.0;
  out.ln_A = state.ln_A + w * (k1.d_ln_A + 2.0 * k2.d_ln_A + 2.0 * k3.d_ln_A + k4.d_ln_A);
  out.ln_K = state.ln_K + w * (k1.d_ln_K + 2.0 * k2.d_ln_K + 2.0 * k3.d_ln_K + k4.d_ln_K);
  out.ln_L = state.ln_L + w * (k1.d_ln_L + 2.0 * k2.d_ln_L + 2.0 * k3.d_ln_L + k4.d_ln_L);
  detail::require(out.finite(), ErrorCode::NonFiniteState,
                  "state became non-finite at t=" + std::to_string(out.t));
  return out;
}

/// Fixed-step integration from `initial` until the elapsed time reaches
/// `horizon`, or earlier when the largest successive change of any g_A_i
/// drops below `tol` (early stop recorded on the trajectory). The final step
/// may overshoot the horizon; dt is never shrunk, so trajectories are
/// bit-reproducible for a given (config, initial, dt).
inline Trajectory simulate(const EconomyConfig& config, const EconomyState& initial,
                           double dt, double horizon, double tol) {
  detail::require(dt > 0.0, ErrorCode::ParameterOutOfRange, "dt must be > 0");
  detail::require(horizon > 0.0, ErrorCode::ParameterOutOfRange, "horizon must be > 0");
  detail::require(tol >= 0.0, ErrorCode::ParameterOutOfRange, "tol must be >= 0");

  Trajectory traj;
  EconomyState s = initial;
  traj.times.push_back(s.t);
  traj.states.push_back(s);
  traj.rates.push_back(growth_rates(s, config));

  const double t0 = initial.t;
  while (s.t - t0 < horizon) {
    s = step(s, config, dt);
    GrowthRates g = growth_rates(s, config);
    const double delta = (g.g_A - traj.rates.back().g_A).cwiseAbs().maxCoeff();
    traj.times.push_back(s.t);
    traj.states.push_back(s);
    traj.rates.push_back(std::move(g));
    if (delta < tol) {
      traj.early_stopped = true;
      break;
    }
  }
  return traj;
}

/// Equilibrium growth rates from the linear system
///   ((1-theta-beta) I - diag(mu) W) G_A = (gamma+beta) n,
/// solved by dense LU with partial pivoting; g_K = g_A + n per region.
inline EquilibriumRates equilibrium_solve(const EconomyConfig& config) {
  const ModelParams& p = config.params;
  const Eigen::Index n = config.n_regions();
  const Eigen::VectorXd mu = config.absorption();
  const Eigen::VectorXd nvec = config.labor_growth();

  Eigen::MatrixXd m = -(mu.asDiagonal() * config.weights.w);
  m.diagonal().array() += 1.0 - p.theta - p.beta;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  detail::require(min_pivot >= 1e-12, ErrorCode::SingularSystem,
                  "equilibrium system is singular (pivot " + std::to_string(min_pivot) +
                      "); internal inconsistency for a validated config");
  EquilibriumRates out;
  out.g_A_star = lu.solve((p.gamma + p.beta) * nvec);
  out.g_K_star = out.g_A_star + nvec;
  (void)n;
  return out;
}

/// Closed-form steady growth rates for a homogeneous economy:
///   g_A* = (gamma+beta) n / (1-theta-beta-mu),  g_K* = g_A* + n.
inline std::pair<double, double> equilibrium_closed_form(const ModelParams& p, double mu,
                                                         double n) {
  detail::require(n >= 0.0, ErrorCode::ParameterOutOfRange, "n must be >= 0");
  const double denom = 1.0 - p.theta - p.beta - mu;
  detail::require(mu >= 0.0 && denom > 0.0, ErrorCode::DivergentRegime,
                  "beta + theta + mu must be < 1");
  const double g_A = (p.gamma + p.beta) * n / denom;
  return {g_A, g_A + n};
}

/// Two-region closed forms with heterogeneous labor growth and absorption;
/// shared denominator (1-theta-beta)^2 - mu1*mu2.
inline EquilibriumRates equilibrium_two_region(const ModelParams& p, double n1, double n2,
                                               double mu1, double mu2) {
  const double d = 1.0 - p.theta - p.beta;
  detail::require(mu1 >= 0.0 && mu1 < d && mu2 >= 0.0 && mu2 < d, ErrorCode::DivergentRegime,
                  "each mu must lie in [0, 1-theta-beta)");
  const double denom = d * d - mu1 * mu2;
  const double scale = (p.gamma + p.beta) / denom;
  EquilibriumRates out;
  out.g_A_star.resize(2);
  out.g_K_star.resize(2);
  out.g_A_star(0) = (d * n1 + mu1 * n2) * scale;
  out.g_A_star(1) = (d * n2 + mu2 * n1) * scale;
  out.g_K_star(0) = out.g_A_star(0) + n1;
  out.g_K_star(1) = out.g_A_star(1) + n2;
  return out;
}

/// One scenario of a parameter sweep.
struct SweepScenario {
  EconomyConfig config;
  EconomyState initial;
};

/// Terminal growth rates for a batch of scenarios. Each scenario is a pure
/// function of its inputs and lands in its own output slot, so the result is
/// identical for any thread count.
inline std::vector<GrowthRates> sweep_terminal_rates(const std::vector<SweepScenario>& scenarios,
                                                     double dt, double horizon, double tol,
                                                     int n_threads = 1) {
  detail::require(n_threads >= 1, ErrorCode::ParameterOutOfRange, "n_threads must be >= 1");
  std::vector<GrowthRates> out(scenarios.size());
  auto worker = [&](std::size_t first, std::size_t last) {
    for (std::size_t k = first; k < last; ++k) {
      out[k] = simulate(scenarios[k].config, scenarios[k].initial, dt, horizon, tol).back_rates();
    }
  };
  if (n_threads == 1 || scenarios.size() <= 1) {
    worker(0, scenarios.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (scenarios.size() + static_cast<std::size_t>(n_threads) - 1) /
                              static_cast<std::size_t>(n_threads);
    for (std::size_t first = 0; first < scenarios.size(); first += chunk) {
      pool.emplace_back(worker, first, std::min(scenarios.size(), first + chunk));
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

/// Truncated Neumann-series approximation of the equilibrium,
///   g_A_i ~= (gamma+beta) n / (1-theta-beta) * (1 + sum_{r=1..r_max} rho^r sum_j (W^r)_ij),
/// with rho = mu/(1-theta-beta). Matrix powers are formed explicitly. Only
/// stated for a common (mu, n) across regions; heterogeneous inputs are
/// rejected rather than extrapolated.
inline Eigen::VectorXd neumann_equilibrium(const EconomyConfig& config, int r_max) {
  detail::require(r_max >= 0, ErrorCode::ParameterOutOfRange, "r_max must be >= 0");
  const ModelParams& p = config.params;
  const double mu = config.regions.front().mu;
  const double n = config.regions.front().n;
  for (const RegionParams& r : config.regions) {
    detail::require(r.mu == mu, ErrorCode::HeterogeneousMu,
                    "Neumann form requires a common mu across regions");
    detail::require(r.n == n, ErrorCode::HeterogeneousMu,
                    "Neumann form requires a common n across regions");
  }
  const double d = 1.0 - p.theta - p.beta;
  detail::require(d - mu > 0.0, ErrorCode::DivergentRegime, "beta + theta + mu must be < 1");
  const double lead = (p.gamma + p.beta) * n / d;
  const double rho = mu / d;

  const Eigen::Index nr = config.n_regions();
  Eigen::VectorXd acc = Eigen::VectorXd::Ones(nr);
  Eigen::MatrixXd wpow = Eigen::MatrixXd::Identity(nr, nr);
  double rho_r = 1.0;
  for (int r = 1; r <= r_max; ++r) {
    wpow = wpow * config.weights.w;
    rho_r *= rho;
    acc += rho_r * wpow.rowwise().sum();
  }
  return lead * acc;
}

}  // namespace regiosim
