#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regiosim/errors.hpp"
#include "regiosim/optimize.hpp"
#include "regiosim/rng.hpp"
#include "regiosim/stats.hpp"

namespace regiosim {

/// Balanced region x year regression panel. Row-major region blocks are the
/// canonical stacking order everywhere: observation (i, t) sits at i*T + t.
struct PanelMatrix {
  std::vector<std::string> region_ids;     // N
  std::vector<int> years;                  // T, consecutive
  Eigen::MatrixXd y;                       // N x T
  std::vector<Eigen::MatrixXd> X;          // k matrices, each N x T
  std::vector<std::string> regressor_names;

  Eigen::Index n_regions() const { return static_cast<Eigen::Index>(region_ids.size()); }
  Eigen::Index n_periods() const { return static_cast<Eigen::Index>(years.size()); }
  Eigen::Index n_regressors() const { return static_cast<Eigen::Index>(X.size()); }

  void check() const {
    const Eigen::Index n = n_regions();
    const Eigen::Index t = n_periods();
    detail::require(n >= 1 && t >= 1, ErrorCode::DimensionMismatch, "empty panel");
    detail::require(n_regressors() >= 1, ErrorCode::DimensionMismatch, "panel needs k >= 1");
    detail::require(regressor_names.size() == X.size(), ErrorCode::DimensionMismatch,
                    "regressor names/count mismatch");
    for (std::size_t j = 1; j < years.size(); ++j) {
      detail::require(years[j] == years[j - 1] + 1, ErrorCode::UnbalancedPanel,
                      "years must be consecutive");
    }
    detail::require(y.rows() == n && y.cols() == t, ErrorCode::DimensionMismatch,
                    "response dimension mismatch");
    detail::require(y.allFinite(), ErrorCode::SchemaError, "non-finite response");
    for (const auto& x : X) {
      detail::require(x.rows() == n && x.cols() == t, ErrorCode::DimensionMismatch,
                      "regressor dimension mismatch");
      detail::require(x.allFinite(), ErrorCode::SchemaError, "non-finite regressor");
    }
  }

  Eigen::VectorXd y_stacked() const {
    Eigen::VectorXd out(y.size());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      for (Eigen::Index t = 0; t < y.cols(); ++t) out(r++) = y(i, t);
    return out;
  }

  /// Stacked design matrix; optionally with a leading intercept column.
  Eigen::MatrixXd x_stacked(bool with_intercept) const {
    const Eigen::Index nt = y.size();
    const Eigen::Index k = n_regressors();
    Eigen::MatrixXd out(nt, k + (with_intercept ? 1 : 0));
    Eigen::Index col = 0;
    if (with_intercept) out.col(col++).setOnes();
    for (Eigen::Index j = 0; j < k; ++j, ++col) {
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index t = 0; t < y.cols(); ++t) out(r++, col) = X[static_cast<std::size_t>(j)](i, t);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// ordinary least squares
// ---------------------------------------------------------------------------

struct OlsResult {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residuals;
  double resid_variance = 0.0;  // SSR / (n - k)
  long df = 0;
};

/// Least squares via column-pivoted QR; rejects rank-deficient designs.
inline OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  detail::require(y.size() == x.rows(), ErrorCode::DimensionMismatch,
                  "response/design row mismatch");
  detail::require(x.rows() > x.cols(), ErrorCode::RankDeficient,
                  "need more observations than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  detail::require(qr.rank() == x.cols(), ErrorCode::RankDeficient,
                  "design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                      " of " + std::to_string(x.cols()) + ")");
  OlsResult out;
  out.coefficients = qr.solve(y);
  out.residuals = y - x * out.coefficients;
  out.df = static_cast<long>(x.rows() - x.cols());
  out.resid_variance = out.residuals.squaredNorm() / static_cast<double>(out.df);
  Eigen::MatrixXd xtx = x.transpose() * x;
  out.covariance = out.resid_variance * xtx.ldlt().solve(
                       Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  return out;
}

// ---------------------------------------------------------------------------
// stochastic frontier, time-varying decay inefficiency
// ---------------------------------------------------------------------------

/// Parameters of the production-frontier panel model
///   y_it = x_it' beta + v_it - exp(-eta (t - T_i)) u_i,
/// v_it ~ N(0, sigma_v^2), u_i ~ N+(mu_trunc, sigma_u^2), parameterized by
/// the total variance sigma_sq = sigma_v^2 + sigma_u^2 and the variance
/// share gamma_var = sigma_u^2 / sigma_sq.
struct SfaParams {
  Eigen::VectorXd beta;  // k+1, intercept first
  double sigma_sq = 1.0;
  double gamma_var = 0.5;
  double eta = 0.0;
  double mu_trunc = 0.0;

  void check() const {
    detail::require(beta.size() >= 1 && beta.allFinite(), ErrorCode::ParameterOutOfRange,
                    "beta must be non-empty and finite");
    detail::require(std::isfinite(sigma_sq) && sigma_sq > 0.0, ErrorCode::ParameterOutOfRange,
                    "sigma_sq must be > 0");
    detail::require(std::isfinite(gamma_var) && gamma_var >= 0.0 && gamma_var < 1.0,
                    ErrorCode::ParameterOutOfRange, "gamma_var must lie in [0,1)");
    detail::require(std::isfinite(eta) && std::isfinite(mu_trunc),
                    ErrorCode::ParameterOutOfRange, "eta/mu_trunc must be finite");
  }
};

struct SfaOptions {
  bool estimate_mu_trunc = true;  // otherwise mu_trunc is pinned at 0 (half-normal)
  int max_iter = 300;
  double tol = 1e-6;
  int n_starts = 3;
  std::uint64_t seed = 0;
};

struct SfaFit {
  SfaParams params;
  double loglik = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd std_errors;            // aligned with param_names
  std::vector<std::string> param_names;  // const, slopes..., sigma_sq, gamma_var, eta, mu_trunc
  bool converged = false;
  long n_evals = 0;
};

namespace detail_sfa {

struct RegionSums {
  double s_ee = 0.0;  // sum eps^2
  double s_he = 0.0;  // sum eta_it * eps
  double s_hh = 0.0;  // sum eta_it^2
};

inline double decay_weight(double eta, int year, int last_year) {
  return std::exp(-eta * static_cast<double>(year - last_year));
}

}  // namespace detail_sfa

/// Exact marginal log-likelihood of the panel under SfaParams: for each
/// region the truncated-normal inefficiency is integrated out against the
/// Gaussian noise in closed form. gamma_var = 0 degenerates to the pooled
/// Gaussian density with variance sigma_sq.
inline double sfa_loglik(const SfaParams& params, const PanelMatrix& panel) {
  params.check();
  panel.check();
  const Eigen::Index n = panel.n_regions();
  const Eigen::Index t_len = panel.n_periods();
  const Eigen::Index k = panel.n_regressors();
  detail::require(params.beta.size() == k + 1, ErrorCode::DimensionMismatch,
                  "beta length must be k+1");

  const double sigma_u2 = params.gamma_var * params.sigma_sq;
  const double sigma_v2 = (1.0 - params.gamma_var) * params.sigma_sq;
  const int last_year = panel.years.back();
  const double mu = params.mu_trunc;

  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    detail_sfa::RegionSums s;
    for (Eigen::Index t = 0; t < t_len; ++t) {
      double eps = panel.y(i, t) - params.beta(0);
      for (Eigen::Index j = 0; j < k; ++j) {
        eps -= params.beta(j + 1) * panel.X[static_cast<std::size_t>(j)](i, t);
      }
      const double h = detail_sfa::decay_weight(params.eta, panel.years[static_cast<std::size_t>(t)],
                                                last_year);
      s.s_ee += eps * eps;
      s.s_he += h * eps;
      s.s_hh += h * h;
    }

    if (sigma_u2 == 0.0) {
      ll += -0.5 * static_cast<double>(t_len) * std::log(2.0 * M_PI * sigma_v2) -
            0.5 * s.s_ee / sigma_v2;
      continue;
    }

    const double denom = sigma_v2 + sigma_u2 * s.s_hh;
    const double mu_star = (mu * sigma_v2 - sigma_u2 * s.s_he) / denom;
    const double sig_star = std::sqrt(sigma_u2 * sigma_v2 / denom);
    // mu^2/sigma_u^2 - mu_star^2/sigma_star^2, combined analytically to avoid
    // catastrophic cancellation as sigma_u -> 0
    const double quad = (mu * mu * s.s_hh + 2.0 * mu * s.s_he -
                         (sigma_u2 / sigma_v2) * s.s_he * s.s_he) /
                        denom;
    // ln Phi(mu*/sig*) - ln Phi(mu/sigma_u): both arguments reach huge
    // negative values when mu < 0 and sigma_u is near zero, so the tail
    // difference is evaluated with a cancellation-free b - a
    const double sigma_u = std::sqrt(sigma_u2);
    const double sigma_v = std::sqrt(sigma_v2);
    const double sqrt_denom = std::sqrt(denom);
    const double a = mu_star / sig_star;
    const double b = mu / sigma_u;
    const double b_minus_a =
        sigma_u * (mu * sigma_v * s.s_hh / (sqrt_denom + sigma_v) + s.s_he) /
        (sigma_v * sqrt_denom);
    ll += -0.5 * static_cast<double>(t_len) * std::log(2.0 * M_PI) -
          0.5 * static_cast<double>(t_len - 1) * std::log(sigma_v2) - 0.5 * std::log(denom) +
          norm_logcdf_diff(a, b, b_minus_a) - 0.5 * s.s_ee / sigma_v2 - 0.5 * quad;
  }
  detail::require(std::isfinite(ll), ErrorCode::NonFiniteLikelihood,
                  "log-likelihood is not finite at these parameters");
  return ll;
}

namespace detail_sfa {

inline constexpr double kGammaClamp = 1e-8;

inline double logit(double g) {
  const double c = std::min(std::max(g, kGammaClamp), 1.0 - kGammaClamp);
  return std::log(c / (1.0 - c));
}

inline double inv_logit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Unconstrained parameter vector: [beta..., log sigma_sq, logit gamma, eta, (mu)].
inline Eigen::VectorXd pack(const SfaParams& p, bool with_mu) {
  Eigen::VectorXd phi(p.beta.size() + 3 + (with_mu ? 1 : 0));
  phi.head(p.beta.size()) = p.beta;
  Eigen::Index at = p.beta.size();
  phi(at++) = std::log(p.sigma_sq);
  phi(at++) = logit(p.gamma_var);
  phi(at++) = p.eta;
  if (with_mu) phi(at) = p.mu_trunc;
  return phi;
}

inline SfaParams unpack(const Eigen::VectorXd& phi, Eigen::Index k, bool with_mu) {
  SfaParams p;
  p.beta = phi.head(k + 1);
  Eigen::Index at = k + 1;
  p.sigma_sq = std::exp(phi(at++));
  p.gamma_var = inv_logit(phi(at++));
  p.eta = phi(at++);
  p.mu_trunc = with_mu ? phi(at) : 0.0;
  return p;
}

/// Objective in natural parameter space [beta..., sigma_sq, gamma_var, eta, (mu)],
/// used for the reported Hessian-based standard errors.
inline double natural_negll(const Eigen::VectorXd& nat, Eigen::Index k, bool with_mu,
                            const PanelMatrix& panel) {
  SfaParams p;
  p.beta = nat.head(k + 1);
  Eigen::Index at = k + 1;
  p.sigma_sq = nat(at++);
  p.gamma_var = nat(at++);
  p.eta = nat(at++);
  p.mu_trunc = with_mu ? nat(at) : 0.0;
  if (!(p.sigma_sq > 0.0) || p.gamma_var < 0.0 || p.gamma_var >= 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  try {
    return -sfa_loglik(p, panel);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline Eigen::VectorXd hessian_std_errors(const Eigen::VectorXd& nat, Eigen::Index k,
                                          bool with_mu, const PanelMatrix& panel) {
  const Eigen::Index p = nat.size();
  auto f = [&](const Eigen::VectorXd& v) { return natural_negll(v, k, with_mu, panel); };

  Eigen::VectorXd h(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double hi = 1e-4 * std::max(1.0, std::fabs(nat(i)));
    if (i == k + 1) hi = std::min(hi, 0.45 * nat(i));                      // sigma_sq > 0
    if (i == k + 2) hi = std::min({hi, 0.45 * std::max(nat(i), 1e-12),     // gamma in [0,1)
                                   0.45 * (1.0 - nat(i))});
    h(i) = std::max(hi, 1e-12);
  }

  // finite differences of the central-difference gradient
  auto grad_at = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g(p);
    Eigen::VectorXd w = v;
    for (Eigen::Index i = 0; i < p; ++i) {
      w(i) = v(i) + h(i);
      const double fp = f(w);
      w(i) = v(i) - h(i);
      const double fm = f(w);
      w(i) = v(i);
      g(i) = (fp - fm) / (2.0 * h(i));
    }
    return g;
  };

  Eigen::MatrixXd hess(p, p);
  Eigen::VectorXd v = nat;
  for (Eigen::Index j = 0; j < p; ++j) {
    v(j) = nat(j) + h(j);
    Eigen::VectorXd gp = grad_at(v);
    v(j) = nat(j) - h(j);
    Eigen::VectorXd gm = grad_at(v);
    v(j) = nat(j);
    hess.col(j) = (gp - gm) / (2.0 * h(j));
  }
  hess = 0.5 * (hess + hess.transpose()).eval();

  Eigen::VectorXd se = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (!hess.allFinite()) return se;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
  if (es.info() != Eigen::Success) return se;
  const double lam_max = es.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = 1e-10 * std::max(1.0, lam_max);
  Eigen::VectorXd inv_lam = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (es.eigenvalues()(i) > tol) inv_lam(i) = 1.0 / es.eigenvalues()(i);
  }
  Eigen::MatrixXd cov = es.eigenvectors() * inv_lam.asDiagonal() * es.eigenvectors().transpose();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (cov(i, i) > 0.0) se(i) = std::sqrt(cov(i, i));
  }
  return se;
}

}  // namespace detail_sfa

/// Maximum-likelihood fit by multi-start quasi-Newton over the unconstrained
/// reparameterization (log sigma_sq, logit gamma_var, raw eta, raw beta, raw
/// mu_trunc). Start 0 is OLS-based; the remaining starts are seeded
/// perturbations of it, each derived from (seed, start index) so parallel and
/// serial sweeps would pick the same winner (ties break toward the lowest
/// start index). Throws DidNotConverge when no start converges.
inline SfaFit sfa_fit(const PanelMatrix& panel, const SfaOptions& options = {}) {
  panel.check();
  detail::require(panel.n_periods() >= 2, ErrorCode::DimensionMismatch,
                  "stochastic frontier fit needs T >= 2");
  detail::require(options.n_starts >= 1, ErrorCode::ParameterOutOfRange, "n_starts must be >= 1");
  const Eigen::Index k = panel.n_regressors();
  const bool with_mu = options.estimate_mu_trunc;

  // OLS-based starting point
  OlsResult start_ols = ols(panel.y_stacked(), panel.x_stacked(true));
  SfaParams p0;
  p0.beta = start_ols.coefficients;
  p0.sigma_sq = std::max(start_ols.resid_variance, 1e-12);
  p0.gamma_var = 0.5;
  p0.eta = 0.0;
  p0.mu_trunc = 0.0;
  const double ll_at_ols_start = sfa_loglik(p0, panel);

  auto objective = [&](const Eigen::VectorXd& phi) -> double {
    try {
      const double ll = sfa_loglik(detail_sfa::unpack(phi, k, with_mu), panel);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  OptimOptions oo;
  oo.max_iter = options.max_iter;
  oo.grad_tol = options.tol;

  const Eigen::VectorXd phi0 = detail_sfa::pack(p0, with_mu);
  bool any_converged = false;
  OptimResult best;
  long total_evals = 0;
  for (int s = 0; s < options.n_starts; ++s) {
    Eigen::VectorXd phi = phi0;
    if (s > 0) {
      auto eng = engine_for(options.seed, static_cast<std::uint64_t>(s));
      std::normal_distribution<double> g(0.0, 1.0);
      for (Eigen::Index j = 0; j <= k; ++j) phi(j) += 0.2 * (1.0 + std::fabs(phi(j))) * g(eng);
      phi(k + 1) += 0.5 * g(eng);   // log sigma_sq
      phi(k + 2) = g(eng);          // logit gamma
      phi(k + 3) += 0.05 * g(eng);  // eta
      if (with_mu) phi(k + 4) += 0.5 * g(eng);
    }
    OptimResult r = minimize_bfgs(objective, phi, oo);
    total_evals += r.n_evals;
    if (r.converged && (!any_converged || r.f < best.f)) {
      best = r;
      any_converged = true;
    }
  }
  detail::require(any_converged, ErrorCode::DidNotConverge,
                  "no optimizer start converged; try more starts or a looser tol");
  detail::require(-best.f >= ll_at_ols_start - 1e-9 * (1.0 + std::fabs(ll_at_ols_start)),
                  ErrorCode::DidNotConverge,
                  "best optimum fell below the OLS starting likelihood");

  SfaFit fit;
  fit.params = detail_sfa::unpack(best.x, k, with_mu);
  fit.loglik = -best.f;
  fit.converged = true;
  fit.n_evals = total_evals;

  fit.param_names.push_back("const");
  for (const auto& n : panel.regressor_names) fit.param_names.push_back(n);
  fit.param_names.insert(fit.param_names.end(), {"sigma_sq", "gamma_var", "eta"});
  if (with_mu) fit.param_names.push_back("mu_trunc");

  Eigen::VectorXd nat(k + 4 + (with_mu ? 1 : 0));
  nat.head(k + 1) = fit.params.beta;
  nat(k + 1) = fit.params.sigma_sq;
  nat(k + 2) = fit.params.gamma_var;
  nat(k + 3) = fit.params.eta;
  if (with_mu) nat(k + 4) = fit.params.mu_trunc;
  fit.std_errors = detail_sfa::hessian_std_errors(nat, k, with_mu, panel);
  return fit;
}

/// Conditional-mean inefficiency estimates E[u_it | eps_i] = h_it E[u_i | eps_i],
/// with u_i | eps_i truncated normal. Nonnegative by construction; for eta > 0
/// the per-region path is non-increasing in t through the decay weights.
inline Eigen::MatrixXd efficiency_scores(const SfaFit& fit, const PanelMatrix& panel) {
  detail::require(fit.converged, ErrorCode::NotConverged,
                  "efficiency scores need a converged fit");
  panel.check();
  const SfaParams& p = fit.params;
  const Eigen::Index n = panel.n_regions();
  const Eigen::Index t_len = panel.n_periods();
  const Eigen::Index k = panel.n_regressors();
  const double sigma_u2 = p.gamma_var * p.sigma_sq;
  const double sigma_v2 = (1.0 - p.gamma_var) * p.sigma_sq;
  const int last_year = panel.years.back();

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, t_len);
  if (sigma_u2 == 0.0) return scores;

  for (Eigen::Index i = 0; i < n; ++i) {
    double s_he = 0.0, s_hh = 0.0;
    std::vector<double> weights(static_cast<std::size_t>(t_len));
    for (Eigen::Index t = 0; t < t_len; ++t) {
      double eps = panel.y(i, t) - p.beta(0);
      for (Eigen::Index j = 0; j < k; ++j) {
        eps -= p.beta(j + 1) * panel.X[static_cast<std::size_t>(j)](i, t);
      }
      const double h = detail_sfa::decay_weight(p.eta, panel.years[static_cast<std::size_t>(t)],
                                                last_year);
      weights[static_cast<std::size_t>(t)] = h;
      s_he += h * eps;
      s_hh += h * h;
    }
    const double denom = sigma_v2 + sigma_u2 * s_hh;
    const double mu_star = (p.mu_trunc * sigma_v2 - sigma_u2 * s_he) / denom;
    const double sig_star = std::sqrt(sigma_u2 * sigma_v2 / denom);
    const double z = mu_star / sig_star;
    const double cond_mean = sig_star * (z + mills_ratio(-z));
    for (Eigen::Index t = 0; t < t_len; ++t) {
      scores(i, t) = weights[static_cast<std::size_t>(t)] * cond_mean;
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------
// linear panel estimators
// ---------------------------------------------------------------------------

struct FeFit {
  std::vector<std::string> regressor_names;
  Eigen::VectorXd coefficients;  // k slopes
  Eigen::MatrixXd covariance;    // k x k
  double r_squared = 0.0;        // within
  double f_stat = 0.0;
  double f_p = 1.0;
  double sigma_e2 = 0.0;
  long df_resid = 0;
};

struct ReFit {
  std::vector<std::string> regressor_names;
  double intercept = 0.0;
  double intercept_se = 0.0;
  Eigen::VectorXd coefficients;  // k slopes
  Eigen::MatrixXd covariance;    // k x k slope block
  double r_squared = 0.0;        // overall
  double sigma_alpha2 = 0.0;
  double sigma_eps2 = 0.0;
  double theta_hat = 0.0;
  bool variance_clamped = false;
};

struct HausmanResult {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
  bool regularized = false;
};

/// Within (fixed-effects) estimator: region-demeaned OLS with the
/// N*T - N - k degrees-of-freedom correction, within R^2 and the joint-slope
/// F test.
inline FeFit fe_within(const PanelMatrix& panel) {
  panel.check();
  const Eigen::Index n = panel.n_regions();
  const Eigen::Index t_len = panel.n_periods();
  const Eigen::Index k = panel.n_regressors();
  detail::require(n * t_len - n - k > 0, ErrorCode::DimensionMismatch,
                  "not enough observations for the within estimator");

  Eigen::MatrixXd yd = panel.y;
  yd.colwise() -= panel.y.rowwise().mean();
  std::vector<Eigen::MatrixXd> xd(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::MatrixXd& x = panel.X[static_cast<std::size_t>(j)];
    xd[static_cast<std::size_t>(j)] = x;
    xd[static_cast<std::size_t>(j)].colwise() -= x.rowwise().mean();
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    detail::require(xd[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff() > 1e-12 * scale,
                    ErrorCode::NoWithinVariation,
                    "regressor '" + panel.regressor_names[static_cast<std::size_t>(j)] +
                        "' has no within-region variation");
  }

  const Eigen::Index nt = n * t_len;
  Eigen::VectorXd yv(nt);
  Eigen::MatrixXd xv(nt, k);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < t_len; ++t, ++r) {
      yv(r) = yd(i, t);
      for (Eigen::Index j = 0; j < k; ++j) xv(r, j) = xd[static_cast<std::size_t>(j)](i, t);
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xv);
  qr.setThreshold(1e-10);
  detail::require(qr.rank() == k, ErrorCode::RankDeficient,
                  "demeaned design is rank deficient");
  FeFit fit;
  fit.regressor_names = panel.regressor_names;
  fit.coefficients = qr.solve(yv);
  const Eigen::VectorXd resid = yv - xv * fit.coefficients;
  const double ssr = resid.squaredNorm();
  const double tss = yv.squaredNorm();
  fit.df_resid = static_cast<long>(nt - n - k);
  fit.sigma_e2 = ssr / static_cast<double>(fit.df_resid);
  fit.covariance = fit.sigma_e2 * (xv.transpose() * xv)
                                      .ldlt()
                                      .solve(Eigen::MatrixXd::Identity(k, k));
  fit.r_squared = tss > 0.0 ? 1.0 - ssr / tss : 0.0;
  if (ssr == 0.0) {
    fit.f_stat = std::numeric_limits<double>::infinity();
    fit.f_p = 0.0;
  } else {
    fit.f_stat = ((tss - ssr) / static_cast<double>(k)) / fit.sigma_e2;
    fit.f_p = f_sf(fit.f_stat, static_cast<double>(k), static_cast<double>(fit.df_resid));
  }
  return fit;
}

/// Random-effects feasible GLS with Swamy-Arora variance components: the
/// within residual variance plus a between regression give sigma_alpha^2
/// (clamped at zero with a flag when negative), then quasi-demeaning with
/// theta_hat = 1 - sqrt(sigma_eps^2 / (sigma_eps^2 + T sigma_alpha^2)).
inline ReFit re_gls(const PanelMatrix& panel) {
  panel.check();
  const Eigen::Index n = panel.n_regions();
  const Eigen::Index t_len = panel.n_periods();
  const Eigen::Index k = panel.n_regressors();
  detail::require(n >= k + 2, ErrorCode::DimensionMismatch,
                  "random effects needs N >= k + 2 for the between regression");

  FeFit within = fe_within(panel);
  const double sigma_eps2 = within.sigma_e2;

  // between regression on region means
  Eigen::VectorXd ybar = panel.y.rowwise().mean();
  Eigen::MatrixXd xbar(n, k + 1);
  xbar.col(0).setOnes();
  for (Eigen::Index j = 0; j < k; ++j) {
    xbar.col(j + 1) = panel.X[static_cast<std::size_t>(j)].rowwise().mean();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_b(xbar);
  qr_b.setThreshold(1e-10);
  detail::require(qr_b.rank() == k + 1, ErrorCode::RankDeficient,
                  "between regression is rank deficient");
  Eigen::VectorXd b_between = qr_b.solve(ybar);
  const double ssr_b = (ybar - xbar * b_between).squaredNorm();
  const double s_b2 = ssr_b / static_cast<double>(n - k - 1);

  ReFit fit;
  fit.regressor_names = panel.regressor_names;
  fit.sigma_eps2 = sigma_eps2;
  fit.sigma_alpha2 = s_b2 - sigma_eps2 / static_cast<double>(t_len);
  if (fit.sigma_alpha2 < 0.0) {
    fit.sigma_alpha2 = 0.0;
    fit.variance_clamped = true;
  }
  fit.theta_hat =
      1.0 - std::sqrt(sigma_eps2 / (sigma_eps2 + static_cast<double>(t_len) * fit.sigma_alpha2));

  // quasi-demeaned pooled regression
  const Eigen::Index nt = n * t_len;
  Eigen::VectorXd yv(nt);
  Eigen::MatrixXd xv(nt, k + 1);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < t_len; ++t, ++r) {
      yv(r) = panel.y(i, t) - fit.theta_hat * ybar(i);
      xv(r, 0) = 1.0 - fit.theta_hat;
      for (Eigen::Index j = 0; j < k; ++j) {
        xv(r, j + 1) = panel.X[static_cast<std::size_t>(j)](i, t) - fit.theta_hat * xbar(i, j + 1);
      }
    }
  }
  OlsResult gls = ols(yv, xv);
  fit.intercept = gls.coefficients(0);
  fit.intercept_se = std::sqrt(std::max(0.0, gls.covariance(0, 0)));
  fit.coefficients = gls.coefficients.tail(k);
  fit.covariance = gls.covariance.bottomRightCorner(k, k);

  // overall R^2: squared correlation of fitted levels with the response
  Eigen::VectorXd y_all = panel.y_stacked();
  Eigen::MatrixXd x_all = panel.x_stacked(true);
  Eigen::VectorXd fitted = x_all * gls.coefficients;
  const double cy = (y_all.array() - y_all.mean()).matrix().norm();
  const double cf = (fitted.array() - fitted.mean()).matrix().norm();
  if (cy > 0.0 && cf > 0.0) {
    const double corr = ((y_all.array() - y_all.mean()) * (fitted.array() - fitted.mean())).sum() /
                        (cy * cf);
    fit.r_squared = corr * corr;
  }
  return fit;
}

/// Hausman specification test H = q' (V_FE - V_RE)^+ q with q the slope
/// difference. When the covariance difference is not PSD within 1e-10 the
/// Moore-Penrose pseudo-inverse is used, the regularized flag set, and df
/// equals the numerical rank.
inline HausmanResult hausman(const FeFit& fe, const ReFit& re) {
  detail::require(fe.regressor_names == re.regressor_names, ErrorCode::IncompatibleFits,
                  "fits must share the same regressor set and order");
  detail::require(fe.coefficients.size() == re.coefficients.size(), ErrorCode::IncompatibleFits,
                  "coefficient count mismatch");
  const Eigen::Index k = fe.coefficients.size();
  Eigen::VectorXd q = fe.coefficients - re.coefficients;
  Eigen::MatrixXd d = fe.covariance - re.covariance;
  d = 0.5 * (d + d.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
  detail::require(es.info() == Eigen::Success, ErrorCode::IncompatibleFits,
                  "covariance difference eigendecomposition failed");
  const double lam_max = es.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = 1e-10 * std::max(1.0, lam_max);

  HausmanResult out;
  int rank = 0;
  double h = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > tol) {
      const double proj = es.eigenvectors().col(i).dot(q);
      h += proj * proj / lam;
      ++rank;
    } else if (lam < -tol) {
      out.regularized = true;
    }
  }
  if (rank < k) out.regularized = true;
  out.statistic = h;
  out.df = rank;
  out.p = rank > 0 ? chi_squared_sf(h, static_cast<double>(rank)) : 1.0;
  return out;
}

}  // namespace regiosim
