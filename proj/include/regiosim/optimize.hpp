#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace regiosim {

namespace detail_optim {

/// Tolerance scale: proportional to |f| but capped, so a pathological
/// objective region with an astronomical value cannot declare itself
/// converged.
inline double tol_scale(double f) {
  return 1.0 + std::min(std::fabs(f), 1e6);
}

}  // namespace detail_optim

/// Result of an unconstrained quasi-Newton minimization.
struct OptimResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  long n_evals = 0;
  double grad_norm = std::numeric_limits<double>::infinity();
};

struct OptimOptions {
  int max_iter = 300;
  double grad_tol = 1e-6;   // scaled by (1 + |f|)
  double step_tol = 1e-10;  // relative step size considered stalled
  double fd_step = 1e-6;    // relative central-difference step
};

namespace detail_optim {

/// Central-difference gradient; the objective must return +inf (not throw)
/// on pathological points.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double rel_step, long& evals) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::fabs(x(i)));
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    evals += 2;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace detail_optim

/// BFGS with numerical gradients and backtracking Armijo line search.
/// Deterministic for a given start. Non-finite objective values act as +inf
/// barriers: the line search backs away from them.
inline OptimResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x0, const OptimOptions& opt = {}) {
  const Eigen::Index p = x0.size();
  OptimResult res;
  res.x = x0;
  res.f = f(x0);
  res.n_evals = 1;
  if (!std::isfinite(res.f)) return res;  // hopeless start

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd grad = detail_optim::fd_gradient(f, res.x, opt.fd_step, res.n_evals);

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    res.iterations = iter + 1;
    res.grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (res.grad_norm < opt.grad_tol * detail_optim::tol_scale(res.f)) {
      res.converged = true;
      return res;
    }

    Eigen::VectorXd dir = -(h_inv * grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {  // lost curvature; restart from steepest descent
      h_inv.setIdentity();
      dir = -grad;
      slope = grad.dot(dir);
    }

    // backtracking Armijo
    double alpha = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + alpha * dir;
      f_new = f(x_new);
      ++res.n_evals;
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // cannot make progress along this direction at any representable step
      res.converged = res.grad_norm < 1e2 * opt.grad_tol * detail_optim::tol_scale(res.f);
      return res;
    }

    Eigen::VectorXd grad_new = detail_optim::fd_gradient(f, x_new, opt.fd_step, res.n_evals);
    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd yv = grad_new - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      Eigen::MatrixXd vmat = Eigen::MatrixXd::Identity(p, p) - rho * s * yv.transpose();
      h_inv = vmat * h_inv * vmat.transpose() + rho * s * s.transpose();
    }

    const double step_size = s.lpNorm<Eigen::Infinity>();
    const double f_drop = res.f - f_new;
    res.x = x_new;
    res.f = f_new;
    grad = grad_new;
    if (step_size < opt.step_tol * (1.0 + res.x.lpNorm<Eigen::Infinity>()) &&
        f_drop < opt.step_tol * detail_optim::tol_scale(res.f)) {
      res.grad_norm = grad.lpNorm<Eigen::Infinity>();
      res.converged = true;
      return res;
    }
  }
  res.grad_norm = grad.lpNorm<Eigen::Infinity>();
  res.converged = res.grad_norm < opt.grad_tol * detail_optim::tol_scale(res.f) * 10.0;
  return res;
}

}  // namespace regiosim
