#pragma once

#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "regiosim/errors.hpp"

namespace regiosim {

inline constexpr double kLnSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2*pi)

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLnSqrt2Pi); }

inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

/// log of the standard normal CDF, stable far into the left tail where
/// erfc underflows. Switches to the asymptotic tail expansion below x=-30.
inline double norm_logcdf(double x) {
  if (x >= -30.0) {
    return std::log(0.5 * std::erfc(-x * 0.70710678118654752440));
  }
  const double x2 = x * x;
  // ln Phi(x) ~ -x^2/2 - ln(-x) - ln sqrt(2 pi) + ln(1 - 1/x^2 + 3/x^4 - ...)
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - kLnSqrt2Pi + std::log(series);
}

inline double norm_quantile(double p) {
  detail::require(p > 0.0 && p < 1.0, ErrorCode::ParameterOutOfRange,
                  "normal quantile needs p in (0,1)");
  // Phi^{-1}(p) = -sqrt(2) * erfc_inv(2 p)
  return -1.4142135623730950488 * boost::math::erfc_inv(2.0 * p);
}

namespace detail_stats {

/// Tail series S(x) with Phi(x) ~ phi(x)/(-x) * S(x) for x << 0.
inline double normal_tail_series(double x) {
  const double x2 = x * x;
  return 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
}

}  // namespace detail_stats

/// Mills ratio phi(a)/Phi(-a), stable for large |a| in both directions.
inline double mills_ratio(double a) {
  if (a > 30.0) {
    // phi(a)/Phi(-a) ~ a / S(-a); the exp form would cancel a^2/2 terms
    return a / detail_stats::normal_tail_series(-a);
  }
  return std::exp(-0.5 * a * a - kLnSqrt2Pi - norm_logcdf(-a));
}

/// ln Phi(a) - ln Phi(b) where both arguments may sit so deep in the left
/// tail that the separate logcdf values (~ -x^2/2) cancel catastrophically.
/// b_minus_a must be supplied precomputed in a cancellation-free form.
inline double norm_logcdf_diff(double a, double b, double b_minus_a) {
  if (a > -100.0 || b > -100.0) return norm_logcdf(a) - norm_logcdf(b);
  return 0.5 * b_minus_a * (a + b) + std::log(b / a) +
         std::log(detail_stats::normal_tail_series(a)) -
         std::log(detail_stats::normal_tail_series(b));
}

/// Mean of X ~ N(mu, sigma^2) truncated to [0, inf).
inline double truncated_normal_mean(double mu, double sigma) {
  detail::require(sigma > 0.0, ErrorCode::ParameterOutOfRange,
                  "truncated normal needs sigma > 0");
  const double alpha = -mu / sigma;
  return mu + sigma * mills_ratio(alpha);
}

/// Upper-tail probability of a chi-square with df degrees of freedom.
inline double chi_squared_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

/// Two-sided p-value for a t statistic with df degrees of freedom.
inline double t_two_sided_p(double t, double df) {
  const double a = df / (df + t * t);
  return boost::math::ibeta(0.5 * df, 0.5, a);
}

/// Two-sided p-value for a standard normal statistic.
inline double normal_two_sided_p(double z) {
  return std::erfc(std::fabs(z) * 0.70710678118654752440);
}

/// Upper-tail probability of an F(df1, df2) statistic.
inline double f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  return boost::math::ibeta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

}  // namespace regiosim
