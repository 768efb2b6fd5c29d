#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace tempered::stats {

inline constexpr double kLogTwoPi = 1.8378770664093454836;
inline constexpr double kInvSqrtTwo = 0.7071067811865475244;

inline double norm_logpdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + z * z / var);
}

inline double norm_pdf(double x, double mean, double var) {
  return std::exp(norm_logpdf(x, mean, var));
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrtTwo); }

inline double norm_cdf(double x, double mean, double sd) { return norm_cdf((x - mean) / sd); }

/// Standard normal quantile, Wichura's AS 241 (PPND16), ~1e-16 relative error.
double norm_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

inline double gamma_logpdf(double x, double shape, double rate) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double gamma_cdf(double x, double shape, double rate) {
  return x <= 0.0 ? 0.0 : gamma_p(shape, rate * x);
}

inline double beta_logpdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
}

inline double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return beta_inc(a, b, x);
}

/// Characteristic function of Gamma(shape, rate).
inline std::complex<double> gamma_cf(double t, double shape, double rate) {
  const std::complex<double> z(1.0, -t / rate);
  return std::exp(-shape * std::log(z));
}

/// Characteristic function of N(mean, var).
inline std::complex<double> gauss_cf(double t, double mean, double var) {
  return std::exp(std::complex<double>(-0.5 * var * t * t, mean * t));
}

/// Characteristic function of Beta(a, b): Kummer's 1F1(a; a+b; it).
/// The power series is well conditioned for |t| up to a few tens because the
/// argument is purely imaginary and small.
std::complex<double> beta_cf(double t, double a, double b);

}  // namespace tempered::stats
