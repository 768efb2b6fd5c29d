#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "tempered/errors.hpp"
#include "tempered/rng.hpp"

namespace tempered {

enum class Family { ExpGamma, ParetoGamma, BernBeta, GaussGauss };

const char* family_name(Family f);
Family family_from_name(const std::string& name);  // "exp-gamma", ...

/// One of the four conjugate pairs of App. D-style exponential families.
///
/// Internally every family is tracked by the natural hyperparameters
/// (xi, nu): the prior is exp(eta'xi - nu A(eta) - psi), a tempered update
/// adds (alpha T(data), alpha n), and the weak limit under alpha_n n -> a0
/// adds (a0 g(eta*), a0). The conventional hyperparameters (Gamma shape and
/// rate, Beta a and b, Gaussian mean and variance) are derived views.
struct ConjugateFamily {
  Family kind = Family::GaussGauss;
  double a = 1.0, b = 1.0;        // Gamma / Beta prior
  double mu0 = 0.0, sigma02 = 1.0;  // Gaussian prior
  double sigma2 = 1.0;              // Gaussian fixed noise variance
  double xm = 1.0;                  // Pareto scale

  static ConjugateFamily exp_gamma(double a, double b);
  static ConjugateFamily pareto_gamma(double a, double b, double xm);
  static ConjugateFamily bern_beta(double a, double b);
  static ConjugateFamily gauss_gauss(double mu0, double sigma02, double sigma2);

  double prior_xi() const;
  double prior_nu() const;

  /// Sum of the per-observation sufficient statistic; throws SupportViolation
  /// if any observation is outside the family's support.
  double sufficient_stat(const std::vector<double>& data) const;

  /// g(eta*) = E[T(X_1)] at natural parameter eta*.
  double mean_sufficient(double eta_star) const;

  /// Natural parameter from the conventional one (eta = -lambda, -(k+1),
  /// logit(p), mu per family).
  double natural_from_conventional(double theta) const;

  /// Draws one observation at the conventional parameter theta.
  double sample_datum(double theta, Rng& rng) const;

  /// MLE of the conventional parameter.
  double mle(const std::vector<double>& data) const;

  /// Fisher information per observation at the conventional parameter.
  double fisher_info(double theta) const;
};

/// Conjugate tempered posterior in natural hyperparameters.
struct ConjugatePosterior {
  ConjugateFamily family;
  double xi_n = 0.0;
  double nu_n = 0.0;

  // Conventional views; each throws ParameterOutOfSpace when the
  // hyperparameters leave the family's admissible region.
  double gamma_shape() const;  // ExpGamma / ParetoGamma
  double gamma_rate() const;
  double beta_a() const;  // BernBeta
  double beta_b() const;
  double gauss_mean() const;  // GaussGauss
  double gauss_var() const;

  double mean() const;
  double variance() const;
  double log_density(double theta) const;
  double density(double theta) const { return std::exp(log_density(theta)); }
  double cdf(double theta) const;
  double sample(Rng& rng) const;
};

/// Tempered conjugate update; alpha = 0 is admitted and returns the prior.
ConjugatePosterior alpha_update(const ConjugateFamily& f, const std::vector<double>& data,
                                double alpha);

/// Prior as a degenerate posterior (alpha = 0 with no data).
ConjugatePosterior prior_posterior(const ConjugateFamily& f);

/// Characteristic function of the conventional-parameter posterior.
std::complex<double> char_function(const ConjugatePosterior& p, double t);

struct LimitParams {
  double xi_prime = 0.0;
  double nu_prime = 0.0;
};

/// Hyperparameters of the weak limit of the alpha_n-posterior when
/// alpha_n n -> alpha0 and T(X^n)/n -> g(eta*).
LimitParams limit_params(const ConjugateFamily& f, double alpha0, double eta_star);

struct BvmCheckConfig {
  std::vector<long> n_grid;
  int replications = 50;
  enum class Schedule { Alpha0OverN, InvSqrtN } schedule = Schedule::Alpha0OverN;
  int t_points = 41;   // cf gap measured on t in [-t_max, t_max]
  double t_max = 5.0;
  std::uint64_t seed = 0;
};

struct BvmCheckRow {
  long n = 0;
  int replication = 0;
  double cf_gap = 0.0;         // max_t |cf(posterior) - cf(limit)|
  double tv_to_gaussian = 0.0; // TV to the BvM Gaussian target
};

/// Simulates data at eta*, forms the posterior under the schedule, and
/// records the cf gap to the conjugate weak limit plus the TV distance to
/// the Gaussian BvM target N(mle, (alpha_n n V)^-1).
std::vector<BvmCheckRow> bvm_failure_check(const ConjugateFamily& f, double alpha0,
                                           double eta_star, const BvmCheckConfig& cfg);

}  // namespace tempered
