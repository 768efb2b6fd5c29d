#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "tempered/errors.hpp"

namespace tempered {

struct LogisticModel {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;        // entries in {0, 1}
  double prior_sd = 100.0;  // independent N(0, prior_sd^2) on each coefficient

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  void validate() const;

  double loglik(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd grad_loglik(const Eigen::VectorXd& beta) const;
  Eigen::MatrixXd hessian_loglik(const Eigen::VectorXd& beta) const;
  double log_prior(const Eigen::VectorXd& beta) const;
};

struct MleResult {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd h_n;  // -(1/n) Hessian of the log-likelihood at the MLE
};

/// Third-order local expansion data at the MLE. The tensor of third
/// derivatives is computed on demand; the leading-term plug-in never needs it.
struct LaplaceExpansion {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd h_n;
  std::vector<Eigen::MatrixXd> s_n;  // slice j holds (1/n) d^3/dtheta_j dtheta dtheta

  bool has_third_order() const { return !s_n.empty(); }
};

/// Newton iterations until the gradient's max-norm drops below 1e-10.
/// Throws Separation when the iterates or curvature indicate separable data,
/// NoConvergence after 100 steps.
MleResult logistic_mle(const LogisticModel& m);

LaplaceExpansion laplace_expansion(const LogisticModel& m, bool with_third_order = false);

/// Leading term of the tempered-posterior expectation of q: q(theta_hat).
double laplace_expectation(const LaplaceExpansion& le,
                           const std::function<double(const Eigen::VectorXd&)>& q);

struct McmcConfig {
  int m_samples = 50000;
  int burn_in = 5000;
  double step_scale = 0.0;  // 0 means the 2.38/sqrt(p) default
  std::uint64_t seed = 0;
};

struct Chain {
  Eigen::MatrixXd samples;  // post-burn-in draws, one per row
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  double step_scale = 0.0;
};

/// Random-walk Metropolis targeting the tempered posterior
/// f(y|X,beta)^alpha pi(beta); proposals N(0, step^2 (alpha n)^-1 H_n^-1).
Chain rw_metropolis(const LogisticModel& m, double alpha, const McmcConfig& cfg);

/// Random-walk Metropolis on an arbitrary log target with a fixed Gaussian
/// proposal (lower-triangular factor of its covariance).
Chain rw_metropolis(const std::function<double(const Eigen::VectorXd&)>& log_target,
                    const Eigen::VectorXd& init, const Eigen::MatrixXd& proposal_chol,
                    const McmcConfig& cfg);

/// 1D convenience wrapper.
Chain rw_metropolis_1d(const std::function<double(double)>& log_target, double init,
                       double step_sd, const McmcConfig& cfg);

Eigen::VectorXd posterior_mean(const Chain& c);

struct Figure4Config {
  Eigen::VectorXd beta_star;            // defaults to [1, -0.5, 0.1]
  std::vector<long> n_grid{200, 500, 1000, 2000};
  double schedule_coeff = 0.5;          // alpha_n = coeff * n^exponent
  std::vector<double> schedule_exponents{-0.75, -0.5, -0.25};
  int replications = 100;
  McmcConfig mcmc;
  std::uint64_t seed = 0;
  int max_separation_retries = 5;
};

struct Figure4Row {
  long n = 0;
  double schedule_exponent = 0.0;
  double mean_sq_scaled_diff_mle = 0.0;    // avg |sqrt(n)(post mean - mle)|^2
  double mean_sq_scaled_diff_truth = 0.0;  // avg |sqrt(n)(post mean - beta*)|^2
  double mean_scaled_norm_mle = 0.0;       // avg |sqrt(n)(post mean - mle)|
  double mc_se = 0.0;                      // replication se of the first column
  int separation_resamples = 0;
};

/// Simulates logistic data per replication, samples the tempered posterior,
/// and aggregates the scaled posterior-mean discrepancies per (n, schedule).
std::vector<Figure4Row> figure4_experiment(const Figure4Config& cfg, int threads = 1);

struct ClosedFormConfig {
  Eigen::VectorXd beta_star;  // defaults to [1, -0.5, 0.1]
  std::vector<long> n_grid{100, 1000, 10000, 100000};
  double schedule_coeff = 0.5;
  std::vector<double> schedule_exponents{-0.75, -0.5, -0.25};
  int replications = 100;
  std::uint64_t seed = 0;
};

/// The sampling-free arm of the scaling experiment: in the Gaussian linear
/// model the tempered posterior mean is the ridge estimator, so the scaled
/// discrepancies are computed exactly from the sufficient statistics.
std::vector<Figure4Row> closed_form_threshold(const ClosedFormConfig& cfg, int threads = 1);

}  // namespace tempered
