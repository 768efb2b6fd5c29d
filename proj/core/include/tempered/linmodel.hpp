#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tempered/errors.hpp"

namespace tempered {

/// Regression data. `sigma2` is the noise variance the posterior formulas
/// use: 1 in the simulation experiments, the plug-in estimate in the
/// real-data workflow.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  double sigma2 = 1.0;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  /// Throws Error if shapes disagree, entries are non-finite, or sigma2 <= 0.
  void validate() const;
};

enum class Prior { UnitGaussian, Flat };

/// Tempered Gaussian posterior over regression coefficients.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double alpha = 1.0;
  Eigen::Index n = 0;

  /// JSON object {mean:[...], cov:[[...]], alpha, n}.
  std::string to_json() const;
};

struct ColumnTransform {
  enum class Kind { Square, Log };
  Kind kind;
  int source;  // index into the raw covariate columns
};

/// Declarative working-model specification: which raw columns enter, which
/// derived columns are appended, and whether an intercept column is added
/// (always appended last).
struct ModelSpec {
  std::vector<int> column_subset;
  bool add_intercept = false;
  std::vector<ColumnTransform> transforms;
};

/// Closed-form tempered posterior for the Gaussian linear model.
///
/// UnitGaussian prior N(0, I_p):
///   mean = (X'X + (sigma2/alpha) I)^-1 X'y
///   cov  = (sigma2/alpha) (X'X + (sigma2/alpha) I)^-1
/// Flat prior (requires full-rank X):
///   mean = (X'X)^-1 X'y
///   cov  = (sigma2/(alpha n)) (X'X/n)^-1
GaussianPosterior ridge_posterior(const Dataset& d, double alpha, Prior prior);

/// Gaussian mean-field variational approximation of the UnitGaussian-prior
/// posterior: same mean, covariance the inverse of the diagonal of the
/// precision.
GaussianPosterior vi_posterior(const Dataset& d, double alpha);

/// log Integral of N(y; x'beta, sigma2) against the posterior:
/// log phi(y; x'mean, sigma2 + x' cov x).
double predictive_logdensity(const GaussianPosterior& post, const Eigen::VectorXd& x, double y,
                             double sigma2);

/// OLS residual variance estimate sum (y - yhat)^2 / (n - p).
double estimate_sigma2(const Dataset& d);

/// Builds the working dataset for a model specification; y is unchanged.
Dataset apply_spec(const Dataset& d, const ModelSpec& spec);

namespace detail {
/// Condition-number full-rank test used by the flat-prior posterior and
/// estimate_sigma2; threshold 1e12 on the eigenvalues of X'X.
bool full_rank(const Eigen::MatrixXd& xtx);
}  // namespace detail

}  // namespace tempered
