#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tempered/linmodel.hpp"

namespace tempered {

enum class Method { BCV, BCV_VI, LOOCV, TrainTest, SafeBayes };

const char* method_name(Method m);
Method method_from_name(const std::string& name);  // "bcv", "bcv-vi", ...

/// Selected alpha values above this are recoded to infinity ("corner").
inline constexpr double kCornerThreshold = 1e6;

struct Grid {
  enum class Parameter { Lambda, Alpha };
  enum class Spacing { Linear, Logarithmic };
  enum class Mapping { InvNMinus1Lambda, InvLambda, InvNLambda, Identity };

  Parameter parameter = Parameter::Lambda;
  Spacing spacing = Spacing::Linear;
  double lower = 0.0;
  double upper = 1.0;
  int density = 2;
  Mapping mapping = Mapping::Identity;

  std::vector<double> values() const;  // throws ConfigError on bad bounds
  double map_to_alpha(double value, Eigen::Index n) const;

  /// Simulation-study grid for a method (log lambda [1e-12,10] x200 for the
  /// lppd methods, and so on).
  static Grid simulation_default(Method m);
  /// Real-data grid (tighter linear lambda ranges for LOOCV / train-test).
  static Grid data_default(Method m);
};

struct TrainTestSplit {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Deterministic split from a seed; train gets round(fraction * n) rows.
TrainTestSplit make_split(Eigen::Index n, double train_fraction, std::uint64_t seed);

struct TuningResult {
  Method method = Method::BCV;
  std::vector<double> grid_values;
  std::vector<double> losses;
  std::optional<double> lambda_hat;
  double alpha_hat = 0.0;  // +inf once recoded
  bool is_corner = false;

  std::string to_json() const;
};

/// Leave-one-out log pointwise predictive density under the tempered
/// posterior with unit Gaussian prior; higher is better.
double lppd_loo(const Dataset& d, double alpha);

/// Same with the mean-field variational posterior substituted per fold.
double lppd_loo_vi(const Dataset& d, double alpha);

/// Allen's PRESS statistic (1/n)|B(I - H)y|^2 with H = X(X'X + I/alpha)^-1 X'.
double press(const Dataset& d, double alpha);

/// Ridge fit on the training fold, objective (1/n_train)|y - Xb|^2 + lambda|b|^2,
/// scored by mean squared error on the test fold.
double train_test_loss(const Dataset& d, const TrainTestSplit& split, double lambda);

/// Prequential cumulative posterior expected squared loss,
/// sum_i (y_i - x_i'mu_{i-1})^2 + x_i' Sigma_{i-1} x_i, where (mu, Sigma) is
/// the tempered unit-Gaussian-prior posterior on the first i-1 rows.
double safe_bayes_loss(const Dataset& d, double alpha);

struct TuneOptions {
  double split_fraction = 0.70;
};

/// Grid search for one method: evaluates the loss at every grid point
/// (lppd variants maximized, the rest minimized, ties to the smallest grid
/// value), maps the winner to alpha, and recodes alpha > 1e6 to infinity.
TuningResult tune(const Dataset& d, Method method, const Grid& grid, std::uint64_t seed,
                  const TuneOptions& opts = {});

}  // namespace tempered
