#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tempered/linmodel.hpp"
#include "tempered/tuning.hpp"

namespace tempered {

/// Generative model of the simulation study: x_i ~ N(0, I_p),
/// y = x'beta* + N(0,1) noise; the misspecified working model drops the
/// first covariate.
struct SimConfig {
  long n = 100;
  int p = 3;
  Eigen::VectorXd beta_star;  // defaults to [0,-0.5,0.1] / [1,-0.5,0.1]
  bool misspecified = false;
  int reps = 1;
  std::uint64_t master_seed = 0;
};

struct AlphaSample {
  long n = 0;
  Method method = Method::BCV;
  bool misspecified = false;
  int replication = 0;
  double alpha_hat = 0.0;  // +inf for corners
  bool is_corner = false;
};

struct RegimeEstimate {
  double gamma_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double log_c = 0.0;
  double corner_proportion = 0.0;  // at the largest n
  long n_points_used = 0;
};

enum class Regime { Constant, QuicklyVanishing, Mixed, Unclassified };
const char* regime_name(Regime r);

/// Draws the dataset of replication `rep`; the returned working design is
/// n x (p-1) when misspecified.
Dataset generate(const SimConfig& sim, int rep);

/// Tunes every requested method on each replication's dataset. The grids map
/// has simulation defaults filled in for missing methods. Deterministic in
/// master_seed; replications may run in parallel.
std::vector<AlphaSample> run_replications(const SimConfig& sim, const std::vector<Method>& methods,
                                          const std::map<Method, Grid>& grids = {},
                                          double split_fraction = 0.70, int threads = 1);

struct RateOptions {
  /// Pool per-replication points (default) or regress on per-n means.
  bool aggregate_means = false;
};

/// OLS of log(alpha_hat) on log(n) over non-corner samples; 95% normal CI
/// from the slope standard error.
RegimeEstimate estimate_rate(const std::vector<AlphaSample>& samples, const RateOptions& = {});

/// Corner proportion for each n present in the samples.
std::map<long, double> corner_proportions_by_n(const std::vector<AlphaSample>& samples);

/// Heuristic taxonomy of the selected-alpha regime; thresholds are artifact
/// choices calibrated to the three observed regimes and are non-normative.
Regime classify_regime(const std::vector<AlphaSample>& samples);

struct SubsampleConfig {
  std::vector<long> sizes;
  int reps = 1;
  std::vector<Method> methods;
  std::map<Method, Grid> grids;  // defaults to the data-application grids
  double split_fraction = 0.70;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SubsampleReport {
  std::vector<AlphaSample> samples;
  std::map<Method, RegimeEstimate> rates;
};

/// Without-replacement subsamples of a user-supplied dataset, tuned per
/// (size, rep, method); sigma2 is re-estimated on each subsample.
SubsampleReport subsample_study(const Dataset& full, const ModelSpec& spec,
                                const SubsampleConfig& cfg);

}  // namespace tempered
