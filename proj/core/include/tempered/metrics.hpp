#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tempered/conjugate.hpp"
#include "tempered/errors.hpp"
#include "tempered/linmodel.hpp"
#include "tempered/rng.hpp"

namespace tempered {

/// Closed-over description of a distribution the metric routines can
/// evaluate, sample, or both.
struct DistributionHandle {
  enum class Kind { Gaussian, PointMass, Conjugate, Mixture, Empirical };

  Kind kind = Kind::PointMass;
  Eigen::VectorXd mean_;               // Gaussian
  Eigen::MatrixXd cov_;                // Gaussian (SPD)
  Eigen::VectorXd location_;           // PointMass
  std::optional<ConjugatePosterior> conj_;  // Conjugate (1D)
  double q_ = 0.0;                     // Mixture weight on component a
  std::shared_ptr<const DistributionHandle> a_, b_;
  Eigen::MatrixXd samples_;            // Empirical, one row per draw

  static DistributionHandle gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static DistributionHandle gaussian1d(double mean, double var);
  static DistributionHandle point_mass(Eigen::VectorXd location);
  static DistributionHandle point_mass1d(double location);
  static DistributionHandle conjugate(ConjugatePosterior post);
  static DistributionHandle mixture(double q, DistributionHandle a, DistributionHandle b);
  static DistributionHandle empirical(Eigen::MatrixXd samples);
  static DistributionHandle from_posterior(const GaussianPosterior& post);

  Eigen::Index dim() const;
  bool has_density() const;

  double log_density(const Eigen::VectorXd& x) const;
  double density1d(double x) const;
  double cdf1d(double x) const;
  /// Inverse cdf by bisection to 1e-10 of the support range.
  double quantile1d(double u) const;
  /// Interval carrying essentially all mass (roughly 10 sd each side).
  std::pair<double, double> support1d() const;

  Eigen::VectorXd sample(Rng& rng) const;
};

struct MetricConfig {
  int samples = 100000;
  std::uint64_t seed = 0;
};

struct MetricResult {
  double value = 0.0;
  double mc_se = 0.0;  // zero for quadrature / closed-form routes
};

/// Total variation distance. 1D pairs with densities go through adaptive
/// trapezoid integration of |f - g|/2 (relative target 1e-4); multivariate
/// Gaussian pairs use the importance estimate E_a[|1 - b/a|]/2.
MetricResult tv_distance(const DistributionHandle& a, const DistributionHandle& b,
                         const MetricConfig& cfg = {});

/// p-Wasserstein distance. Routes: quantile coupling for 1D pairs,
/// moment formulas against point masses, the Gaussian-Gaussian closed form
/// for p = 2, and the sorted coupling for equal-size 1D empiricals.
MetricResult wasserstein_p(const DistributionHandle& a, const DistributionHandle& b, int p,
                           const MetricConfig& cfg = {});

/// Moment-weighted L1 discrepancy
///   integral |sqrt(scale) (theta - theta_star)|^k |post - target| dtheta,
/// estimated by the symmetrized importance sampler; k = 0 is twice the TV.
MetricResult moment_discrepancy(const DistributionHandle& post, const DistributionHandle& target,
                                int k, const Eigen::VectorXd& theta_star, double scale,
                                const MetricConfig& cfg = {});

struct PowerSchedule {
  double coeff = 1.0;
  double exponent = 0.0;
  double at(double n) const { return coeff * std::pow(n, exponent); }
};

struct MixedAlphaLaw {
  double q = 0.5;
  PowerSchedule alpha_small{1.0, -0.5};
  PowerSchedule gamma_large{1.0, 1.0};
};

/// Draws m points from q * A + (1-q) * B.
DistributionHandle sample_mixed(const MixedAlphaLaw& law, const DistributionHandle& a,
                                const DistributionHandle& b, int m, std::uint64_t seed);

struct Theorem3Row {
  long n = 0;
  std::string metric;
  double value = 0.0;
  double mc_se = 0.0;
};

struct Theorem3Config {
  int empirical_samples = 20000;  // only used when the pool has p = 1
  std::uint64_t seed = 0;
};

/// Mixed-posterior convergence report on prefixes of a data pool: for each n
/// it forms the two Gaussian components (tempered unit-Gaussian-prior
/// posterior at alpha_n, flat-prior posterior at gamma_n), the limit mixture
/// q phi_n + (1-q) delta_mle, and reports the Wasserstein-2 convexity bound
/// together with its two component terms (and an empirical-coupling estimate
/// in one dimension).
std::vector<Theorem3Row> theorem3_check(const Dataset& pool, const MixedAlphaLaw& law,
                                        const std::vector<long>& n_grid,
                                        const Theorem3Config& cfg = {});

}  // namespace tempered
