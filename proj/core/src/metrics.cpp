#include "tempered/metrics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "tempered/stats.hpp"

namespace tempered {

namespace {

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error("DistributionHandle: covariance not SPD");
  return llt;
}

}  // namespace

DistributionHandle DistributionHandle::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (mean.size() != cov.rows() || cov.rows() != cov.cols())
    throw Error("gaussian handle: shape mismatch");
  checked_llt(cov);
  DistributionHandle h;
  h.kind = Kind::Gaussian;
  h.mean_ = std::move(mean);
  h.cov_ = std::move(cov);
  return h;
}

DistributionHandle DistributionHandle::gaussian1d(double mean, double var) {
  Eigen::VectorXd m(1);
  m << mean;
  Eigen::MatrixXd c(1, 1);
  c << var;
  return gaussian(std::move(m), std::move(c));
}

DistributionHandle DistributionHandle::point_mass(Eigen::VectorXd location) {
  DistributionHandle h;
  h.kind = Kind::PointMass;
  h.location_ = std::move(location);
  return h;
}

DistributionHandle DistributionHandle::point_mass1d(double location) {
  Eigen::VectorXd l(1);
  l << location;
  return point_mass(std::move(l));
}

DistributionHandle DistributionHandle::conjugate(ConjugatePosterior post) {
  DistributionHandle h;
  h.kind = Kind::Conjugate;
  h.conj_ = std::move(post);
  return h;
}

DistributionHandle DistributionHandle::mixture(double q, DistributionHandle a, DistributionHandle b) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error("mixture: q must be in [0,1]");
  if (a.dim() != b.dim()) throw Error("mixture: component dimensions differ");
  DistributionHandle h;
  h.kind = Kind::Mixture;
  h.q_ = q;
  h.a_ = std::make_shared<DistributionHandle>(std::move(a));
  h.b_ = std::make_shared<DistributionHandle>(std::move(b));
  return h;
}

DistributionHandle DistributionHandle::empirical(Eigen::MatrixXd samples) {
  if (samples.rows() < 1) throw Error("empirical handle: no samples");
  DistributionHandle h;
  h.kind = Kind::Empirical;
  h.samples_ = std::move(samples);
  return h;
}

DistributionHandle DistributionHandle::from_posterior(const GaussianPosterior& post) {
  return gaussian(post.mean, post.cov);
}

Eigen::Index DistributionHandle::dim() const {
  switch (kind) {
    case Kind::Gaussian: return mean_.size();
    case Kind::PointMass: return location_.size();
    case Kind::Conjugate: return 1;
    case Kind::Mixture: return a_->dim();
    case Kind::Empirical: return samples_.cols();
  }
  return 0;
}

bool DistributionHandle::has_density() const {
  switch (kind) {
    case Kind::Gaussian:
    case Kind::Conjugate: return true;
    case Kind::Mixture: return a_->has_density() && b_->has_density();
    default: return false;
  }
}

double DistributionHandle::log_density(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::Gaussian: {
      const auto llt = checked_llt(cov_);
      const Eigen::VectorXd z = llt.matrixL().solve(x - mean_);
      double logdet = 0.0;
      for (Eigen::Index i = 0; i < cov_.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
      return -0.5 * (static_cast<double>(cov_.rows()) * stats::kLogTwoPi + logdet + z.squaredNorm());
    }
    case Kind::Conjugate: return conj_->log_density(x[0]);
    case Kind::Mixture: {
      if (q_ >= 1.0) return a_->log_density(x);
      if (q_ <= 0.0) return b_->log_density(x);
      const double la = std::log(q_) + a_->log_density(x);
      const double lb = std::log1p(-q_) + b_->log_density(x);
      const double hi = std::max(la, lb);
      return hi + std::log1p(std::exp(std::min(la, lb) - hi));
    }
    default: throw UnsupportedPair("log_density: handle has no density");
  }
}

double DistributionHandle::density1d(double x) const {
  if (dim() != 1) throw UnsupportedPair("density1d: not one-dimensional");
  switch (kind) {
    case Kind::Gaussian: return stats::norm_pdf(x, mean_[0], cov_(0, 0));
    case Kind::Conjugate: return conj_->density(x);
    case Kind::Mixture: return q_ * a_->density1d(x) + (1.0 - q_) * b_->density1d(x);
    default: throw UnsupportedPair("density1d: handle has no density");
  }
}

double DistributionHandle::cdf1d(double x) const {
  if (dim() != 1) throw UnsupportedPair("cdf1d: not one-dimensional");
  switch (kind) {
    case Kind::Gaussian: return stats::norm_cdf(x, mean_[0], std::sqrt(cov_(0, 0)));
    case Kind::Conjugate: return conj_->cdf(x);
    case Kind::PointMass: return x >= location_[0] ? 1.0 : 0.0;
    case Kind::Mixture: return q_ * a_->cdf1d(x) + (1.0 - q_) * b_->cdf1d(x);
    case Kind::Empirical: {
      const auto& col = samples_.col(0);
      Eigen::Index cnt = 0;
      for (Eigen::Index i = 0; i < col.size(); ++i) cnt += col[i] <= x;
      return static_cast<double>(cnt) / static_cast<double>(col.size());
    }
  }
  return 0.0;
}

std::pair<double, double> DistributionHandle::support1d() const {
  if (dim() != 1) throw UnsupportedPair("support1d: not one-dimensional");
  switch (kind) {
    case Kind::Gaussian: {
      const double sd = std::sqrt(cov_(0, 0));
      return {mean_[0] - 10.0 * sd, mean_[0] + 10.0 * sd};
    }
    case Kind::Conjugate: {
      const double m = conj_->mean();
      const double sd = std::sqrt(conj_->variance());
      double lo = m - 10.0 * sd;
      double hi = m + 10.0 * sd;
      switch (conj_->family.kind) {
        case Family::ExpGamma: lo = std::max(lo, 0.0); break;
        case Family::ParetoGamma: lo = std::max(lo, 0.0); break;
        case Family::BernBeta: lo = std::max(lo, 0.0); hi = std::min(hi, 1.0); break;
        case Family::GaussGauss: break;
      }
      return {lo, hi};
    }
    case Kind::PointMass: return {location_[0], location_[0]};
    case Kind::Mixture: {
      const auto [alo, ahi] = a_->support1d();
      const auto [blo, bhi] = b_->support1d();
      return {std::min(alo, blo), std::max(ahi, bhi)};
    }
    case Kind::Empirical: return {samples_.col(0).minCoeff(), samples_.col(0).maxCoeff()};
  }
  return {0.0, 0.0};
}

double DistributionHandle::quantile1d(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw Error("quantile1d: u outside [0,1]");
  switch (kind) {
    case Kind::PointMass: return location_[0];
    case Kind::Empirical: {
      std::vector<double> v(samples_.col(0).data(), samples_.col(0).data() + samples_.rows());
      std::sort(v.begin(), v.end());
      const auto m = static_cast<double>(v.size());
      auto idx = static_cast<std::ptrdiff_t>(std::ceil(u * m)) - 1;
      idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(v.size()) - 1);
      return v[static_cast<size_t>(idx)];
    }
    default: break;
  }
  auto [lo, hi] = support1d();
  if (cdf1d(lo) > u) return lo;
  if (cdf1d(hi) < u) return hi;
  const double tol = 1e-10 * std::max(1.0, hi - lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (cdf1d(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd DistributionHandle::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Gaussian: {
      const auto llt = checked_llt(cov_);
      Eigen::VectorXd z(mean_.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.gauss();
      return mean_ + llt.matrixL() * z;
    }
    case Kind::PointMass: return location_;
    case Kind::Conjugate: {
      Eigen::VectorXd x(1);
      x[0] = conj_->sample(rng);
      return x;
    }
    case Kind::Mixture: return rng.uniform() < q_ ? a_->sample(rng) : b_->sample(rng);
    case Kind::Empirical: {
      const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(samples_.rows())));
      return samples_.row(i).transpose();
    }
  }
  throw Error("sample: unreachable");
}

namespace {

// Adaptive trapezoid with interval doubling; rel_tol on the final value.
template <typename F>
double trapezoid_refine(F&& f, double lo, double hi, double rel_tol, int max_doublings = 14) {
  int n = 256;
  double h = (hi - lo) / n;
  double sum = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) sum += f(lo + i * h);
  double prev = sum * h;
  for (int d = 0; d < max_doublings; ++d) {
    double add = 0.0;
    for (int i = 0; i < n; ++i) add += f(lo + (i + 0.5) * h);
    const double cur = 0.5 * prev + 0.5 * h * add;
    n *= 2;
    h *= 0.5;
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-12)) return cur;
    prev = cur;
  }
  return prev;
}

MetricResult tv_1d(const DistributionHandle& a, const DistributionHandle& b) {
  const auto [alo, ahi] = a.support1d();
  const auto [blo, bhi] = b.support1d();
  const double lo = std::min(alo, blo);
  const double hi = std::max(ahi, bhi);
  auto f = [&](double x) { return std::abs(a.density1d(x) - b.density1d(x)); };
  const double v = 0.5 * trapezoid_refine(f, lo, hi, 1e-4);
  return {std::clamp(v, 0.0, 1.0), 0.0};
}

MetricResult tv_importance(const DistributionHandle& a, const DistributionHandle& b,
                           const MetricConfig& cfg) {
  Rng rng = Rng(cfg.seed).sub("tv-importance");
  double sum = 0.0;
  double sumsq = 0.0;
  const int m = std::max(cfg.samples, 2);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd x = a.sample(rng);
    const double ratio = std::exp(b.log_density(x) - a.log_density(x));
    const double v = 0.5 * std::abs(1.0 - ratio);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / m;
  const double var = std::max(0.0, sumsq / m - mean * mean);
  return {mean, std::sqrt(var / m)};
}

// Gauss-Legendre nodes/weights on (0,1), computed once.
const std::vector<std::pair<double, double>>& unit_gl_rule() {
  static const std::vector<std::pair<double, double>> rule = [] {
    const int n = 10000;
    std::vector<std::pair<double, double>> r(n);
    constexpr double kPi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
      // Newton on P_n from the Chebyshev-like initial guess.
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        pp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / pp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * pp * pp);
      r[static_cast<size_t>(i)] = {0.5 * (1.0 - x), 0.5 * w};  // map [-1,1] -> (0,1), descending x
    }
    return r;
  }();
  return rule;
}

bool quantile_capable(const DistributionHandle& h) {
  return h.dim() == 1 &&
         (h.has_density() || h.kind == DistributionHandle::Kind::PointMass ||
          h.kind == DistributionHandle::Kind::Empirical);
}

MetricResult wasserstein_quantile_1d(const DistributionHandle& a, const DistributionHandle& b, int p) {
  double acc = 0.0;
  for (const auto& [u, w] : unit_gl_rule()) {
    acc += w * std::pow(std::abs(a.quantile1d(u) - b.quantile1d(u)), p);
  }
  return {std::pow(acc, 1.0 / p), 0.0};
}

MetricResult wasserstein_vs_point(const DistributionHandle& dist, const Eigen::VectorXd& loc, int p) {
  switch (dist.kind) {
    case DistributionHandle::Kind::PointMass:
      return {(dist.location_ - loc).norm(), 0.0};
    case DistributionHandle::Kind::Gaussian:
      if (p == 2) return {std::sqrt(dist.cov_.trace() + (dist.mean_ - loc).squaredNorm()), 0.0};
      break;
    case DistributionHandle::Kind::Empirical: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < dist.samples_.rows(); ++i)
        acc += std::pow((dist.samples_.row(i).transpose() - loc).norm(), p);
      return {std::pow(acc / static_cast<double>(dist.samples_.rows()), 1.0 / p), 0.0};
    }
    case DistributionHandle::Kind::Mixture: {
      const MetricResult wa = wasserstein_vs_point(*dist.a_, loc, p);
      const MetricResult wb = wasserstein_vs_point(*dist.b_, loc, p);
      // p-th moment of the mixture is the mixture of p-th moments
      const double mp = dist.q_ * std::pow(wa.value, p) + (1.0 - dist.q_) * std::pow(wb.value, p);
      return {std::pow(mp, 1.0 / p), 0.0};
    }
    default: break;
  }
  if (dist.dim() == 1 && dist.has_density()) {
    const auto [lo, hi] = dist.support1d();
    auto f = [&](double x) { return std::pow(std::abs(x - loc[0]), p) * dist.density1d(x); };
    return {std::pow(trapezoid_refine(f, lo, hi, 1e-8), 1.0 / p), 0.0};
  }
  throw UnsupportedPair("wasserstein_p: unsupported pair against a point mass");
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

MetricResult wasserstein_gaussians(const DistributionHandle& a, const DistributionHandle& b) {
  const Eigen::MatrixXd rb = spd_sqrt(b.cov_);
  const Eigen::MatrixXd cross = spd_sqrt(rb * a.cov_ * rb);
  const double bures = a.cov_.trace() + b.cov_.trace() - 2.0 * cross.trace();
  const double d2 = (a.mean_ - b.mean_).squaredNorm() + std::max(bures, 0.0);
  return {std::sqrt(d2), 0.0};
}

}  // namespace

MetricResult tv_distance(const DistributionHandle& a, const DistributionHandle& b,
                         const MetricConfig& cfg) {
  if (a.dim() != b.dim()) throw UnsupportedPair("tv_distance: dimension mismatch");
  if (a.dim() == 1 && a.has_density() && b.has_density()) return tv_1d(a, b);
  if (a.has_density() && b.has_density()) return tv_importance(a, b, cfg);
  throw UnsupportedPair("tv_distance: needs densities on both sides");
}

MetricResult wasserstein_p(const DistributionHandle& a, const DistributionHandle& b, int p,
                           const MetricConfig& cfg) {
  (void)cfg;
  if (p < 1) throw ConfigError("wasserstein_p: p must be >= 1");
  if (a.dim() != b.dim()) throw UnsupportedPair("wasserstein_p: dimension mismatch");

  if (b.kind == DistributionHandle::Kind::PointMass) return wasserstein_vs_point(a, b.location_, p);
  if (a.kind == DistributionHandle::Kind::PointMass) return wasserstein_vs_point(b, a.location_, p);

  if (a.kind == DistributionHandle::Kind::Empirical && b.kind == DistributionHandle::Kind::Empirical &&
      a.dim() == 1 && a.samples_.rows() == b.samples_.rows()) {
    std::vector<double> xs(a.samples_.col(0).data(), a.samples_.col(0).data() + a.samples_.rows());
    std::vector<double> ys(b.samples_.col(0).data(), b.samples_.col(0).data() + b.samples_.rows());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) acc += std::pow(std::abs(xs[i] - ys[i]), p);
    return {std::pow(acc / static_cast<double>(xs.size()), 1.0 / p), 0.0};
  }

  if (a.dim() == 1 && quantile_capable(a) && quantile_capable(b))
    return wasserstein_quantile_1d(a, b, p);

  if (a.kind == DistributionHandle::Kind::Gaussian && b.kind == DistributionHandle::Kind::Gaussian &&
      p == 2)
    return wasserstein_gaussians(a, b);

  throw UnsupportedPair("wasserstein_p: unsupported pair");
}

MetricResult moment_discrepancy(const DistributionHandle& post, const DistributionHandle& target,
                                int k, const Eigen::VectorXd& theta_star, double scale,
                                const MetricConfig& cfg) {
  if (k < 0) throw ConfigError("moment_discrepancy: k must be >= 0");
  if (!post.has_density() || !target.has_density())
    throw UnsupportedPair("moment_discrepancy: needs densities on both sides");
  if (post.dim() != target.dim() || post.dim() != theta_star.size())
    throw UnsupportedPair("moment_discrepancy: dimension mismatch");

  const double root = std::sqrt(scale);
  const int m = std::max(cfg.samples, 2);
  Rng rng = Rng(cfg.seed).sub("moment-discrepancy");

  auto one_side = [&](const DistributionHandle& from, const DistributionHandle& other) {
    double sum = 0.0;
    double sumsq = 0.0;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd x = from.sample(rng);
      const double weight = std::pow(root * (x - theta_star).norm(), k);
      const double ratio = std::exp(other.log_density(x) - from.log_density(x));
      const double v = weight * std::abs(1.0 - ratio);
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / m;
    const double var = std::max(0.0, sumsq / m - mean * mean);
    return std::pair<double, double>{mean, var / m};
  };

  const auto [v1, var1] = one_side(post, target);
  const auto [v2, var2] = one_side(target, post);
  return {0.5 * (v1 + v2), 0.5 * std::sqrt(var1 + var2)};
}

DistributionHandle sample_mixed(const MixedAlphaLaw& law, const DistributionHandle& a,
                                const DistributionHandle& b, int m, std::uint64_t seed) {
  if (m < 1) throw Error("sample_mixed: m must be >= 1");
  if (!(law.q >= 0.0 && law.q <= 1.0)) throw Error("sample_mixed: q outside [0,1]");
  Rng rng = Rng(seed).sub("sample-mixed");
  Eigen::MatrixXd draws(m, a.dim());
  for (int i = 0; i < m; ++i) {
    const bool pick_a = rng.uniform() < law.q;
    draws.row(i) = (pick_a ? a : b).sample(rng).transpose();
  }
  return DistributionHandle::empirical(std::move(draws));
}

std::vector<Theorem3Row> theorem3_check(const Dataset& pool, const MixedAlphaLaw& law,
                                        const std::vector<long>& n_grid, const Theorem3Config& cfg) {
  pool.validate();
  if (!(law.q >= 0.0 && law.q <= 1.0)) throw Error("theorem3_check: q outside [0,1]");
  std::vector<Theorem3Row> rows;
  for (long n : n_grid) {
    if (n < 2 || n > pool.n()) throw InsufficientData("theorem3_check: n outside pool");
    Dataset d;
    d.X = pool.X.topRows(n);
    d.y = pool.y.head(n);
    d.sigma2 = pool.sigma2;

    const double alpha_n = law.alpha_small.at(static_cast<double>(n));
    const double gamma_n = law.gamma_large.at(static_cast<double>(n));
    const GaussianPosterior comp_a = ridge_posterior(d, alpha_n, Prior::UnitGaussian);
    const GaussianPosterior comp_b = ridge_posterior(d, gamma_n, Prior::Flat);
    const Eigen::VectorXd mle = comp_b.mean;  // flat-prior mean is the OLS fit

    const auto phi_n = DistributionHandle::gaussian(
        mle, (d.sigma2 / (alpha_n * static_cast<double>(n))) *
                 Eigen::MatrixXd::Identity(d.p(), d.p()));
    const auto delta = DistributionHandle::point_mass(mle);
    const auto ha = DistributionHandle::from_posterior(comp_a);
    const auto hb = DistributionHandle::from_posterior(comp_b);

    const double wa = wasserstein_p(ha, phi_n, 2).value;
    const double wb = wasserstein_p(hb, delta, 2).value;
    const double bound = std::sqrt(law.q * wa * wa + (1.0 - law.q) * wb * wb);

    rows.push_back({n, "w2_mix_bound", bound, 0.0});
    rows.push_back({n, "w2_alpha_component", wa, 0.0});
    rows.push_back({n, "w2_gamma_component", wb, 0.0});

    if (d.p() == 1) {
      const auto mix = DistributionHandle::mixture(law.q, ha, hb);
      const auto limit = DistributionHandle::mixture(law.q, phi_n, delta);
      Rng rng = Rng(cfg.seed).sub("theorem3").sub(static_cast<std::uint64_t>(n));
      Eigen::MatrixXd xs(cfg.empirical_samples, 1);
      Eigen::MatrixXd ys(cfg.empirical_samples, 1);
      for (int i = 0; i < cfg.empirical_samples; ++i) {
        xs(i, 0) = mix.sample(rng)[0];
        ys(i, 0) = limit.sample(rng)[0];
      }
      const double we = wasserstein_p(DistributionHandle::empirical(std::move(xs)),
                                      DistributionHandle::empirical(std::move(ys)), 2)
                            .value;
      rows.push_back({n, "w2_empirical", we, 0.0});
    }
  }
  return rows;
}

}  // namespace tempered
