#include "tempered/conjugate.hpp"

#include <algorithm>
#include <cmath>

#include "tempered/metrics.hpp"
#include "tempered/stats.hpp"

namespace tempered {

const char* family_name(Family f) {
  switch (f) {
    case Family::ExpGamma: return "exp-gamma";
    case Family::ParetoGamma: return "pareto-gamma";
    case Family::BernBeta: return "bern-beta";
    case Family::GaussGauss: return "gauss-gauss";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "exp-gamma") return Family::ExpGamma;
  if (name == "pareto-gamma") return Family::ParetoGamma;
  if (name == "bern-beta") return Family::BernBeta;
  if (name == "gauss-gauss") return Family::GaussGauss;
  throw ConfigError("unknown family: " + name);
}

ConjugateFamily ConjugateFamily::exp_gamma(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw ParameterOutOfSpace("exp_gamma: a, b must be > 0");
  ConjugateFamily f;
  f.kind = Family::ExpGamma;
  f.a = a;
  f.b = b;
  return f;
}

ConjugateFamily ConjugateFamily::pareto_gamma(double a, double b, double xm) {
  if (!(a > 0.0 && b > 0.0 && xm > 0.0)) throw ParameterOutOfSpace("pareto_gamma: a, b, xm must be > 0");
  ConjugateFamily f;
  f.kind = Family::ParetoGamma;
  f.a = a;
  f.b = b;
  f.xm = xm;
  return f;
}

ConjugateFamily ConjugateFamily::bern_beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw ParameterOutOfSpace("bern_beta: a, b must be > 0");
  ConjugateFamily f;
  f.kind = Family::BernBeta;
  f.a = a;
  f.b = b;
  return f;
}

ConjugateFamily ConjugateFamily::gauss_gauss(double mu0, double sigma02, double sigma2) {
  if (!(sigma02 > 0.0 && sigma2 > 0.0)) throw ParameterOutOfSpace("gauss_gauss: variances must be > 0");
  ConjugateFamily f;
  f.kind = Family::GaussGauss;
  f.mu0 = mu0;
  f.sigma02 = sigma02;
  f.sigma2 = sigma2;
  return f;
}

double ConjugateFamily::prior_xi() const {
  switch (kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return b;
    case Family::BernBeta: return a - 1.0;
    case Family::GaussGauss: return mu0 / sigma02;
  }
  return 0.0;
}

double ConjugateFamily::prior_nu() const {
  switch (kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return a - 1.0;
    case Family::BernBeta: return a + b - 2.0;
    case Family::GaussGauss: return sigma2 / sigma02;
  }
  return 0.0;
}

double ConjugateFamily::sufficient_stat(const std::vector<double>& data) const {
  double t = 0.0;
  for (double x : data) {
    if (!std::isfinite(x)) throw SupportViolation("sufficient_stat: non-finite observation");
    switch (kind) {
      case Family::ExpGamma:
        if (!(x > 0.0)) throw SupportViolation("ExpGamma: data must be positive");
        t += x;
        break;
      case Family::ParetoGamma:
        if (!(x >= xm)) throw SupportViolation("ParetoGamma: data must be >= xm");
        t += std::log(x / xm);
        break;
      case Family::BernBeta:
        if (x != 0.0 && x != 1.0) throw SupportViolation("BernBeta: data must be 0 or 1");
        t += x;
        break;
      case Family::GaussGauss: t += x / sigma2; break;
    }
  }
  return t;
}

double ConjugateFamily::mean_sufficient(double eta_star) const {
  switch (kind) {
    case Family::ExpGamma:
      if (!(eta_star < 0.0)) throw ParameterOutOfSpace("ExpGamma: eta* must be negative");
      return -1.0 / eta_star;
    case Family::ParetoGamma:
      if (!(eta_star < -1.0)) throw ParameterOutOfSpace("ParetoGamma: eta* must be < -1");
      return -1.0 / (eta_star + 1.0);
    case Family::BernBeta: return 1.0 / (1.0 + std::exp(-eta_star));
    case Family::GaussGauss: return eta_star / sigma2;
  }
  return 0.0;
}

double ConjugateFamily::natural_from_conventional(double theta) const {
  switch (kind) {
    case Family::ExpGamma: return -theta;
    case Family::ParetoGamma: return -(theta + 1.0);
    case Family::BernBeta: return std::log(theta) - std::log1p(-theta);
    case Family::GaussGauss: return theta;
  }
  return theta;
}

double ConjugateFamily::sample_datum(double theta, Rng& rng) const {
  switch (kind) {
    case Family::ExpGamma: return rng.exponential(theta);
    case Family::ParetoGamma: return xm * std::pow(rng.uniform_pos(), -1.0 / theta);
    case Family::BernBeta: return rng.bernoulli(theta) ? 1.0 : 0.0;
    case Family::GaussGauss: return rng.gauss(theta, std::sqrt(sigma2));
  }
  return 0.0;
}

double ConjugateFamily::mle(const std::vector<double>& data) const {
  if (data.empty()) throw InsufficientData("mle: no data");
  const double n = static_cast<double>(data.size());
  const double t = sufficient_stat(data);
  switch (kind) {
    case Family::ExpGamma:
      return n / t;
    case Family::ParetoGamma:
      if (!(t > 0.0)) throw Error("mle: degenerate Pareto sample");
      return n / t;
    case Family::BernBeta: {
      const double phat = t / n;
      if (phat <= 0.0 || phat >= 1.0) throw Error("mle: Bernoulli sample at boundary");
      return phat;
    }
    case Family::GaussGauss: return sigma2 * t / n;  // T sums x/sigma2
  }
  return 0.0;
}

double ConjugateFamily::fisher_info(double theta) const {
  switch (kind) {
    case Family::ExpGamma: return 1.0 / (theta * theta);
    case Family::ParetoGamma: return 1.0 / (theta * theta);
    case Family::BernBeta: return 1.0 / (theta * (1.0 - theta));
    case Family::GaussGauss: return 1.0 / sigma2;
  }
  return 1.0;
}

double ConjugatePosterior::gamma_shape() const {
  const double s = nu_n + 1.0;
  if (!(s > 0.0)) throw ParameterOutOfSpace("gamma_shape: shape must be > 0");
  return s;
}

double ConjugatePosterior::gamma_rate() const {
  if (!(xi_n > 0.0)) throw ParameterOutOfSpace("gamma_rate: rate must be > 0");
  return xi_n;
}

double ConjugatePosterior::beta_a() const {
  const double v = xi_n + 1.0;
  if (!(v > 0.0)) throw ParameterOutOfSpace("beta_a: must be > 0");
  return v;
}

double ConjugatePosterior::beta_b() const {
  const double v = nu_n - xi_n + 1.0;
  if (!(v > 0.0)) throw ParameterOutOfSpace("beta_b: must be > 0");
  return v;
}

double ConjugatePosterior::gauss_mean() const {
  if (!(nu_n > 0.0)) throw ParameterOutOfSpace("gauss_mean: nu must be > 0");
  return xi_n * family.sigma2 / nu_n;
}

double ConjugatePosterior::gauss_var() const {
  if (!(nu_n > 0.0)) throw ParameterOutOfSpace("gauss_var: nu must be > 0");
  return family.sigma2 / nu_n;
}

double ConjugatePosterior::mean() const {
  switch (family.kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return gamma_shape() / gamma_rate();
    case Family::BernBeta: return beta_a() / (beta_a() + beta_b());
    case Family::GaussGauss: return gauss_mean();
  }
  return 0.0;
}

double ConjugatePosterior::variance() const {
  switch (family.kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return gamma_shape() / (gamma_rate() * gamma_rate());
    case Family::BernBeta: {
      const double a = beta_a();
      const double b = beta_b();
      return a * b / ((a + b) * (a + b) * (a + b + 1.0));
    }
    case Family::GaussGauss: return gauss_var();
  }
  return 0.0;
}

double ConjugatePosterior::log_density(double theta) const {
  switch (family.kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return stats::gamma_logpdf(theta, gamma_shape(), gamma_rate());
    case Family::BernBeta: return stats::beta_logpdf(theta, beta_a(), beta_b());
    case Family::GaussGauss: return stats::norm_logpdf(theta, gauss_mean(), gauss_var());
  }
  return 0.0;
}

double ConjugatePosterior::cdf(double theta) const {
  switch (family.kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return stats::gamma_cdf(theta, gamma_shape(), gamma_rate());
    case Family::BernBeta: return stats::beta_cdf(theta, beta_a(), beta_b());
    case Family::GaussGauss: return stats::norm_cdf(theta, gauss_mean(), std::sqrt(gauss_var()));
  }
  return 0.0;
}

double ConjugatePosterior::sample(Rng& rng) const {
  switch (family.kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return rng.gamma(gamma_shape(), gamma_rate());
    case Family::BernBeta: return rng.beta(beta_a(), beta_b());
    case Family::GaussGauss: return rng.gauss(gauss_mean(), std::sqrt(gauss_var()));
  }
  return 0.0;
}

ConjugatePosterior alpha_update(const ConjugateFamily& f, const std::vector<double>& data,
                                double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw NonPositiveAlpha("alpha_update: alpha must be >= 0");
  ConjugatePosterior post;
  post.family = f;
  post.xi_n = f.prior_xi() + alpha * f.sufficient_stat(data);
  post.nu_n = f.prior_nu() + alpha * static_cast<double>(data.size());
  return post;
}

ConjugatePosterior prior_posterior(const ConjugateFamily& f) { return alpha_update(f, {}, 0.0); }

std::complex<double> char_function(const ConjugatePosterior& p, double t) {
  switch (p.family.kind) {
    case Family::ExpGamma:
    case Family::ParetoGamma: return stats::gamma_cf(t, p.gamma_shape(), p.gamma_rate());
    case Family::BernBeta: return stats::beta_cf(t, p.beta_a(), p.beta_b());
    case Family::GaussGauss: return stats::gauss_cf(t, p.gauss_mean(), p.gauss_var());
  }
  return {1.0, 0.0};
}

LimitParams limit_params(const ConjugateFamily& f, double alpha0, double eta_star) {
  if (!(alpha0 >= 0.0)) throw ParameterOutOfSpace("limit_params: alpha0 must be >= 0");
  LimitParams lp;
  lp.xi_prime = f.prior_xi() + alpha0 * f.mean_sufficient(eta_star);
  lp.nu_prime = f.prior_nu() + alpha0;
  return lp;
}

std::vector<BvmCheckRow> bvm_failure_check(const ConjugateFamily& f, double alpha0,
                                           double eta_star, const BvmCheckConfig& cfg) {
  if (cfg.n_grid.empty()) throw ConfigError("bvm_failure_check: empty n grid");
  for (size_t i = 1; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] <= cfg.n_grid[i - 1]) throw ConfigError("bvm_failure_check: n grid must increase");
  }
  // Conventional pseudo-true parameter from eta*.
  double theta_star = 0.0;
  switch (f.kind) {
    case Family::ExpGamma: theta_star = -eta_star; break;
    case Family::ParetoGamma: theta_star = -eta_star - 1.0; break;
    case Family::BernBeta: theta_star = 1.0 / (1.0 + std::exp(-eta_star)); break;
    case Family::GaussGauss: theta_star = eta_star; break;
  }

  std::vector<BvmCheckRow> rows;
  std::vector<double> data;
  const Rng root = Rng(cfg.seed).sub("bvm-check");
  for (long n : cfg.n_grid) {
    for (int rep = 0; rep < cfg.replications; ++rep) {
      Rng rng = root.sub(static_cast<std::uint64_t>(n)).sub(static_cast<std::uint64_t>(rep));
      data.resize(static_cast<size_t>(n));
      for (auto& x : data) x = f.sample_datum(theta_star, rng);

      const double alpha_n = cfg.schedule == BvmCheckConfig::Schedule::Alpha0OverN
                                 ? alpha0 / static_cast<double>(n)
                                 : alpha0 / std::sqrt(static_cast<double>(n));
      const ConjugatePosterior post = alpha_update(f, data, alpha_n);

      const LimitParams lp = limit_params(f, alpha_n * static_cast<double>(n), eta_star);
      ConjugatePosterior limit;
      limit.family = f;
      limit.xi_n = lp.xi_prime;
      limit.nu_n = lp.nu_prime;

      double gap = 0.0;
      for (int k = 0; k < cfg.t_points; ++k) {
        const double t = -cfg.t_max + 2.0 * cfg.t_max * k / (cfg.t_points - 1);
        gap = std::max(gap, std::abs(char_function(post, t) - char_function(limit, t)));
      }

      const double mle = f.mle(data);
      const double target_var = 1.0 / (alpha_n * static_cast<double>(n) * f.fisher_info(theta_star));
      const auto target = DistributionHandle::gaussian1d(mle, target_var);
      const double tv = tv_distance(DistributionHandle::conjugate(post), target).value;

      rows.push_back({n, rep, gap, tv});
    }
  }
  return rows;
}

}  // namespace tempered
