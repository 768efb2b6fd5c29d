#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "tempered/linmodel.hpp"
#include "tempered/mcmc.hpp"
#include "tempered/rng.hpp"
#include "tempered/stats.hpp"

using namespace tempered;

namespace {

LogisticModel random_logistic(int n, const Eigen::VectorXd& beta_star, std::uint64_t seed) {
  Rng rng(seed);
  LogisticModel m;
  m.X.resize(n, beta_star.size());
  m.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < beta_star.size(); ++j) m.X(i, j) = rng.gauss();
    const double prob = 1.0 / (1.0 + std::exp(-m.X.row(i).dot(beta_star)));
    m.y[i] = rng.bernoulli(prob) ? 1.0 : 0.0;
  }
  return m;
}

}  // namespace

TEST_CASE("logistic_mle") {
  SUBCASE("symmetric one-dimensional data has mle zero") {
    LogisticModel m;
    m.X.resize(2, 1);
    m.X << 1.0, -1.0;
    m.y.resize(2);
    m.y << 1.0, 1.0;
    const MleResult r = logistic_mle(m);
    CHECK(std::abs(r.theta_hat[0]) < 1e-8);
  }

  SUBCASE("first-order condition on a random instance") {
    Eigen::VectorXd beta(3);
    beta << 1.0, -0.5, 0.1;
    const LogisticModel m = random_logistic(200, beta, 15);
    const MleResult r = logistic_mle(m);
    CHECK(m.grad_loglik(r.theta_hat).lpNorm<Eigen::Infinity>() < 1e-8);
  }

  SUBCASE("matches a generic optimizer on the same log-likelihood") {
    Eigen::VectorXd beta(2);
    beta << 0.8, -0.3;
    const LogisticModel m = random_logistic(120, beta, 16);
    auto f = [&](const Eigen::VectorXd& b) { return -m.loglik(b); };
    auto g = [&](const Eigen::VectorXd& b) { return oracles::numeric_grad(f, b, 1e-6); };
    const Eigen::VectorXd opt = oracles::minimize(f, g, Eigen::VectorXd::Zero(2), 50000, 1e-10);
    const MleResult r = logistic_mle(m);
    CHECK((opt - r.theta_hat).lpNorm<Eigen::Infinity>() < 1e-6);
  }

  SUBCASE("separable data is rejected") {
    LogisticModel m;
    m.X.resize(4, 1);
    m.X << -2.0, -1.0, 1.0, 2.0;
    m.y.resize(4);
    m.y << 0.0, 0.0, 1.0, 1.0;  // perfectly separated at 0
    CHECK_THROWS_AS(logistic_mle(m), Separation);
  }
}

TEST_CASE("h_n matches a finite-difference hessian") {
  Eigen::VectorXd beta(3);
  beta << 1.0, -0.5, 0.1;
  const LogisticModel m = random_logistic(150, beta, 17);
  const MleResult r = logistic_mle(m);
  const double n = static_cast<double>(m.n());

  // the analytic gradient agrees with a numeric one, so differencing it is a
  // valid (and round-off-safe) route to the second derivatives
  const Eigen::VectorXd g_num =
      oracles::numeric_grad([&](const Eigen::VectorXd& b) { return m.loglik(b); }, r.theta_hat, 1e-6);
  CHECK((m.grad_loglik(r.theta_hat) - g_num).lpNorm<Eigen::Infinity>() < 1e-4);

  const double h = 1e-6;
  for (Eigen::Index b = 0; b < 3; ++b) {
    Eigen::VectorXd hi = r.theta_hat, lo = r.theta_hat;
    hi[b] += h;
    lo[b] -= h;
    const Eigen::VectorXd col = (m.grad_loglik(hi) - m.grad_loglik(lo)) / (2 * h);
    for (Eigen::Index a = 0; a < 3; ++a) {
      CHECK(-col[a] / n == doctest::Approx(r.h_n(a, b)).epsilon(1e-5));
    }
  }
}

TEST_CASE("rw_metropolis degenerate and deterministic behavior") {
  Eigen::VectorXd beta(2);
  beta << 0.5, -0.5;
  const LogisticModel m = random_logistic(80, beta, 18);

  SUBCASE("vanishing step accepts everything") {
    McmcConfig cfg;
    cfg.m_samples = 2000;
    cfg.burn_in = 100;
    cfg.step_scale = 1e-9;
    cfg.seed = 4;
    const Chain c = rw_metropolis(m, 0.5, cfg);
    CHECK(c.acceptance_rate > 0.999);
  }

  SUBCASE("fixed seed gives a bit-identical chain") {
    McmcConfig cfg;
    cfg.m_samples = 3000;
    cfg.burn_in = 500;
    cfg.seed = 11;
    const Chain a = rw_metropolis(m, 0.7, cfg);
    const Chain b = rw_metropolis(m, 0.7, cfg);
    CHECK(a.samples == b.samples);
    CHECK(a.acceptance_rate == b.acceptance_rate);
  }
}

TEST_CASE("sampler recovers the closed-form gaussian linear posterior") {
  // Conjugate sanity arm: target the tempered linear-model posterior, whose
  // mean is available exactly, and check the chain mean against it.
  Rng rng(19);
  const int n = 100, p = 2;
  Dataset d;
  d.X.resize(n, p);
  d.y.resize(n);
  Eigen::VectorXd beta(p);
  beta << 1.0, -0.5;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.gauss();
    d.y[i] = d.X.row(i).dot(beta) + rng.gauss();
  }
  const double alpha = 0.3;
  const GaussianPosterior exact = ridge_posterior(d, alpha, Prior::UnitGaussian);

  auto log_target = [&](const Eigen::VectorXd& b) {
    return -0.5 * alpha * (d.y - d.X * b).squaredNorm() - 0.5 * b.squaredNorm();
  };
  const Eigen::MatrixXd prop_l =
      Eigen::LLT<Eigen::MatrixXd>((2.38 * 2.38 / p) * exact.cov).matrixL();
  McmcConfig cfg;
  cfg.m_samples = 50000;
  cfg.burn_in = 5000;
  cfg.seed = 20;
  const Chain chain = rw_metropolis(log_target, exact.mean, prop_l, cfg);
  const Eigen::VectorXd mean = posterior_mean(chain);

  // batch-means standard error with 50 batches
  const int batches = 50;
  const int bsize = cfg.m_samples / batches;
  for (int j = 0; j < p; ++j) {
    double bs = 0.0, bs2 = 0.0;
    for (int b = 0; b < batches; ++b) {
      const double bm = chain.samples.col(j).segment(b * bsize, bsize).mean();
      bs += bm;
      bs2 += bm * bm;
    }
    const double bvar = std::max(1e-30, bs2 / batches - (bs / batches) * (bs / batches));
    const double se = std::sqrt(bvar / batches);
    CHECK(std::abs(mean[j] - exact.mean[j]) < 4.0 * se);
  }
}

TEST_CASE("posterior_mean basics") {
  Chain c;
  c.samples.resize(1, 2);
  c.samples << 3.0, -1.0;
  CHECK(posterior_mean(c) == c.samples.row(0).transpose());

  c.samples.resize(2, 1);
  c.samples << 1.0, 3.0;
  CHECK(posterior_mean(c)[0] == doctest::Approx(2.0));

  Chain empty;
  empty.samples.resize(0, 2);
  CHECK_THROWS_AS(posterior_mean(empty), Error);
}

TEST_CASE("detailed balance smoke test on a standard normal") {
  McmcConfig cfg;
  cfg.m_samples = 100000;
  cfg.burn_in = 10000;
  cfg.seed = 21;
  const Chain c = rw_metropolis_1d([](double x) { return -0.5 * x * x; }, 0.0, 2.38, cfg);
  std::vector<double> xs(c.samples.col(0).data(), c.samples.col(0).data() + c.samples.rows());
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double F = stats::norm_cdf(xs[i]);
    const double m = static_cast<double>(xs.size());
    ks = std::max(ks, std::abs((i + 1.0) / m - F));
    ks = std::max(ks, std::abs(F - i / m));
  }
  CHECK(ks < 0.02);
}

TEST_CASE("laplace_expectation") {
  Eigen::VectorXd beta(3);
  beta << 1.0, -0.5, 0.1;
  const LogisticModel m = random_logistic(300, beta, 22);
  const LaplaceExpansion le = laplace_expansion(m);

  SUBCASE("constants are exact") {
    CHECK(laplace_expectation(le, [](const Eigen::VectorXd&) { return 4.25; }) == 4.25);
  }

  SUBCASE("coordinate functions return the mle entry") {
    for (int j = 0; j < 3; ++j) {
      CHECK(laplace_expectation(le, [j](const Eigen::VectorXd& t) { return t[j]; }) ==
            le.theta_hat[j]);
    }
  }

  SUBCASE("third-order slices are symmetric and computed on demand") {
    CHECK_FALSE(le.has_third_order());
    const LaplaceExpansion le3 = laplace_expansion(m, true);
    CHECK(le3.has_third_order());
    for (const auto& slice : le3.s_n) {
      CHECK((slice - slice.transpose()).norm() < 1e-12);
    }
  }
}

TEST_CASE("flat prior posterior mean is exactly the mle") {
  Rng rng(23);
  Dataset d;
  d.X.resize(50, 2);
  d.y.resize(50);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 2; ++j) d.X(i, j) = rng.gauss();
    d.y[i] = d.X(i, 0) - 0.3 * d.X(i, 1) + rng.gauss();
  }
  const Eigen::VectorXd ols = (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.y);
  for (double alpha : {0.01, 1.0, 100.0}) {
    const GaussianPosterior flat = ridge_posterior(d, alpha, Prior::Flat);
    CHECK((flat.mean - ols).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("ridge bias times alpha n stays bounded over schedules") {
  Rng rng(24);
  Eigen::VectorXd beta(3);
  beta << 1.0, -0.5, 0.1;
  double max_scaled = 0.0, min_scaled = 1e300;
  for (long n : {100L, 1000L, 10000L}) {
    Dataset d;
    d.X.resize(n, 3);
    d.y.resize(n);
    for (long i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) d.X(i, j) = rng.gauss();
      d.y[i] = d.X.row(i).dot(beta) + rng.gauss();
    }
    const Eigen::VectorXd ols = (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.y);
    for (double expo : {-0.25, -0.5}) {
      const double alpha = std::pow(static_cast<double>(n), expo);
      const GaussianPosterior post = ridge_posterior(d, alpha, Prior::UnitGaussian);
      const double scaled = (post.mean - ols).norm() * alpha * static_cast<double>(n);
      max_scaled = std::max(max_scaled, scaled);
      min_scaled = std::min(min_scaled, scaled);
    }
  }
  CHECK(max_scaled < 10.0 * (min_scaled + 1.0));  // bounded, no growth with n
}

TEST_CASE("closed-form threshold regimes") {
  ClosedFormConfig cfg;
  cfg.n_grid = {100, 1000, 10000};
  cfg.replications = 40;
  cfg.seed = 25;
  const auto rows = closed_form_threshold(cfg);
  REQUIRE(rows.size() == 9);
  auto value = [&](long n, double expo) {
    for (const auto& r : rows) {
      if (r.n == n && r.schedule_exponent == expo) return r.mean_scaled_norm_mle;
    }
    FAIL("row not found");
    return 0.0;
  };
  // |sqrt(n)(ridge - ols)| ~ 1/(alpha sqrt n): grows for n^-3/4, flat for
  // n^-1/2, vanishes for n^-1/4
  CHECK(value(10000, -0.75) / value(100, -0.75) > 2.0);
  const double mid = value(10000, -0.5) / value(100, -0.5);
  CHECK(mid > 0.5);
  CHECK(mid < 2.0);
  CHECK(value(10000, -0.25) / value(100, -0.25) < 0.5);
}

TEST_CASE("figure4 experiment smoke run") {
  Figure4Config cfg;
  cfg.n_grid = {60, 120};
  cfg.replications = 3;
  cfg.mcmc.m_samples = 2000;
  cfg.mcmc.burn_in = 500;
  cfg.seed = 26;
  const auto rows = figure4_experiment(cfg);
  CHECK(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.mean_sq_scaled_diff_mle));
    CHECK(std::isfinite(r.mean_sq_scaled_diff_truth));
    CHECK(r.mean_sq_scaled_diff_mle >= 0.0);
    CHECK(r.mc_se >= 0.0);
  }
  // determinism across runs
  const auto again = figure4_experiment(cfg);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].mean_sq_scaled_diff_mle == again[i].mean_sq_scaled_diff_mle);
  }
}
