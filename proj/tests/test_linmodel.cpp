#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "tempered/linmodel.hpp"
#include "tempered/rng.hpp"
#include "tempered/stats.hpp"

using namespace tempered;

namespace {

Dataset random_dataset(int n, int p, std::uint64_t seed, double sigma2 = 1.0) {
  Rng rng(seed);
  Dataset d;
  d.X.resize(n, p);
  d.y.resize(n);
  d.sigma2 = sigma2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.gauss();
    d.y[i] = rng.gauss();
  }
  return d;
}

}  // namespace

TEST_CASE("ridge_posterior identity design") {
  Dataset d;
  d.X = Eigen::MatrixXd::Identity(2, 2);
  d.y.resize(2);
  d.y << 2.0, 4.0;

  const GaussianPosterior post = ridge_posterior(d, 1.0, Prior::UnitGaussian);
  CHECK(post.mean[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(post.mean[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(post.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.cov(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.cov(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

  // generic quadratic minimizer agrees with the closed form
  const double lambda = d.sigma2 / (1.0 * 2);  // sigma2/alpha scaled by 1/n in the objective
  auto f = [&](const Eigen::VectorXd& b) {
    return (d.y - d.X * b).squaredNorm() / 2.0 + lambda * b.squaredNorm();
  };
  auto g = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
    return -d.X.transpose() * (d.y - d.X * b) + 2.0 * lambda * b;
  };
  const Eigen::VectorXd bmin = oracles::minimize(f, g, Eigen::VectorXd::Zero(2));
  CHECK((bmin - post.mean).norm() < 1e-8);
}

TEST_CASE("ridge_posterior large alpha approaches OLS") {
  const Dataset d = random_dataset(40, 3, 11);
  const Eigen::VectorXd ols = (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.y);
  const GaussianPosterior post = ridge_posterior(d, 1e12, Prior::UnitGaussian);
  CHECK((post.mean - ols).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("flat prior posterior via grid normalization oracle") {
  Dataset d;
  d.X = Eigen::MatrixXd::Identity(2, 2);
  d.y.resize(2);
  d.y << 2.0, 4.0;
  const double alpha = 2.0;
  const GaussianPosterior post = ridge_posterior(d, alpha, Prior::Flat);
  CHECK(post.mean[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(post.mean[1] == doctest::Approx(4.0).epsilon(1e-12));
  // tempering the identity-design likelihood scales the variance by 1/alpha
  CHECK(post.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.cov(1, 1) == doctest::Approx(0.5).epsilon(1e-12));

  // Identity design factorizes; normalize exp(alpha loglik) on a grid in beta_0
  // and compare first and second moments.
  auto logf = [&](double b0) { return -alpha * 0.5 * (d.y[0] - b0) * (d.y[0] - b0); };
  std::vector<double> grid;
  const auto dens = oracles::grid_normalize(logf, -8.0, 12.0, 4001, &grid);
  double m1 = 0.0, m2 = 0.0;
  const double h = grid[1] - grid[0];
  for (size_t i = 0; i < grid.size(); ++i) {
    const double w = (i == 0 || i + 1 == grid.size()) ? 0.5 : 1.0;
    m1 += w * grid[i] * dens[i] * h;
    m2 += w * grid[i] * grid[i] * dens[i] * h;
  }
  CHECK(m1 == doctest::Approx(post.mean[0]).epsilon(1e-6));
  CHECK(m2 - m1 * m1 == doctest::Approx(post.cov(0, 0)).epsilon(1e-6));
}

TEST_CASE("flat prior requires full rank") {
  Dataset d;
  d.X.resize(3, 2);
  d.X << 1, 2, 2, 4, 3, 6;  // second column is a multiple of the first
  d.y.resize(3);
  d.y << 1, 2, 3;
  CHECK_THROWS_AS(ridge_posterior(d, 1.0, Prior::Flat), SingularDesign);
  CHECK_THROWS_AS(ridge_posterior(d, 0.0, Prior::UnitGaussian), NonPositiveAlpha);
  CHECK_THROWS_AS(ridge_posterior(d, -1.0, Prior::UnitGaussian), NonPositiveAlpha);
}

TEST_CASE("vi posterior structure") {
  SUBCASE("orthogonal columns give the full covariance") {
    Dataset d;
    d.X.resize(2, 2);
    d.X << 1, 1, 1, -1;  // X'X = 2I
    d.y.resize(2);
    d.y << 1, 0;
    const GaussianPosterior full = ridge_posterior(d, 1.0, Prior::UnitGaussian);
    const GaussianPosterior vi = vi_posterior(d, 1.0);
    CHECK((full.cov - vi.cov).norm() < 1e-12);
    CHECK(full.mean == vi.mean);  // same linear solve, bitwise

    // hand evaluation: precision = X'X + I = 3I, cov = 1/3 I
    CHECK(vi.cov(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("vi covariance is the inverted diagonal of the precision") {
    const Dataset d = random_dataset(25, 3, 5);
    const double alpha = 0.7;
    const GaussianPosterior vi = vi_posterior(d, alpha);
    const GaussianPosterior full = ridge_posterior(d, alpha, Prior::UnitGaussian);
    CHECK(vi.mean == full.mean);
    const Eigen::MatrixXd prec = (d.X.transpose() * d.X +
                                  (d.sigma2 / alpha) * Eigen::MatrixXd::Identity(3, 3)) /
                                 (d.sigma2 / alpha);
    for (int j = 0; j < 3; ++j) {
      CHECK(vi.cov(j, j) == doctest::Approx(1.0 / prec(j, j)).epsilon(1e-12));
      for (int k = 0; k < 3; ++k) {
        if (j != k) CHECK(vi.cov(j, k) == 0.0);
      }
      CHECK(vi.cov(j, j) > 0.0);
    }
  }
}

TEST_CASE("predictive_logdensity") {
  SUBCASE("degenerate posterior reduces to the plain normal") {
    GaussianPosterior post;
    post.mean.resize(2);
    post.mean << 0.5, -1.0;
    post.cov = Eigen::MatrixXd::Zero(2, 2);
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;
    CHECK(predictive_logdensity(post, x, 0.3, 1.5) ==
          doctest::Approx(stats::norm_logpdf(0.3, -1.5, 1.5)).epsilon(1e-14));
  }

  SUBCASE("1d closed form") {
    GaussianPosterior post;
    post.mean = Eigen::VectorXd::Zero(1);
    post.cov = Eigen::MatrixXd::Identity(1, 1);
    Eigen::VectorXd x(1);
    x << 1.0;
    const double expected = -0.5 * std::log(4.0 * 3.14159265358979323846);
    CHECK(predictive_logdensity(post, x, 0.0, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("matches monte carlo average of the conditional density") {
    const Dataset d = random_dataset(20, 2, 3);
    const GaussianPosterior post = ridge_posterior(d, 0.8, Prior::UnitGaussian);
    Eigen::VectorXd x(2);
    x << 0.7, -0.4;
    const double y = 0.2;
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(post.cov).matrixL();
    Rng rng(99);
    const int m = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd z(2);
      z << rng.gauss(), rng.gauss();
      const Eigen::VectorXd beta = post.mean + l * z;
      const double v = std::exp(stats::norm_logpdf(y, x.dot(beta), d.sigma2));
      sum += v;
      sumsq += v * v;
    }
    const double mc = sum / m;
    const double se = std::sqrt((sumsq / m - mc * mc) / m);
    const double exact = std::exp(predictive_logdensity(post, x, y, d.sigma2));
    CHECK(std::abs(exact - mc) < 3.0 * se);
  }
}

TEST_CASE("estimate_sigma2") {
  SUBCASE("perfect fit gives zero") {
    Dataset d = random_dataset(10, 2, 21);
    Eigen::VectorXd beta(2);
    beta << 1.5, -2.0;
    d.y = d.X * beta;
    CHECK(estimate_sigma2(d) == doctest::Approx(0.0).epsilon(1e-18));
  }
  SUBCASE("hand example") {
    Dataset d;
    d.X = Eigen::MatrixXd::Ones(3, 1);
    d.y.resize(3);
    d.y << 0, 1, 2;
    CHECK(estimate_sigma2(d) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("degenerate dof") {
    Dataset d = random_dataset(2, 2, 22);
    CHECK_THROWS_AS(estimate_sigma2(d), DegenerateDOF);
  }
  SUBCASE("non-negative on random data") {
    for (int s = 0; s < 10; ++s) CHECK(estimate_sigma2(random_dataset(12, 3, 100 + s)) >= 0.0);
  }
}

TEST_CASE("apply_spec") {
  Dataset d = random_dataset(6, 3, 31);
  SUBCASE("identity spec") {
    ModelSpec spec;
    spec.column_subset = {0, 1, 2};
    const Dataset out = apply_spec(d, spec);
    CHECK(out.X == d.X);
    CHECK(out.y == d.y);
  }
  SUBCASE("cps-style full specification") {
    // raw covariates: education, experience, ethnicity
    ModelSpec spec;
    spec.column_subset = {0, 2, 1};
    spec.transforms = {{ColumnTransform::Kind::Square, 1}};
    spec.add_intercept = true;
    const Dataset out = apply_spec(d, spec);
    CHECK(out.X.cols() == 5);  // education, ethnicity, experience, experience^2, intercept
    CHECK(out.X.col(3).isApprox(d.X.col(1).array().square().matrix()));
    CHECK(out.X.col(4) == Eigen::VectorXd::Ones(6));
  }
  SUBCASE("no-experience-squared specification") {
    ModelSpec spec;
    spec.column_subset = {0, 2, 1};
    spec.add_intercept = true;
    const Dataset out = apply_spec(d, spec);
    CHECK(out.X.cols() == 4);
  }
  SUBCASE("bad indices") {
    ModelSpec spec;
    spec.column_subset = {0, 3};
    CHECK_THROWS_AS(apply_spec(d, spec), IndexOutOfRange);
    spec.column_subset = {1, 1};
    CHECK_THROWS_AS(apply_spec(d, spec), IndexOutOfRange);
  }
}

TEST_CASE("ridge duality with the penalized objective") {
  // mean of the tempered posterior minimizes (1/n)|y - Xb|^2 + lambda |b|^2
  // with lambda = 1/(n alpha) when sigma2 = 1
  for (std::uint64_t s : {1u, 2u, 3u}) {
    const Dataset d = random_dataset(15, 2, s);
    for (double alpha : {0.3, 1.0, 4.0}) {
      const double n = static_cast<double>(d.n());
      const double lambda = 1.0 / (n * alpha);
      auto f = [&](const Eigen::VectorXd& b) {
        return (d.y - d.X * b).squaredNorm() / n + lambda * b.squaredNorm();
      };
      auto g = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
        return -2.0 / n * d.X.transpose() * (d.y - d.X * b) + 2.0 * lambda * b;
      };
      const Eigen::VectorXd bmin = oracles::minimize(f, g, Eigen::VectorXd::Zero(2));
      const GaussianPosterior post = ridge_posterior(d, alpha, Prior::UnitGaussian);
      CHECK((bmin - post.mean).norm() < 1e-8);
    }
  }
}

TEST_CASE("shrinkage is monotone in alpha") {
  const Dataset d = random_dataset(30, 3, 17);
  double prev = 0.0;
  for (double alpha : {0.01, 0.1, 0.5, 1.0, 5.0, 50.0, 1e4}) {
    const double norm = ridge_posterior(d, alpha, Prior::UnitGaussian).mean.norm();
    CHECK(norm >= prev - 1e-12);
    prev = norm;
  }
}

TEST_CASE("flat prior covariance scales as 1/alpha") {
  const Dataset d = random_dataset(20, 2, 19);
  const GaussianPosterior a = ridge_posterior(d, 0.5, Prior::Flat);
  const GaussianPosterior b = ridge_posterior(d, 8.0, Prior::Flat);
  CHECK((a.cov * 0.5 - b.cov * 8.0).norm() < 1e-12);
  CHECK(a.mean == b.mean);
}

TEST_CASE("posterior json round trip shape") {
  const Dataset d = random_dataset(5, 2, 23);
  const auto json = ridge_posterior(d, 1.0, Prior::UnitGaussian).to_json();
  CHECK(json.find("\"mean\":[") != std::string::npos);
  CHECK(json.find("\"cov\":[[") != std::string::npos);
  CHECK(json.find("\"alpha\":1") != std::string::npos);
  CHECK(json.find("\"n\":5") != std::string::npos);
}
