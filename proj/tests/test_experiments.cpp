#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tempered/experiments.hpp"
#include "tempered/rng.hpp"

using namespace tempered;

namespace {

AlphaSample sample(long n, Method m, bool mis, int rep, double alpha, bool corner = false) {
  AlphaSample s;
  s.n = n;
  s.method = m;
  s.misspecified = mis;
  s.replication = rep;
  s.alpha_hat = alpha;
  s.is_corner = corner;
  return s;
}

}  // namespace

TEST_CASE("generate shapes and determinism") {
  SimConfig sim;
  sim.n = 50;
  sim.reps = 3;
  sim.master_seed = 5;

  SUBCASE("well-specified keeps all working columns") {
    sim.misspecified = false;
    const Dataset d = generate(sim, 0);
    CHECK(d.n() == 50);
    CHECK(d.p() == 3);
    CHECK(d.sigma2 == 1.0);
  }
  SUBCASE("misspecified drops the first covariate") {
    sim.misspecified = true;
    const Dataset d = generate(sim, 0);
    CHECK(d.p() == 2);
  }
  SUBCASE("same (seed, rep) gives bit-identical data") {
    const Dataset a = generate(sim, 1);
    const Dataset b = generate(sim, 1);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    const Dataset c = generate(sim, 2);
    CHECK(a.y != c.y);
  }
  SUBCASE("rep bounds enforced") { CHECK_THROWS_AS(generate(sim, 3), ConfigError); }
}

TEST_CASE("run_replications accounting and safebayes range") {
  SimConfig sim;
  sim.n = 40;
  sim.reps = 4;
  sim.master_seed = 6;
  sim.misspecified = true;
  const std::vector<Method> methods{Method::LOOCV, Method::SafeBayes};
  const auto samples = run_replications(sim, methods);
  CHECK(samples.size() == 8);
  for (const auto& s : samples) {
    CHECK(s.n == 40);
    if (s.method == Method::SafeBayes) {
      CHECK(s.alpha_hat >= 0.0);
      CHECK(s.alpha_hat <= 1.0);
    }
  }

  // deterministic regardless of thread count
  const auto again = run_replications(sim, methods, {}, 0.70, 4);
  REQUIRE(again.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].alpha_hat == again[i].alpha_hat);
    CHECK(samples[i].is_corner == again[i].is_corner);
  }
}

TEST_CASE("bcv misspecified medians shrink with n") {
  const std::vector<Method> methods{Method::BCV};
  std::vector<double> medians;
  for (long n : {100L, 1000L}) {
    SimConfig sim;
    sim.n = n;
    sim.reps = 20;
    sim.master_seed = 7;
    sim.misspecified = true;
    const auto samples = run_replications(sim, methods);
    std::vector<double> alphas;
    for (const auto& s : samples) {
      if (!s.is_corner) alphas.push_back(s.alpha_hat);
    }
    REQUIRE(alphas.size() >= 10);
    std::sort(alphas.begin(), alphas.end());
    medians.push_back(alphas[alphas.size() / 2]);
  }
  CHECK(medians[1] < medians[0]);
}

TEST_CASE("estimate_rate on exact log-linear data") {
  std::vector<AlphaSample> samples;
  for (long n : {100L, 1000L, 10000L}) {
    for (int rep = 0; rep < 3; ++rep) {
      samples.push_back(sample(n, Method::BCV, true, rep, 2.0 / static_cast<double>(n)));
    }
  }
  const RegimeEstimate est = estimate_rate(samples);
  CHECK(est.gamma_hat == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::exp(est.log_c) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(est.ci_high - est.ci_low == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(est.n_points_used == 9);
  CHECK(est.corner_proportion == 0.0);

  RateOptions mean_opts;
  mean_opts.aggregate_means = true;
  const RegimeEstimate agg = estimate_rate(samples, mean_opts);
  CHECK(agg.gamma_hat == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(agg.n_points_used == 3);  // one pooled point per n
}

TEST_CASE("estimate_rate needs two distinct n among non-corners") {
  std::vector<AlphaSample> samples;
  for (int rep = 0; rep < 5; ++rep) samples.push_back(sample(100, Method::BCV, false, rep, 0.5));
  samples.push_back(sample(1000, Method::BCV, false, 0, INFINITY, true));
  CHECK_THROWS_AS(estimate_rate(samples), InsufficientData);
}

TEST_CASE("corner accounting is exact") {
  std::vector<AlphaSample> samples;
  int corners = 0;
  Rng rng(8);
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    const bool corner = rng.uniform() < 0.3;
    corners += corner;
    samples.push_back(sample(500, Method::TrainTest, false, rep,
                             corner ? INFINITY : 0.1, corner));
  }
  const auto props = corner_proportions_by_n(samples);
  CHECK(props.at(500) * reps == doctest::Approx(static_cast<double>(corners)).epsilon(1e-12));
}

TEST_CASE("classify_regime taxonomy") {
  SUBCASE("constant") {
    std::vector<AlphaSample> samples;
    for (long n : {100L, 1000L, 5000L}) {
      for (int rep = 0; rep < 4; ++rep) samples.push_back(sample(n, Method::LOOCV, false, rep, 0.8));
    }
    CHECK(classify_regime(samples) == Regime::Constant);
  }
  SUBCASE("quickly vanishing") {
    std::vector<AlphaSample> samples;
    for (long n : {100L, 1000L, 5000L}) {
      for (int rep = 0; rep < 4; ++rep) {
        samples.push_back(sample(n, Method::BCV, true, rep, 3.0 / static_cast<double>(n)));
      }
    }
    CHECK(classify_regime(samples) == Regime::QuicklyVanishing);
  }
  SUBCASE("mixed") {
    std::vector<AlphaSample> samples;
    for (long n : {100L, 1000L, 5000L}) {
      for (int rep = 0; rep < 10; ++rep) {
        const bool corner = rep % 2 == 0;
        samples.push_back(sample(n, Method::TrainTest, false, rep,
                                 corner ? INFINITY : std::pow(static_cast<double>(n), -0.6),
                                 corner));
      }
    }
    CHECK(classify_regime(samples) == Regime::Mixed);
  }
  SUBCASE("unclassified diagnostics") {
    std::vector<AlphaSample> samples;
    for (long n : {100L, 1000L, 5000L}) {
      for (int rep = 0; rep < 4; ++rep) {
        samples.push_back(sample(n, Method::BCV, false, rep, std::pow(static_cast<double>(n), -0.5)));
      }
    }
    // slope -0.5 with no corners: neither constant, quickly vanishing, nor mixed
    CHECK(classify_regime(samples) == Regime::Unclassified);
  }
}

TEST_CASE("subsample_study") {
  // synthetic "cps-like" dataset
  Rng rng(9);
  Dataset full;
  const long big = 600;
  full.X.resize(big, 3);
  full.y.resize(big);
  for (long i = 0; i < big; ++i) {
    full.X(i, 0) = 8.0 + 4.0 * rng.uniform();           // education
    full.X(i, 1) = 20.0 * rng.uniform();                // experience
    full.X(i, 2) = rng.bernoulli(0.2) ? 1.0 : 0.0;      // ethnicity
    full.y[i] = 1.0 + 0.08 * full.X(i, 0) + 0.03 * full.X(i, 1) -
                0.0005 * full.X(i, 1) * full.X(i, 1) - 0.2 * full.X(i, 2) + 0.4 * rng.gauss();
  }

  ModelSpec spec;
  spec.column_subset = {0, 2, 1};
  spec.transforms = {{ColumnTransform::Kind::Square, 1}};
  spec.add_intercept = true;

  SUBCASE("one subsample produces one row per method") {
    SubsampleConfig cfg;
    cfg.sizes = {100};
    cfg.reps = 1;
    cfg.methods = {Method::SafeBayes};
    cfg.seed = 3;
    const SubsampleReport report = subsample_study(full, spec, cfg);
    CHECK(report.samples.size() == 1);
    CHECK(report.samples[0].n == 100);
    CHECK(report.samples[0].alpha_hat >= 0.0);
    CHECK(report.samples[0].alpha_hat <= 1.0);
  }

  SUBCASE("size larger than the dataset is rejected") {
    SubsampleConfig cfg;
    cfg.sizes = {601};
    cfg.reps = 1;
    cfg.methods = {Method::LOOCV};
    CHECK_THROWS_AS(subsample_study(full, spec, cfg), SizeTooLarge);
  }

  SUBCASE("deterministic and safebayes concentrates near one") {
    SubsampleConfig cfg;
    cfg.sizes = {150, 300};
    cfg.reps = 5;
    cfg.methods = {Method::SafeBayes};
    cfg.seed = 4;
    const SubsampleReport a = subsample_study(full, spec, cfg);
    const SubsampleReport b = subsample_study(full, spec, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    double mean_alpha = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].alpha_hat == b.samples[i].alpha_hat);
      mean_alpha += a.samples[i].alpha_hat;
    }
    mean_alpha /= static_cast<double>(a.samples.size());
    CHECK(mean_alpha > 0.6);  // near-correct model: safebayes favors alpha near 1
  }
}
