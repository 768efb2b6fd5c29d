#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "tempered/rng.hpp"
#include "tempered/stats.hpp"

using namespace tempered;

TEST_CASE("norm_quantile inverts norm_cdf") {
  for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-6}) {
    const double z = stats::norm_quantile(p);
    CHECK(stats::norm_cdf(z) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(stats::norm_quantile(0.5) == 0.0);
}

TEST_CASE("incomplete gamma and beta against quadrature") {
  // P(a, x) = int_0^x t^{a-1} e^-t / Gamma(a)
  for (auto [a, x] : {std::pair{2.0, 1.5}, {5.5, 3.0}, {1.0, 0.2}, {10.0, 14.0}}) {
    const double ref = oracles::quad_interval(
        [&](double t) { return std::exp((a - 1.0) * std::log(t) - t - std::lgamma(a)); }, 1e-12, x, 400);
    CHECK(stats::gamma_p(a, x) == doctest::Approx(ref).epsilon(1e-9));
    CHECK(stats::gamma_q(a, x) == doctest::Approx(1.0 - ref).epsilon(1e-8));
  }
  for (auto [a, b, x] : {std::tuple{2.0, 3.0, 0.4}, {5.0, 1.5, 0.8}, {0.7, 0.9, 0.5}}) {
    const double lb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    double ref;
    if (a >= 1.0) {
      ref = oracles::quad_interval(
          [&](double t) {
            return std::exp((a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - lb);
          },
          1e-300, x, 400);
    } else {
      // substitution t = x u^{1/a} removes the left-endpoint singularity
      ref = oracles::quad_interval(
          [&](double u) {
            const double t = x * std::pow(u, 1.0 / a);
            return std::exp(a * std::log(x) - std::log(a) + (b - 1.0) * std::log1p(-t) - lb);
          },
          0.0, 1.0, 400);
    }
    CHECK(stats::beta_inc(a, b, x) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("beta characteristic function matches numerical Fourier transform") {
  const double a = 3.0, b = 5.0;
  for (double t : {-5.0, -1.7, 0.0, 0.9, 5.0}) {
    const auto cf = stats::beta_cf(t, a, b);
    const double re = oracles::quad_interval(
        [&](double x) { return std::cos(t * x) * std::exp(stats::beta_logpdf(x, a, b)); }, 1e-12,
        1.0 - 1e-12, 400);
    const double im = oracles::quad_interval(
        [&](double x) { return std::sin(t * x) * std::exp(stats::beta_logpdf(x, a, b)); }, 1e-12,
        1.0 - 1e-12, 400);
    CHECK(cf.real() == doctest::Approx(re).epsilon(1e-7));
    CHECK(cf.imag() == doctest::Approx(im).epsilon(1e-7));
  }
}

TEST_CASE("rng streams are counter-based and splittable") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // sub() is independent of the parent's consumption
  Rng c(42);
  c.next_u64();
  c.next_u64();
  Rng s1 = Rng(42).sub(7);
  Rng s2 = c.sub(7);
  for (int i = 0; i < 10; ++i) CHECK(s1.next_u64() == s2.next_u64());

  // distinct tags give distinct streams
  CHECK(Rng(42).sub(1).next_u64() != Rng(42).sub(2).next_u64());
  CHECK(Rng(42).sub("data").next_u64() != Rng(42).sub("tune").next_u64());
}

TEST_CASE("gaussian and gamma sampling moments") {
  Rng rng(7);
  const int m = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < m; ++i) {
    const double x = rng.gauss();
    s += x;
    s2 += x * x;
  }
  CHECK(s / m == doctest::Approx(0.0).epsilon(0.02));
  CHECK(s2 / m == doctest::Approx(1.0).epsilon(0.02));

  const double shape = 3.5, rate = 2.0;
  s = s2 = 0;
  for (int i = 0; i < m; ++i) {
    const double x = rng.gamma(shape, rate);
    s += x;
    s2 += x * x;
  }
  const double mean = s / m;
  CHECK(mean == doctest::Approx(shape / rate).epsilon(0.02));
  CHECK(s2 / m - mean * mean == doctest::Approx(shape / (rate * rate)).epsilon(0.05));

  // shape < 1 boost path
  s = 0;
  for (int i = 0; i < m; ++i) s += rng.gamma(0.4);
  CHECK(s / m == doctest::Approx(0.4).epsilon(0.05));
}
