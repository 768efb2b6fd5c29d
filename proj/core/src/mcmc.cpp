#include "tempered/mcmc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "tempered/parallel.hpp"
#include "tempered/rng.hpp"

namespace tempered {

void LogisticModel::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw Error("LogisticModel: empty design");
  if (y.size() != X.rows()) throw Error("LogisticModel: y length != rows of X");
  if (!(prior_sd > 0.0)) throw Error("LogisticModel: prior_sd must be > 0");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw Error("LogisticModel: y must be 0/1");
  }
}

double LogisticModel::loglik(const Eigen::VectorXd& beta) const {
  const Eigen::ArrayXd z = (X * beta).array();
  // log(1 + e^z) = max(z, 0) + log1p(e^{-|z|})
  const double softplus = (z.max(0.0) + (-z.abs()).exp().log1p()).sum();
  return y.dot(X * beta) - softplus;
}

Eigen::VectorXd LogisticModel::grad_loglik(const Eigen::VectorXd& beta) const {
  const Eigen::ArrayXd z = (X * beta).array();
  const Eigen::VectorXd mu = (1.0 / (1.0 + (-z).exp())).matrix();
  return X.transpose() * (y - mu);
}

Eigen::MatrixXd LogisticModel::hessian_loglik(const Eigen::VectorXd& beta) const {
  const Eigen::ArrayXd z = (X * beta).array();
  const Eigen::ArrayXd mu = 1.0 / (1.0 + (-z).exp());
  const Eigen::VectorXd w = (mu * (1.0 - mu)).matrix();
  return -(X.transpose() * w.asDiagonal() * X);
}

double LogisticModel::log_prior(const Eigen::VectorXd& beta) const {
  return -0.5 * beta.squaredNorm() / (prior_sd * prior_sd);
}

MleResult logistic_mle(const LogisticModel& m) {
  m.validate();
  const auto p = m.p();
  const double n = static_cast<double>(m.n());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd g = m.grad_loglik(theta);
    if (g.lpNorm<Eigen::Infinity>() < 1e-10) {
      Eigen::MatrixXd h_n = -m.hessian_loglik(theta) / n;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_n, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < 1e-10) throw Separation("logistic_mle: curvature vanished at optimum");
      return {theta, 0.5 * (h_n + h_n.transpose())};
    }
    Eigen::MatrixXd neg_h = -m.hessian_loglik(theta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neg_h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 1e-10 * n)
      throw Separation("logistic_mle: Hessian near singular (separable data?)");
    const Eigen::VectorXd step = neg_h.llt().solve(g);
    theta += step;
    if (theta.norm() > 1e4) throw Separation("logistic_mle: iterates diverging");
  }
  throw NoConvergence("logistic_mle: no convergence in 100 iterations");
}

LaplaceExpansion laplace_expansion(const LogisticModel& m, bool with_third_order) {
  const MleResult mle = logistic_mle(m);
  LaplaceExpansion le;
  le.theta_hat = mle.theta_hat;
  le.h_n = mle.h_n;
  if (with_third_order) {
    const auto p = m.p();
    const double n = static_cast<double>(m.n());
    const Eigen::ArrayXd z = (m.X * le.theta_hat).array();
    const Eigen::ArrayXd mu = 1.0 / (1.0 + (-z).exp());
    const Eigen::ArrayXd w3 = mu * (1.0 - mu) * (1.0 - 2.0 * mu);  // d^3 softplus
    le.s_n.assign(static_cast<size_t>(p), Eigen::MatrixXd::Zero(p, p));
    for (Eigen::Index i = 0; i < m.n(); ++i) {
      const Eigen::VectorXd x = m.X.row(i).transpose();
      for (Eigen::Index j = 0; j < p; ++j) {
        le.s_n[static_cast<size_t>(j)].noalias() += (-w3[i] * x[j] / n) * (x * x.transpose());
      }
    }
  }
  return le;
}

double laplace_expectation(const LaplaceExpansion& le,
                           const std::function<double(const Eigen::VectorXd&)>& q) {
  return q(le.theta_hat);
}

Chain rw_metropolis(const std::function<double(const Eigen::VectorXd&)>& log_target,
                    const Eigen::VectorXd& init, const Eigen::MatrixXd& proposal_chol,
                    const McmcConfig& cfg) {
  if (cfg.m_samples < 1) throw Error("rw_metropolis: m_samples must be >= 1");
  const auto p = init.size();
  Rng rng = Rng(cfg.seed).sub("rw-metropolis");
  Eigen::VectorXd cur = init;
  double cur_lt = log_target(cur);

  Chain chain;
  chain.seed = cfg.seed;
  chain.step_scale = cfg.step_scale;
  chain.samples.resize(cfg.m_samples, p);
  long accepted = 0;
  const long total = static_cast<long>(cfg.m_samples) + cfg.burn_in;
  Eigen::VectorXd z(p);
  Eigen::VectorXd prop(p);
  for (long t = 0; t < total; ++t) {
    for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.gauss();
    prop.noalias() = cur + proposal_chol * z;
    const double prop_lt = log_target(prop);
    const double log_ratio = prop_lt - cur_lt;
    if (log_ratio >= 0.0 || std::log(rng.uniform_pos()) < log_ratio) {
      cur = prop;
      cur_lt = prop_lt;
      ++accepted;
    }
    if (t >= cfg.burn_in) chain.samples.row(t - cfg.burn_in) = cur.transpose();
  }
  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return chain;
}

Chain rw_metropolis(const LogisticModel& m, double alpha, const McmcConfig& cfg) {
  m.validate();
  if (!(alpha > 0.0)) throw NonPositiveAlpha("rw_metropolis: alpha must be > 0");
  const auto p = m.p();
  const double n = static_cast<double>(m.n());

  const MleResult mle = logistic_mle(m);
  const double step = cfg.step_scale > 0.0 ? cfg.step_scale : 2.38 / std::sqrt(static_cast<double>(p));
  // proposal covariance step^2 (alpha n)^-1 H_n^-1
  const Eigen::MatrixXd prop_cov = (step * step / (alpha * n)) *
                                   mle.h_n.llt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd prop_l =
      Eigen::LLT<Eigen::MatrixXd>(0.5 * (prop_cov + prop_cov.transpose())).matrixL();

  auto log_target = [&m, alpha](const Eigen::VectorXd& beta) {
    return alpha * m.loglik(beta) + m.log_prior(beta);
  };
  Chain chain = rw_metropolis(log_target, mle.theta_hat, prop_l, cfg);
  chain.step_scale = step;
  return chain;
}

Chain rw_metropolis_1d(const std::function<double(double)>& log_target, double init,
                       double step_sd, const McmcConfig& cfg) {
  Eigen::VectorXd init_v(1);
  init_v << init;
  Eigen::MatrixXd chol(1, 1);
  chol << step_sd;
  McmcConfig c = cfg;
  c.step_scale = step_sd;
  return rw_metropolis([&](const Eigen::VectorXd& x) { return log_target(x[0]); }, init_v, chol, c);
}

Eigen::VectorXd posterior_mean(const Chain& c) {
  if (c.samples.rows() < 1) throw Error("posterior_mean: empty chain");
  return c.samples.colwise().mean().transpose();
}

std::vector<Figure4Row> figure4_experiment(const Figure4Config& cfg, int threads) {
  Figure4Config c = cfg;
  if (c.beta_star.size() == 0) {
    c.beta_star.resize(3);
    c.beta_star << 1.0, -0.5, 0.1;
  }
  for (size_t i = 1; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("figure4: n grid must increase");
  }
  const auto p = c.beta_star.size();
  const Rng root = Rng(c.seed).sub("figure4");

  struct Cell {
    double sum_mle = 0.0, sumsq_mle = 0.0, sum_truth = 0.0;
    int resamples = 0;
  };
  std::vector<Figure4Row> rows;
  for (long n : c.n_grid) {
    for (double expo : c.schedule_exponents) {
      const double alpha_n = c.schedule_coeff * std::pow(static_cast<double>(n), expo);

      struct RepResult {
        double d_mle = 0.0, d_truth = 0.0, norm_mle = 0.0;
        int resamples = 0;
      };
      std::vector<RepResult> results(static_cast<size_t>(c.replications));
      parallel_for(c.replications, threads, [&](int rep) {
        const auto expo_tag = static_cast<std::uint64_t>(static_cast<std::int64_t>(expo * 1000.0));
        const Rng cell = root.sub(static_cast<std::uint64_t>(n))
                             .sub(expo_tag)
                             .sub(static_cast<std::uint64_t>(rep));
        int resamples = 0;
        for (int attempt = 0;; ++attempt) {
          Rng rng = cell.sub(static_cast<std::uint64_t>(attempt));
          LogisticModel model;
          model.X.resize(n, p);
          model.y.resize(n);
          for (long i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) model.X(i, j) = rng.gauss();
            const double prob = 1.0 / (1.0 + std::exp(-model.X.row(i).dot(c.beta_star)));
            model.y[i] = rng.bernoulli(prob) ? 1.0 : 0.0;
          }
          try {
            const MleResult mle = logistic_mle(model);
            McmcConfig mc = c.mcmc;
            mc.seed = rng.next_u64();
            const Chain chain = rw_metropolis(model, alpha_n, mc);
            const Eigen::VectorXd bayes = posterior_mean(chain);
            RepResult rr;
            rr.d_mle = n * (bayes - mle.theta_hat).squaredNorm();
            rr.d_truth = n * (bayes - c.beta_star).squaredNorm();
            rr.norm_mle = std::sqrt(rr.d_mle);
            rr.resamples = resamples;
            results[static_cast<size_t>(rep)] = rr;
            return;
          } catch (const Separation&) {
            if (++resamples > c.max_separation_retries)
              throw Separation("figure4: too many separable replications");
          }
        }
      });

      Cell cell;
      double sum_norm = 0.0;
      for (const auto& rr : results) {
        cell.sum_mle += rr.d_mle;
        cell.sumsq_mle += rr.d_mle * rr.d_mle;
        cell.sum_truth += rr.d_truth;
        cell.resamples += rr.resamples;
        sum_norm += rr.norm_mle;
      }
      const double r = static_cast<double>(c.replications);
      Figure4Row row;
      row.n = n;
      row.schedule_exponent = expo;
      row.mean_sq_scaled_diff_mle = cell.sum_mle / r;
      row.mean_sq_scaled_diff_truth = cell.sum_truth / r;
      row.mean_scaled_norm_mle = sum_norm / r;
      const double var = std::max(0.0, cell.sumsq_mle / r - row.mean_sq_scaled_diff_mle * row.mean_sq_scaled_diff_mle);
      row.mc_se = std::sqrt(var / r);
      row.separation_resamples = cell.resamples;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<Figure4Row> closed_form_threshold(const ClosedFormConfig& cfg, int threads) {
  ClosedFormConfig c = cfg;
  if (c.beta_star.size() == 0) {
    c.beta_star.resize(3);
    c.beta_star << 1.0, -0.5, 0.1;
  }
  const auto p = c.beta_star.size();
  const Rng root = Rng(c.seed).sub("closed-form-threshold");

  std::vector<Figure4Row> rows;
  for (long n : c.n_grid) {
    const size_t ne = c.schedule_exponents.size();
    struct RepVals {
      std::vector<double> d_mle, d_truth, norm_mle;
    };
    std::vector<RepVals> per_rep(static_cast<size_t>(c.replications));

    parallel_for(c.replications, threads, [&](int rep) {
      Rng rng = root.sub(static_cast<std::uint64_t>(n)).sub(static_cast<std::uint64_t>(rep));
      // Only the sufficient statistics are needed for both estimators.
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
      Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
      Eigen::VectorXd x(p);
      for (long i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) x[j] = rng.gauss();
        const double y = x.dot(c.beta_star) + rng.gauss();
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
        xty.noalias() += y * x;
      }
      gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

      const Eigen::VectorXd ols = gram.llt().solve(xty);
      RepVals vals;
      for (double expo : c.schedule_exponents) {
        const double alpha_n = c.schedule_coeff * std::pow(static_cast<double>(n), expo);
        Eigen::MatrixXd a = gram;
        a.diagonal().array() += 1.0 / alpha_n;  // sigma2 = 1 in the simulation design
        const Eigen::VectorXd ridge = a.llt().solve(xty);
        const double d_mle = n * (ridge - ols).squaredNorm();
        vals.d_mle.push_back(d_mle);
        vals.d_truth.push_back(n * (ridge - c.beta_star).squaredNorm());
        vals.norm_mle.push_back(std::sqrt(d_mle));
      }
      per_rep[static_cast<size_t>(rep)] = std::move(vals);
    });

    for (size_t ei = 0; ei < ne; ++ei) {
      Figure4Row row;
      row.n = n;
      row.schedule_exponent = c.schedule_exponents[ei];
      double s = 0.0, s2 = 0.0, st = 0.0, sn = 0.0;
      for (const auto& vals : per_rep) {
        s += vals.d_mle[ei];
        s2 += vals.d_mle[ei] * vals.d_mle[ei];
        st += vals.d_truth[ei];
        sn += vals.norm_mle[ei];
      }
      const double r = static_cast<double>(c.replications);
      row.mean_sq_scaled_diff_mle = s / r;
      row.mean_sq_scaled_diff_truth = st / r;
      row.mean_scaled_norm_mle = sn / r;
      row.mc_se = std::sqrt(std::max(0.0, s2 / r - (s / r) * (s / r)) / r);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace tempered
