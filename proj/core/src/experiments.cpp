#include "tempered/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tempered/parallel.hpp"
#include "tempered/rng.hpp"
#include "tempered/stats.hpp"

namespace tempered {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Constant: return "constant";
    case Regime::QuicklyVanishing: return "quickly_vanishing";
    case Regime::Mixed: return "mixed";
    case Regime::Unclassified: return "unclassified";
  }
  return "?";
}

namespace {

Eigen::VectorXd default_beta_star(const SimConfig& sim) {
  if (sim.beta_star.size() > 0) {
    if (sim.beta_star.size() != sim.p) throw ConfigError("SimConfig: beta_star length != p");
    return sim.beta_star;
  }
  Eigen::VectorXd b(3);
  b << (sim.misspecified ? 1.0 : 0.0), -0.5, 0.1;
  return b;
}

}  // namespace

Dataset generate(const SimConfig& sim, int rep) {
  if (rep < 0 || rep >= sim.reps) throw ConfigError("generate: rep outside [0, reps)");
  if (sim.n < 1 || sim.p < 1) throw ConfigError("generate: bad dimensions");
  const Eigen::VectorXd beta = default_beta_star(sim);

  Rng rng = Rng(sim.master_seed).sub(static_cast<std::uint64_t>(rep)).sub("generate").sub(
      static_cast<std::uint64_t>(sim.n));
  Eigen::MatrixXd x(sim.n, sim.p);
  Eigen::VectorXd y(sim.n);
  for (long i = 0; i < sim.n; ++i) {
    for (int j = 0; j < sim.p; ++j) x(i, j) = rng.gauss();
    y[i] = x.row(i).dot(beta) + rng.gauss();
  }

  Dataset d;
  d.y = y;
  d.sigma2 = 1.0;
  if (sim.misspecified) {
    d.X = x.rightCols(sim.p - 1);
  } else {
    d.X = x;
  }
  return d;
}

std::vector<AlphaSample> run_replications(const SimConfig& sim, const std::vector<Method>& methods,
                                          const std::map<Method, Grid>& grids,
                                          double split_fraction, int threads) {
  if (sim.reps < 1) throw ConfigError("run_replications: reps must be >= 1");
  std::map<Method, Grid> use = grids;
  for (Method m : methods) {
    if (!use.count(m)) use.emplace(m, Grid::simulation_default(m));
  }

  std::vector<AlphaSample> samples(methods.size() * static_cast<size_t>(sim.reps));
  parallel_for(sim.reps, threads, [&](int rep) {
    const Dataset d = generate(sim, rep);
    const Rng rep_rng = Rng(sim.master_seed).sub(static_cast<std::uint64_t>(rep)).sub("tune").sub(
        static_cast<std::uint64_t>(sim.n));
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      const Method method = methods[mi];
      TuneOptions opts;
      opts.split_fraction = split_fraction;
      const TuningResult r =
          tune(d, method, use.at(method), rep_rng.sub(static_cast<std::uint64_t>(mi)).stream_key(), opts);
      AlphaSample s;
      s.n = sim.n;
      s.method = method;
      s.misspecified = sim.misspecified;
      s.replication = rep;
      s.alpha_hat = r.alpha_hat;
      s.is_corner = r.is_corner;
      samples[static_cast<size_t>(rep) * methods.size() + mi] = s;
    }
  });
  return samples;
}

RegimeEstimate estimate_rate(const std::vector<AlphaSample>& samples, const RateOptions& opts) {
  std::vector<std::pair<double, double>> pts;  // (log n, log alpha)
  std::map<long, std::pair<double, long>> mean_acc;
  for (const auto& s : samples) {
    if (s.is_corner || !std::isfinite(s.alpha_hat) || !(s.alpha_hat > 0.0)) continue;
    if (opts.aggregate_means) {
      auto& [sum, cnt] = mean_acc[s.n];
      sum += s.alpha_hat;
      ++cnt;
    } else {
      pts.emplace_back(std::log(static_cast<double>(s.n)), std::log(s.alpha_hat));
    }
  }
  if (opts.aggregate_means) {
    for (const auto& [n, acc] : mean_acc)
      pts.emplace_back(std::log(static_cast<double>(n)),
                       std::log(acc.first / static_cast<double>(acc.second)));
  }

  std::vector<double> distinct;
  for (const auto& [lx, ly] : pts) {
    if (std::find(distinct.begin(), distinct.end(), lx) == distinct.end()) distinct.push_back(lx);
  }
  if (distinct.size() < 2) throw InsufficientData("estimate_rate: need non-corner samples at >= 2 distinct n");

  const double m = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [lx, ly] : pts) {
    sx += lx;
    sy += ly;
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : pts) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (const auto& [lx, ly] : pts) {
    const double r = ly - intercept - slope * lx;
    rss += r * r;
  }
  const double dof = m - 2.0;
  const double se = dof > 0.0 ? std::sqrt(rss / dof / sxx) : 0.0;

  RegimeEstimate est;
  est.gamma_hat = slope;
  est.log_c = intercept;
  est.ci_low = slope - 1.96 * se;
  est.ci_high = slope + 1.96 * se;
  est.n_points_used = static_cast<long>(pts.size());

  const auto corners = corner_proportions_by_n(samples);
  if (!corners.empty()) est.corner_proportion = corners.rbegin()->second;
  return est;
}

std::map<long, double> corner_proportions_by_n(const std::vector<AlphaSample>& samples) {
  std::map<long, std::pair<long, long>> acc;  // n -> (corners, total)
  for (const auto& s : samples) {
    auto& [c, t] = acc[s.n];
    c += s.is_corner ? 1 : 0;
    ++t;
  }
  std::map<long, double> out;
  for (const auto& [n, ct] : acc)
    out[n] = static_cast<double>(ct.first) / static_cast<double>(ct.second);
  return out;
}

Regime classify_regime(const std::vector<AlphaSample>& samples) {
  const auto corners = corner_proportions_by_n(samples);
  if (corners.size() < 2) throw InsufficientData("classify_regime: need samples at >= 2 values of n");
  const double corner_at_largest = corners.rbegin()->second;

  RegimeEstimate est;
  try {
    est = estimate_rate(samples);
  } catch (const InsufficientData&) {
    return Regime::Unclassified;
  }

  // "constant" accepts any exponent compatible with a negligible drift: with
  // thousands of pooled points the slope CI is a few thousandths wide, and a
  // visually flat cell can still drift by a percent or two per decade of n.
  if (est.ci_low <= 0.1 && est.ci_high >= -0.1 && corner_at_largest < 0.05)
    return Regime::Constant;
  if (est.ci_high <= -0.85 && corner_at_largest < 0.05) return Regime::QuicklyVanishing;
  if (corner_at_largest >= 0.2 && corner_at_largest <= 0.8 && est.gamma_hat < -0.3)
    return Regime::Mixed;
  return Regime::Unclassified;
}

SubsampleReport subsample_study(const Dataset& full, const ModelSpec& spec,
                                const SubsampleConfig& cfg) {
  full.validate();
  if (cfg.sizes.empty() || cfg.reps < 1 || cfg.methods.empty())
    throw ConfigError("subsample_study: sizes, reps and methods must be non-empty");
  for (long s : cfg.sizes) {
    if (s > full.n()) throw SizeTooLarge("subsample_study: size exceeds dataset");
    if (s < 2) throw ConfigError("subsample_study: size must be >= 2");
  }
  std::map<Method, Grid> grids = cfg.grids;
  for (Method m : cfg.methods) {
    if (!grids.count(m)) grids.emplace(m, Grid::data_default(m));
  }

  const Dataset working = apply_spec(full, spec);

  SubsampleReport report;
  struct Task { long size; int rep; };
  std::vector<Task> tasks;
  for (long size : cfg.sizes)
    for (int rep = 0; rep < cfg.reps; ++rep) tasks.push_back({size, rep});

  std::vector<std::vector<AlphaSample>> per_task(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), cfg.threads, [&](int ti) {
    const auto [size, rep] = tasks[static_cast<size_t>(ti)];
    Rng rng = Rng(cfg.seed).sub("subsample").sub(static_cast<std::uint64_t>(size)).sub(
        static_cast<std::uint64_t>(rep));

    // Partial Fisher-Yates: first `size` entries form the subsample.
    std::vector<Eigen::Index> idx(static_cast<size_t>(working.n()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (long i = 0; i < size; ++i) {
      const auto j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(working.n() - i)));
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }

    Dataset sub;
    sub.X.resize(size, working.p());
    sub.y.resize(size);
    for (long i = 0; i < size; ++i) {
      sub.X.row(i) = working.X.row(idx[static_cast<size_t>(i)]);
      sub.y[i] = working.y[idx[static_cast<size_t>(i)]];
    }
    sub.sigma2 = estimate_sigma2(sub);

    std::vector<AlphaSample> local;
    for (size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const Method method = cfg.methods[mi];
      TuneOptions opts;
      opts.split_fraction = cfg.split_fraction;
      const TuningResult r =
          tune(sub, method, grids.at(method), rng.sub(static_cast<std::uint64_t>(mi)).stream_key(), opts);
      AlphaSample s;
      s.n = size;
      s.method = method;
      s.misspecified = false;
      s.replication = rep;
      s.alpha_hat = r.alpha_hat;
      s.is_corner = r.is_corner;
      local.push_back(s);
    }
    per_task[static_cast<size_t>(ti)] = std::move(local);
  });

  for (auto& batch : per_task)
    report.samples.insert(report.samples.end(), batch.begin(), batch.end());

  for (Method m : cfg.methods) {
    std::vector<AlphaSample> mine;
    for (const auto& s : report.samples)
      if (s.method == m) mine.push_back(s);
    try {
      report.rates.emplace(m, estimate_rate(mine));
    } catch (const InsufficientData&) {
      // all-corner methods have no rate; leave them out of the map
    }
  }
  return report;
}

}  // namespace tempered
