#include "tempered/tuning.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tempered/rng.hpp"
#include "tempered/stats.hpp"

namespace tempered {

const char* method_name(Method m) {
  switch (m) {
    case Method::BCV: return "bcv";
    case Method::BCV_VI: return "bcv-vi";
    case Method::LOOCV: return "loocv";
    case Method::TrainTest: return "train-test";
    case Method::SafeBayes: return "safebayes";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "bcv") return Method::BCV;
  if (name == "bcv-vi" || name == "bcv_vi") return Method::BCV_VI;
  if (name == "loocv") return Method::LOOCV;
  if (name == "train-test" || name == "train_test") return Method::TrainTest;
  if (name == "safebayes") return Method::SafeBayes;
  throw ConfigError("unknown method: " + name);
}

std::vector<double> Grid::values() const {
  if (!(lower < upper)) throw ConfigError("Grid: lower must be < upper");
  if (density < 2) throw ConfigError("Grid: density must be >= 2");
  if (spacing == Spacing::Logarithmic && !(lower > 0.0))
    throw ConfigError("Grid: logarithmic spacing needs lower > 0");
  std::vector<double> v(static_cast<size_t>(density));
  const double m = static_cast<double>(density - 1);
  if (spacing == Spacing::Linear) {
    for (int i = 0; i < density; ++i) v[static_cast<size_t>(i)] = lower + (upper - lower) * i / m;
  } else {
    const double ll = std::log(lower);
    const double lu = std::log(upper);
    for (int i = 0; i < density; ++i) v[static_cast<size_t>(i)] = std::exp(ll + (lu - ll) * i / m);
  }
  v.front() = lower;
  v.back() = upper;
  return v;
}

double Grid::map_to_alpha(double value, Eigen::Index n) const {
  switch (mapping) {
    case Mapping::InvNMinus1Lambda: return 1.0 / (static_cast<double>(n - 1) * value);
    case Mapping::InvLambda: return 1.0 / value;
    case Mapping::InvNLambda: return 1.0 / (static_cast<double>(n) * value);
    case Mapping::Identity: return value;
  }
  return value;
}

Grid Grid::simulation_default(Method m) {
  Grid g;
  switch (m) {
    case Method::BCV:
    case Method::BCV_VI:
      g = {Parameter::Lambda, Spacing::Logarithmic, 1e-12, 10.0, 200, Mapping::InvNMinus1Lambda};
      break;
    case Method::LOOCV:
      g = {Parameter::Lambda, Spacing::Linear, 1e-12, 30.0, 200, Mapping::InvLambda};
      break;
    case Method::TrainTest:
      g = {Parameter::Lambda, Spacing::Linear, 1e-12, 5.0, 200, Mapping::InvNLambda};
      break;
    case Method::SafeBayes:
      g = {Parameter::Alpha, Spacing::Linear, 0.0, 1.0, 30, Mapping::Identity};
      break;
  }
  return g;
}

Grid Grid::data_default(Method m) {
  Grid g = simulation_default(m);
  if (m == Method::LOOCV) g.upper = 0.5;
  if (m == Method::TrainTest) g.upper = 0.05;
  return g;
}

TrainTestSplit make_split(Eigen::Index n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("make_split: train_fraction must be in (0,1)");
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng = Rng(seed).sub("train-test-split");
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  const auto n_train = static_cast<Eigen::Index>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) throw EmptyFold("make_split: degenerate split");
  TrainTestSplit s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.test.assign(idx.begin() + n_train, idx.end());
  return s;
}

namespace {

// Shared leave-one-out sweep. A = X'X + c I with c = sigma2/alpha; fold
// quantities come from one rank-1 downdate of A via Sherman-Morrison.
struct LooContext {
  Eigen::MatrixXd ainv;
  Eigen::VectorXd w;     // A^-1 X'y
  Eigen::VectorXd adiag; // diagonal of A, for the mean-field variance
  double c = 0.0;
};

LooContext loo_context(const Dataset& d, double c) {
  Eigen::MatrixXd a = d.X.transpose() * d.X;
  a.diagonal().array() += c;
  LooContext ctx;
  ctx.c = c;
  ctx.adiag = a.diagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw Error("lppd_loo: fold precision not positive definite");
  ctx.ainv = llt.solve(Eigen::MatrixXd::Identity(d.p(), d.p()));
  ctx.w = llt.solve(d.X.transpose() * d.y);
  return ctx;
}

}  // namespace

double lppd_loo(const Dataset& d, double alpha) {
  d.validate();
  if (d.n() < 2) throw DegenerateFold("lppd_loo: needs n >= 2");
  if (!(alpha > 0.0)) throw NonPositiveAlpha("lppd_loo: alpha must be > 0");
  const auto n = d.n();
  const auto p = d.p();
  const LooContext ctx = loo_context(d, d.sigma2 / alpha);
  Eigen::VectorXd u(p);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = d.X.row(i).transpose();
    u.noalias() = ctx.ainv * x;
    const double h = x.dot(u);
    const double one_minus = 1.0 - h;
    if (!(one_minus > 0.0)) throw DegenerateFold("lppd_loo: fold posterior degenerate");
    const double mean = (x.dot(ctx.w) - d.y[i] * h) / one_minus;
    const double var = d.sigma2 + ctx.c * h / one_minus;
    acc += stats::norm_logpdf(d.y[i], mean, var);
  }
  return acc / static_cast<double>(n);
}

double lppd_loo_vi(const Dataset& d, double alpha) {
  d.validate();
  if (d.n() < 2) throw DegenerateFold("lppd_loo_vi: needs n >= 2");
  if (!(alpha > 0.0)) throw NonPositiveAlpha("lppd_loo_vi: alpha must be > 0");
  const auto n = d.n();
  const auto p = d.p();
  const LooContext ctx = loo_context(d, d.sigma2 / alpha);
  Eigen::VectorXd u(p);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = d.X.row(i).transpose();
    u.noalias() = ctx.ainv * x;
    const double h = x.dot(u);
    const double one_minus = 1.0 - h;
    if (!(one_minus > 0.0)) throw DegenerateFold("lppd_loo_vi: fold posterior degenerate");
    const double mean = (x.dot(ctx.w) - d.y[i] * h) / one_minus;
    double quad = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double xj = d.X(i, j);
      const double dj = ctx.adiag[j] - xj * xj;  // diag of the fold precision
      quad += xj * xj / dj;
    }
    const double var = d.sigma2 + ctx.c * quad;
    acc += stats::norm_logpdf(d.y[i], mean, var);
  }
  return acc / static_cast<double>(n);
}

double press(const Dataset& d, double alpha) {
  d.validate();
  if (!(alpha > 0.0)) throw NonPositiveAlpha("press: alpha must be > 0");
  const auto n = d.n();
  const auto p = d.p();
  Eigen::MatrixXd a = d.X.transpose() * d.X;
  a.diagonal().array() += 1.0 / alpha;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw Error("press: X'X + I/alpha not positive definite");
  const Eigen::MatrixXd ainv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd w = llt.solve(d.X.transpose() * d.y);
  Eigen::VectorXd u(p);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = d.X.row(i).transpose();
    u.noalias() = ainv * x;
    const double h = x.dot(u);
    if (h >= 1.0 - 1e-12) throw DegenerateLeverage("press: leverage H_ii >= 1");
    const double r = (d.y[i] - x.dot(w)) / (1.0 - h);
    acc += r * r;
  }
  return acc / static_cast<double>(n);
}

double train_test_loss(const Dataset& d, const TrainTestSplit& split, double lambda) {
  d.validate();
  if (split.train.empty() || split.test.empty()) throw EmptyFold("train_test_loss: empty fold");
  if (!(lambda >= 0.0)) throw ConfigError("train_test_loss: lambda must be >= 0");
  const auto p = d.p();
  const auto n_train = static_cast<Eigen::Index>(split.train.size());
  std::vector<char> used(static_cast<size_t>(d.n()), 0);
  for (auto i : split.train) {
    if (i < 0 || i >= d.n() || used[static_cast<size_t>(i)]++) throw EmptyFold("train_test_loss: bad train index");
  }
  for (auto i : split.test) {
    if (i < 0 || i >= d.n() || used[static_cast<size_t>(i)]++) throw EmptyFold("train_test_loss: folds overlap");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (auto i : split.train) {
    const auto x = d.X.row(i).transpose();
    a.selfadjointView<Eigen::Lower>().rankUpdate(x);
    b.noalias() += d.y[i] * x;
  }
  a = a.selfadjointView<Eigen::Lower>();
  a.diagonal().array() += static_cast<double>(n_train) * lambda;
  const Eigen::VectorXd beta = a.ldlt().solve(b);

  double acc = 0.0;
  for (auto i : split.test) {
    const double r = d.y[i] - d.X.row(i).dot(beta);
    acc += r * r;
  }
  return acc / static_cast<double>(split.test.size());
}

double safe_bayes_loss(const Dataset& d, double alpha) {
  d.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw AlphaOutOfRange("safe_bayes_loss: alpha must be in [0,1]");
  const auto n = d.n();
  const auto p = d.p();
  const double scale = alpha / d.sigma2;

  // Prefix posterior: precision P = I + scale * sum x x', pseudo-b = scale * sum x y.
  Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  Eigen::VectorXd mu(p);
  Eigen::VectorXd v(p);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = d.X.row(i).transpose();
    llt.compute(prec);
    mu.noalias() = llt.solve(b);
    v.noalias() = llt.solve(x);
    const double resid = d.y[i] - x.dot(mu);
    acc += resid * resid + x.dot(v);
    if (scale > 0.0) {
      prec.selfadjointView<Eigen::Lower>().rankUpdate(x, scale);
      prec = prec.selfadjointView<Eigen::Lower>();
      b.noalias() += scale * d.y[i] * x;
    }
  }
  return acc;
}

TuningResult tune(const Dataset& d, Method method, const Grid& grid, std::uint64_t seed,
                  const TuneOptions& opts) {
  d.validate();
  const bool wants_alpha_grid = method == Method::SafeBayes;
  if (wants_alpha_grid && grid.parameter != Grid::Parameter::Alpha)
    throw ConfigError("tune: SafeBayes expects an alpha grid");
  if (!wants_alpha_grid && grid.parameter != Grid::Parameter::Lambda)
    throw ConfigError("tune: method expects a lambda grid");

  TuningResult result;
  result.method = method;
  result.grid_values = grid.values();
  result.losses.resize(result.grid_values.size());

  TrainTestSplit split;
  if (method == Method::TrainTest) split = make_split(d.n(), opts.split_fraction, seed);

  for (size_t j = 0; j < result.grid_values.size(); ++j) {
    const double g = result.grid_values[j];
    switch (method) {
      case Method::BCV: result.losses[j] = lppd_loo(d, grid.map_to_alpha(g, d.n())); break;
      case Method::BCV_VI: result.losses[j] = lppd_loo_vi(d, grid.map_to_alpha(g, d.n())); break;
      case Method::LOOCV: result.losses[j] = press(d, grid.map_to_alpha(g, d.n())); break;
      case Method::TrainTest: result.losses[j] = train_test_loss(d, split, g); break;
      case Method::SafeBayes: result.losses[j] = safe_bayes_loss(d, g); break;
    }
  }

  const bool maximize = method == Method::BCV || method == Method::BCV_VI;
  size_t best = 0;
  for (size_t j = 1; j < result.losses.size(); ++j) {
    const bool better = maximize ? result.losses[j] > result.losses[best]
                                 : result.losses[j] < result.losses[best];
    if (better) best = j;
  }
  if (!std::isfinite(result.losses[best])) throw Error("tune: selected loss is not finite");

  const double selected = result.grid_values[best];
  if (grid.parameter == Grid::Parameter::Lambda) result.lambda_hat = selected;
  result.alpha_hat = grid.map_to_alpha(selected, d.n());
  if (result.alpha_hat > kCornerThreshold) {
    result.alpha_hat = std::numeric_limits<double>::infinity();
    result.is_corner = true;
  }
  return result;
}

std::string TuningResult::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"method\":\"" << method_name(method) << "\",\"curve\":[";
  for (size_t j = 0; j < grid_values.size(); ++j) {
    os << (j ? "," : "") << "[" << grid_values[j] << "," << losses[j] << "]";
  }
  os << "],\"lambda_hat\":";
  if (lambda_hat) {
    os << *lambda_hat;
  } else {
    os << "null";
  }
  os << ",\"alpha_hat\":";
  if (std::isinf(alpha_hat)) {
    os << "\"inf\"";
  } else {
    os << alpha_hat;
  }
  os << ",\"is_corner\":" << (is_corner ? "true" : "false");
  if (method == Method::SafeBayes) {
    // we implement the known-variance prequential squared-error variant
    os << ",\"variant\":\"r-square-prequential\"";
  }
  os << "}";
  return os.str();
}

}  // namespace tempered
