#include "tempered/linmodel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "tempered/stats.hpp"

namespace tempered {

void Dataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw Error("Dataset: empty design");
  if (y.size() != X.rows()) throw Error("Dataset: y length != rows of X");
  if (!X.allFinite() || !y.allFinite()) throw Error("Dataset: non-finite entries");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw Error("Dataset: sigma2 must be > 0");
}

namespace detail {

bool full_rank(const Eigen::MatrixXd& xtx) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xtx, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 && hi / lo < 1e12;
}

}  // namespace detail

GaussianPosterior ridge_posterior(const Dataset& d, double alpha, Prior prior) {
  d.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw NonPositiveAlpha("ridge_posterior: alpha must be finite and > 0");
  const auto n = d.n();
  const auto p = d.p();
  const Eigen::MatrixXd xtx = d.X.transpose() * d.X;
  const Eigen::VectorXd xty = d.X.transpose() * d.y;

  GaussianPosterior post;
  post.alpha = alpha;
  post.n = n;
  if (prior == Prior::UnitGaussian) {
    const double c = d.sigma2 / alpha;
    Eigen::MatrixXd a = xtx;
    a.diagonal().array() += c;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    post.mean = llt.solve(xty);
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    post.cov = 0.5 * c * (inv + inv.transpose());
  } else {
    if (!detail::full_rank(xtx)) throw SingularDesign("ridge_posterior: flat prior needs full-rank X");
    Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    post.mean = llt.solve(xty);
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    // (sigma2/(alpha n)) (X'X/n)^-1 = (sigma2/alpha) (X'X)^-1
    post.cov = 0.5 * (d.sigma2 / alpha) * (inv + inv.transpose());
  }
  return post;
}

GaussianPosterior vi_posterior(const Dataset& d, double alpha) {
  GaussianPosterior post = ridge_posterior(d, alpha, Prior::UnitGaussian);
  const double c = d.sigma2 / alpha;
  Eigen::VectorXd prec_diag = (d.X.colwise().squaredNorm().transpose());
  prec_diag.array() += c;
  post.cov = (c * prec_diag.cwiseInverse()).asDiagonal();
  return post;
}

double predictive_logdensity(const GaussianPosterior& post, const Eigen::VectorXd& x, double y,
                             double sigma2) {
  const double mean = x.dot(post.mean);
  const double var = sigma2 + x.dot(post.cov * x);
  return stats::norm_logpdf(y, mean, var);
}

double estimate_sigma2(const Dataset& d) {
  d.validate();
  const auto n = d.n();
  const auto p = d.p();
  if (n <= p) throw DegenerateDOF("estimate_sigma2: requires n > p");
  const Eigen::MatrixXd xtx = d.X.transpose() * d.X;
  if (!detail::full_rank(xtx)) throw SingularDesign("estimate_sigma2: rank-deficient X");
  Eigen::LLT<Eigen::MatrixXd> llt(xtx);
  const Eigen::VectorXd beta = llt.solve(d.X.transpose() * d.y);
  const double rss = (d.y - d.X * beta).squaredNorm();
  return rss / static_cast<double>(n - p);
}

Dataset apply_spec(const Dataset& d, const ModelSpec& spec) {
  d.validate();
  const auto n = d.n();
  const auto raw_p = d.p();
  for (int j : spec.column_subset) {
    if (j < 0 || j >= raw_p) throw IndexOutOfRange("apply_spec: column index out of range");
  }
  for (const auto& t : spec.transforms) {
    if (t.source < 0 || t.source >= raw_p) throw IndexOutOfRange("apply_spec: transform source out of range");
  }
  std::vector<int> seen(static_cast<size_t>(raw_p), 0);
  for (int j : spec.column_subset) {
    if (seen[static_cast<size_t>(j)]++) throw IndexOutOfRange("apply_spec: duplicate column index");
  }

  const Eigen::Index cols = static_cast<Eigen::Index>(spec.column_subset.size() + spec.transforms.size()) +
                            (spec.add_intercept ? 1 : 0);
  Dataset out;
  out.X.resize(n, cols);
  out.y = d.y;
  out.sigma2 = d.sigma2;
  Eigen::Index c = 0;
  for (int j : spec.column_subset) out.X.col(c++) = d.X.col(j);
  for (const auto& t : spec.transforms) {
    const auto& src = d.X.col(t.source);
    switch (t.kind) {
      case ColumnTransform::Kind::Square:
        out.X.col(c++) = src.array().square();
        break;
      case ColumnTransform::Kind::Log:
        if ((src.array() <= 0.0).any()) throw ParseError("apply_spec: log transform of non-positive column");
        out.X.col(c++) = src.array().log();
        break;
    }
  }
  if (spec.add_intercept) out.X.col(c++) = Eigen::VectorXd::Ones(n);
  return out;
}

std::string GaussianPosterior::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"mean\":[";
  for (Eigen::Index i = 0; i < mean.size(); ++i) os << (i ? "," : "") << mean[i];
  os << "],\"cov\":[";
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    os << (i ? ",[" : "[");
    for (Eigen::Index j = 0; j < cov.cols(); ++j) os << (j ? "," : "") << cov(i, j);
    os << "]";
  }
  os << "],\"alpha\":" << alpha << ",\"n\":" << n << "}";
  return os.str();
}

}  // namespace tempered
