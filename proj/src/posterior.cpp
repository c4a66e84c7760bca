#include "postfeas/posterior.hpp"

#include <cmath>
#include <string>

#include "postfeas/errors.hpp"
#include "postfeas/stats.hpp"

namespace postfeas {

SpdFactor::SpdFactor(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("SpdFactor expects a square matrix");
  llt_.compute(m);
  if (llt_.info() == Eigen::Success) return;
  const double base = 1e-10 * std::max(m.trace(), 1e-300);
  double jitter = base;
  for (int attempt = 0; attempt < 3; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += jitter;
    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      return;
    }
  }
  throw SingularPrecision("matrix is not positive definite even after jitter");
}

Eigen::MatrixXd SpdFactor::inverse() const {
  const auto n = llt_.matrixLLT().rows();
  return llt_.solve(Eigen::MatrixXd::Identity(n, n));
}

double SpdFactor::inv_quadratic(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd half = llt_.matrixL().solve(x);
  return half.squaredNorm();
}

void NigPrior::validate() const {
  if (precision.rows() != mean.size() || precision.cols() != mean.size()) {
    throw DimensionMismatch("prior precision must be d x d with d = dim(mean)");
  }
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("prior shape and rate must be positive");
  if (!precision.isApprox(precision.transpose(), 1e-12)) {
    throw DomainError("prior precision must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw SingularPrecision("prior precision is not positive definite");
}

NigPrior NigPrior::weakly_informative(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Eigen::VectorXd::Zero(d), 1e-2 * Eigen::MatrixXd::Identity(d, d), 2.0, 2.0};
}

double PredictiveT::mean() const {
  if (!(dof > 1.0)) throw DomainError("Student-t mean requires dof > 1");
  return loc;
}

double PredictiveT::sd() const {
  if (!(dof > 2.0)) throw DomainError("Student-t variance requires dof > 2");
  return scale * std::sqrt(dof / (dof - 2.0));
}

Eigen::MatrixXd BetaPosteriorMatrix::mean() const { return a.array() / (a.array() + b.array()); }

NigPosterior fit_nig(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const NigPrior& prior) {
  prior.validate();
  if (x.rows() != y.size()) throw DimensionMismatch("design rows must match response length");
  if (x.rows() > 0 && x.cols() != prior.mean.size()) {
    throw DimensionMismatch("design columns must match prior dimension");
  }
  NigPosterior post;
  post.n_obs = static_cast<std::size_t>(x.rows());
  if (x.rows() == 0) {
    post.mean = prior.mean;
    post.precision = prior.precision;
    post.shape = prior.shape;
    post.rate = prior.rate;
    return post;
  }
  post.precision = prior.precision + x.transpose() * x;
  const SpdFactor factor(post.precision);
  post.mean = factor.solve(prior.precision * prior.mean + x.transpose() * y);
  post.shape = prior.shape + 0.5 * static_cast<double>(x.rows());
  // Sum-of-squares form of b0 + (y'y + m0'L0 m0 - mn'Ln mn)/2; positive by construction.
  const Eigen::VectorXd resid = y - x * post.mean;
  const Eigen::VectorXd shift = post.mean - prior.mean;
  post.rate = prior.rate + 0.5 * (resid.squaredNorm() + shift.dot(prior.precision * shift));
  return post;
}

NigPosterior update_nig(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  NigPosterior next = fit_nig(x, y, post.as_prior());
  next.n_obs = post.n_obs + static_cast<std::size_t>(x.rows());
  return next;
}

PredictiveT predictive(const NigPosterior& post, const Eigen::VectorXd& x_ctx) {
  if (x_ctx.size() != post.mean.size()) throw DimensionMismatch("context dimension mismatch");
  const SpdFactor factor(post.precision);
  PredictiveT out;
  out.dof = 2.0 * post.shape;
  out.loc = x_ctx.dot(post.mean);
  out.scale = std::sqrt((post.rate / post.shape) * (1.0 + factor.inv_quadratic(x_ctx)));
  return out;
}

double predictive_quantile(const PredictiveT& pred, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("predictive_quantile requires p in (0, 1)");
  return pred.loc + pred.scale * student_t_quantile(p, pred.dof);
}

double sample_predictive(const PredictiveT& pred, Rng& rng) {
  return pred.loc + pred.scale * sample_student_t(rng, pred.dof);
}

OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw DimensionMismatch("design rows must match response length");
  if (x.rows() <= x.cols()) throw RankDeficient("OLS requires more observations than columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) throw RankDeficient("design matrix is rank deficient");
  OlsFit fit;
  const Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::LLT<Eigen::MatrixXd> llt(xtx);
  if (llt.info() != Eigen::Success) throw RankDeficient("X^T X is not positive definite");
  fit.coef = qr.solve(y);
  fit.xtx_inv = llt.solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  fit.dof_resid = static_cast<std::size_t>(x.rows() - x.cols());
  fit.s2 = (y - x * fit.coef).squaredNorm() / static_cast<double>(fit.dof_resid);
  return fit;
}

double ols_predictive_quantile(const OlsFit& fit, const Eigen::VectorXd& x_ctx, double p) {
  if (x_ctx.size() != fit.coef.size()) throw DimensionMismatch("context dimension mismatch");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("ols_predictive_quantile requires p in (0, 1)");
  const double point = x_ctx.dot(fit.coef);
  const double spread = std::sqrt(fit.s2 * (1.0 + x_ctx.dot(fit.xtx_inv * x_ctx)));
  if (spread == 0.0) return point;
  return point + student_t_quantile(p, static_cast<double>(fit.dof_resid)) * spread;
}

BetaPosteriorMatrix fit_beta_binomial(const CountMatrix& detections,
                                      const std::vector<std::int64_t>& cluster_sizes, double a0,
                                      double b0) {
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw DomainError("Beta prior parameters must be positive");
  if (static_cast<std::size_t>(detections.rows()) != cluster_sizes.size()) {
    throw DimensionMismatch("one cluster size per detection row is required");
  }
  BetaPosteriorMatrix post;
  post.a.resize(detections.rows(), detections.cols());
  post.b.resize(detections.rows(), detections.cols());
  for (Eigen::Index j = 0; j < detections.rows(); ++j) {
    const std::int64_t n = cluster_sizes[static_cast<std::size_t>(j)];
    if (n < 0) throw CountOutOfRange("cluster size must be nonnegative");
    for (Eigen::Index g = 0; g < detections.cols(); ++g) {
      const std::int64_t s = detections(j, g);
      if (s < 0 || s > n) {
        throw CountOutOfRange("detection count " + std::to_string(s) + " outside [0, " +
                              std::to_string(n) + "]");
      }
      post.a(j, g) = a0 + static_cast<double>(s);
      post.b(j, g) = b0 + static_cast<double>(n - s);
    }
  }
  post.cluster_sizes = cluster_sizes;
  post.detections = detections;
  return post;
}

Eigen::MatrixXd sample_q_matrix(const BetaPosteriorMatrix& post, Rng& rng) {
  Eigen::MatrixXd q(post.a.rows(), post.a.cols());
  for (Eigen::Index j = 0; j < q.rows(); ++j) {
    for (Eigen::Index g = 0; g < q.cols(); ++g) q(j, g) = sample_beta(rng, post.a(j, g), post.b(j, g));
  }
  return q;
}

}  // namespace postfeas
