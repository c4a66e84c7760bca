#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "postfeas/rng.hpp"

namespace postfeas {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Cholesky factor with jitter escalation: on failure adds 1e-10 * trace * I,
/// growing x10 up to three times, then throws SingularPrecision.
class SpdFactor {
 public:
  explicit SpdFactor(const Eigen::MatrixXd& m);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
  Eigen::MatrixXd inverse() const;
  /// x^T M^{-1} x
  double inv_quadratic(const Eigen::VectorXd& x) const;
  double jitter() const { return jitter_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

/// Normal-Inverse-Gamma prior over (beta, sigma^2) of y = X beta + e, e ~ N(0, sigma^2).
struct NigPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  double shape = 2.0;
  double rate = 2.0;

  void validate() const;

  /// m0 = 0, L0 = 1e-2 I, a0 = b0 = 2.
  static NigPrior weakly_informative(std::size_t dim);
};

struct NigPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  double shape = 0.0;
  double rate = 0.0;
  std::size_t n_obs = 0;

  NigPrior as_prior() const { return {mean, precision, shape, rate}; }
};

/// Location-scale Student-t law.
struct PredictiveT {
  double dof = 1.0;
  double loc = 0.0;
  double scale = 1.0;

  /// Mean (dof > 1) and standard deviation (dof > 2) of the law.
  double mean() const;
  double sd() const;
};

struct OlsFit {
  Eigen::VectorXd coef;
  double s2 = 0.0;
  Eigen::MatrixXd xtx_inv;
  std::size_t dof_resid = 0;
};

/// q_jg | D ~ Beta(a_jg, b_jg), J clusters by K genes.
struct BetaPosteriorMatrix {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::vector<std::int64_t> cluster_sizes;
  CountMatrix detections;

  Eigen::Index clusters() const { return a.rows(); }
  Eigen::Index genes() const { return a.cols(); }
  Eigen::MatrixXd mean() const;
};

NigPosterior fit_nig(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const NigPrior& prior);

/// Sequential update: the posterior acts as the prior for the new batch.
NigPosterior update_nig(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

PredictiveT predictive(const NigPosterior& post, const Eigen::VectorXd& x_ctx);

double predictive_quantile(const PredictiveT& pred, double p);
double sample_predictive(const PredictiveT& pred, Rng& rng);

OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
double ols_predictive_quantile(const OlsFit& fit, const Eigen::VectorXd& x_ctx, double p);

BetaPosteriorMatrix fit_beta_binomial(const CountMatrix& detections,
                                      const std::vector<std::int64_t>& cluster_sizes, double a0,
                                      double b0);

/// Independent Beta draws, filled row by row (cluster-major).
Eigen::MatrixXd sample_q_matrix(const BetaPosteriorMatrix& post, Rng& rng);

}  // namespace postfeas
