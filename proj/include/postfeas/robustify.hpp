#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "postfeas/lp.hpp"
#include "postfeas/posterior.hpp"

namespace postfeas {

/// {u : (u - center)^T Sigma^{-1} (u - center) <= radius^2} with F F^T = Sigma.
///
/// F is the Cholesky factor when Sigma is positive definite. Semidefinite
/// covariances (uncertainty confined to a subspace, e.g. only the right-hand
/// side of a row) fall back to the symmetric square root, and the set is read
/// as center + radius * F * (unit ball).
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape_factor;
  double radius = 1.0;

  static Ellipsoid from_covariance(const Eigen::VectorXd& center, const Eigen::MatrixXd& cov,
                                   double radius);
  Eigen::Index dim() const { return center.size(); }
};

struct Support {
  double value = 0.0;
  Eigen::VectorXd maximizer;
};

/// max_{u in ell} u^T z = center^T z + radius * ||F^T z||, with its maximizer.
Support soc_support(const Ellipsoid& ell, const Eigen::VectorXd& z);

/// sqrt(chi2_dim quantile at 1 - alpha/m).
double bonferroni_kappa(double alpha, std::size_t m, std::size_t dim);

/// Uncertain row u = (a, b) of a^T x <= b, written u^T (x, -1) <= 0.
struct UncertainRow {
  Eigen::VectorXd center;
  Eigen::MatrixXd cov;
};

struct RobustRow {
  Ellipsoid ellipsoid;  // radius == kappa
  Eigen::MatrixXd cov;
  double kappa = 0.0;
};

struct RobustLp {
  LpProblem base;
  std::vector<RobustRow> rows;
};

/// Row-wise credible ellipsoids at Bonferroni level alpha/m, dimension n+1.
RobustLp robustify_rows(const LpProblem& base, const std::vector<UncertainRow>& rows, double alpha);

/// Single joint ellipsoid over the stacked m(n+1) vector with
/// kappa = sqrt(chi2_{m(n+1)}(1 - alpha)); each row is protected over the
/// projection of the joint set onto its own block.
RobustLp robustify_joint(const LpProblem& base, const Eigen::VectorXd& center,
                         const Eigen::MatrixXd& cov, double alpha);

struct CutLog {
  std::size_t rounds = 0;
  std::size_t cuts = 0;
  std::vector<std::size_t> cuts_per_round;
  /// Largest support value over robust rows at the returned point.
  double max_support = 0.0;
};

struct RobustSolve {
  LpSolution solution;
  CutLog log;
};

/// Kelley-style outer approximation using the exact support oracle. Starts
/// from the nominal rows (center^T z <= 0), adds one tangent cut per robust row
/// whose support exceeds tol_cut, and stops when none does.
RobustSolve solve_robust_cutting_planes(const RobustLp& rlp, double tol_cut = 1e-7,
                                        std::size_t max_rounds = 500,
                                        const SolverTolerances& tol = {});

/// CR capacities: per-resource predictive quantile at alpha/m.
std::vector<double> rhs_quantile_tighten(const std::vector<PredictiveT>& predictives, double alpha);

/// RB capacities: mean - z_{1 - alpha/m} * sd.
std::vector<double> rb_heuristic_tighten(const std::vector<double>& means,
                                         const std::vector<double>& sds, double alpha,
                                         std::size_t m);

nlohmann::json to_json(const RobustLp& rlp);
RobustLp robust_lp_from_json(const nlohmann::json& doc);

}  // namespace postfeas
