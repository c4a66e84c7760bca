#include "postfeas/robustify.hpp"

#include <cmath>

#include "postfeas/errors.hpp"
#include "postfeas/stats.hpp"

namespace postfeas {

namespace {

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw DimensionMismatch("covariance must be square");
  if (!cov.allFinite()) throw DomainError("covariance has non-finite entries");
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  if (!cov.isApprox(cov.transpose(), 1e-12) &&
      (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NotPositiveDefinite("covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -1e-12 * scale) throw NotPositiveDefinite("covariance has a negative eigenvalue");
  return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::VectorXd lifted(const std::vector<double>& x) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size() + 1));
  for (std::size_t j = 0; j < x.size(); ++j) z(static_cast<Eigen::Index>(j)) = x[j];
  z(static_cast<Eigen::Index>(x.size())) = -1.0;
  return z;
}

// u^T (x, -1) <= 0  <=>  a^T x <= b
void append_row_cut(LpProblem& lp, const Eigen::VectorXd& u) {
  const auto n = static_cast<Eigen::Index>(lp.num_vars());
  std::vector<double> row(u.data(), u.data() + n);
  lp.add(std::move(row), Sense::LessEqual, u(n));
}

}  // namespace

Ellipsoid Ellipsoid::from_covariance(const Eigen::VectorXd& center, const Eigen::MatrixXd& cov,
                                     double radius) {
  if (cov.rows() != center.size()) throw DimensionMismatch("covariance/center dimension mismatch");
  if (!(radius > 0.0)) throw DomainError("ellipsoid radius must be positive");
  return {center, covariance_factor(cov), radius};
}

Support soc_support(const Ellipsoid& ell, const Eigen::VectorXd& z) {
  if (z.size() != ell.dim()) throw DimensionMismatch("soc_support: dim(z) != dim(ellipsoid)");
  const Eigen::VectorXd ftz = ell.shape_factor.transpose() * z;
  const double norm = ftz.norm();
  Support out;
  out.value = ell.center.dot(z) + ell.radius * norm;
  if (norm > 0.0) {
    out.maximizer = ell.center + ell.radius * (ell.shape_factor * ftz) / norm;
  } else {
    out.maximizer = ell.center;
  }
  return out;
}

double bonferroni_kappa(double alpha, std::size_t m, std::size_t dim) {
  if (m == 0 || dim == 0) throw DomainError("bonferroni_kappa requires m >= 1 and dim >= 1");
  const double level = alpha / static_cast<double>(m);
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bonferroni_kappa requires alpha/m in (0, 1)");
  return std::sqrt(chi2_quantile(1.0 - level, static_cast<double>(dim)));
}

RobustLp robustify_rows(const LpProblem& base, const std::vector<UncertainRow>& rows, double alpha) {
  base.validate();
  RobustLp out;
  out.base = base;
  if (rows.empty()) return out;
  const std::size_t dim = base.num_vars() + 1;
  const double kappa = bonferroni_kappa(alpha, rows.size(), dim);
  for (const auto& row : rows) {
    if (static_cast<std::size_t>(row.center.size()) != dim) {
      throw DimensionMismatch("uncertain row center must have dimension n + 1");
    }
    out.rows.push_back({Ellipsoid::from_covariance(row.center, row.cov, kappa), row.cov, kappa});
  }
  return out;
}

RobustLp robustify_joint(const LpProblem& base, const Eigen::VectorXd& center,
                         const Eigen::MatrixXd& cov, double alpha) {
  base.validate();
  const auto dim = static_cast<Eigen::Index>(base.num_vars() + 1);
  if (center.size() == 0 || center.size() % dim != 0) {
    throw DimensionMismatch("joint center length must be a multiple of n + 1");
  }
  if (cov.rows() != center.size() || cov.cols() != center.size()) {
    throw DimensionMismatch("joint covariance must match the stacked dimension");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  covariance_factor(cov);  // validates the joint matrix
  const double kappa = std::sqrt(chi2_quantile(1.0 - alpha, static_cast<double>(center.size())));
  RobustLp out;
  out.base = base;
  for (Eigen::Index i = 0; i < center.size() / dim; ++i) {
    const Eigen::VectorXd block_center = center.segment(i * dim, dim);
    const Eigen::MatrixXd block_cov = cov.block(i * dim, i * dim, dim, dim);
    out.rows.push_back({Ellipsoid::from_covariance(block_center, block_cov, kappa), block_cov, kappa});
  }
  return out;
}

RobustSolve solve_robust_cutting_planes(const RobustLp& rlp, double tol_cut, std::size_t max_rounds,
                                        const SolverTolerances& tol) {
  LpProblem lp = rlp.base;
  for (const auto& row : rlp.rows) append_row_cut(lp, row.ellipsoid.center);

  RobustSolve out;
  for (std::size_t round = 1; round <= max_rounds; ++round) {
    out.log.rounds = round;
    out.solution = solve_lp(lp, tol);
    if (out.solution.status != LpStatus::Optimal) return out;
    const Eigen::VectorXd z = lifted(out.solution.x);
    std::size_t added = 0;
    double worst = -kInf;
    for (const auto& row : rlp.rows) {
      const Support sup = soc_support(row.ellipsoid, z);
      worst = std::max(worst, sup.value);
      if (sup.value > tol_cut) {
        append_row_cut(lp, sup.maximizer);
        ++added;
      }
    }
    out.log.max_support = rlp.rows.empty() ? 0.0 : worst;
    out.log.cuts_per_round.push_back(added);
    out.log.cuts += added;
    if (added == 0) return out;
  }
  throw MaxRoundsExceeded("cutting-plane loop did not converge within max_rounds");
}

std::vector<double> rhs_quantile_tighten(const std::vector<PredictiveT>& predictives, double alpha) {
  if (predictives.empty()) return {};
  const double level = alpha / static_cast<double>(predictives.size());
  if (!(level > 0.0 && level < 1.0)) throw DomainError("rhs_quantile_tighten requires alpha/m in (0, 1)");
  std::vector<double> out;
  out.reserve(predictives.size());
  for (const auto& pred : predictives) out.push_back(predictive_quantile(pred, level));
  return out;
}

std::vector<double> rb_heuristic_tighten(const std::vector<double>& means,
                                         const std::vector<double>& sds, double alpha,
                                         std::size_t m) {
  if (means.size() != sds.size()) throw DimensionMismatch("means and sds must have equal length");
  const double level = alpha / static_cast<double>(m);
  if (!(level > 0.0 && level < 1.0)) throw DomainError("rb_heuristic_tighten requires alpha/m in (0, 1)");
  const double z = normal_quantile(1.0 - level);
  std::vector<double> out(means.size());
  for (std::size_t j = 0; j < means.size(); ++j) {
    if (sds[j] < 0.0) throw DomainError("standard deviations must be nonnegative");
    out[j] = means[j] - z * sds[j];
  }
  return out;
}

nlohmann::json to_json(const RobustLp& rlp) {
  nlohmann::json doc = to_json(rlp.base);
  auto rows = nlohmann::json::array();
  for (const auto& row : rlp.rows) {
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index i = 0; i < row.cov.rows(); ++i) {
      std::vector<double> r(static_cast<std::size_t>(row.cov.cols()));
      for (Eigen::Index j = 0; j < row.cov.cols(); ++j) r[static_cast<std::size_t>(j)] = row.cov(i, j);
      cov.push_back(r);
    }
    const auto& c = row.ellipsoid.center;
    rows.push_back({{"center", std::vector<double>(c.data(), c.data() + c.size())},
                    {"cov", cov},
                    {"kappa", row.kappa}});
  }
  doc["robust_rows"] = std::move(rows);
  return doc;
}

RobustLp robust_lp_from_json(const nlohmann::json& doc) {
  RobustLp out;
  out.base = lp_from_json(doc);
  if (!doc.contains("robust_rows")) return out;
  try {
    for (const auto& item : doc.at("robust_rows")) {
      const auto center = item.at("center").get<std::vector<double>>();
      const auto cov_rows = item.at("cov").get<std::vector<std::vector<double>>>();
      const double kappa = item.at("kappa").get<double>();
      const auto d = static_cast<Eigen::Index>(center.size());
      if (center.size() != out.base.num_vars() + 1) {
        throw ParseError("robust row center must have length n + 1");
      }
      if (cov_rows.size() != center.size()) throw ParseError("robust row cov must be (n+1) x (n+1)");
      Eigen::MatrixXd cov(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        if (cov_rows[static_cast<std::size_t>(i)].size() != center.size()) {
          throw ParseError("robust row cov must be (n+1) x (n+1)");
        }
        for (Eigen::Index j = 0; j < d; ++j) cov(i, j) = cov_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(center.data(), d);
      out.rows.push_back({Ellipsoid::from_covariance(c, cov, kappa), cov, kappa});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("robust LP JSON: ") + e.what());
  }
  return out;
}

}  // namespace postfeas
