#include "postfeas/certify.hpp"

#include <cmath>
#include <string>

#include "postfeas/errors.hpp"
#include "postfeas/stats.hpp"

namespace postfeas {

double clopper_pearson_upper(std::uint64_t s, std::uint64_t m, double beta) {
  if (m == 0) throw DomainError("clopper_pearson_upper requires M >= 1");
  if (s > m) throw DomainError("clopper_pearson_upper requires s <= M");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("clopper_pearson_upper requires beta in (0, 1)");
  if (s == m) return 1.0;
  return beta_quantile(1.0 - beta, static_cast<double>(s) + 1.0, static_cast<double>(m - s));
}

Certificate make_certificate(const ViolationCount& count, double beta) {
  Certificate cert;
  cert.m = count.draws;
  cert.s = count.violations;
  cert.beta = beta;
  cert.v_hat = static_cast<double>(count.violations) / static_cast<double>(count.draws);
  cert.upper_bound = clopper_pearson_upper(count.violations, count.draws, beta);
  cert.per_constraint_rates.reserve(count.per_constraint.size());
  for (std::uint64_t c : count.per_constraint) {
    cert.per_constraint_rates.push_back(static_cast<double>(c) / static_cast<double>(count.draws));
  }
  return cert;
}

GaussianRowModel::GaussianRowModel(std::vector<Eigen::VectorXd> centers,
                                   const std::vector<Eigen::MatrixXd>& covs)
    : centers_(std::move(centers)) {
  if (centers_.size() != covs.size()) throw DimensionMismatch("one covariance per row is required");
  for (std::size_t i = 0; i < covs.size(); ++i) {
    if (covs[i].rows() != centers_[i].size() || covs[i].cols() != centers_[i].size()) {
      throw DimensionMismatch("row covariance must match its center");
    }
    if (i > 0 && centers_[i].size() != centers_[0].size()) {
      throw DimensionMismatch("all rows must share dimension n + 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covs[i]);
    const double scale = std::max(1.0, covs[i].diagonal().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw NotPositiveDefinite("row covariance has a negative eigenvalue");
    }
    factors_.push_back(eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal());
  }
}

std::size_t GaussianRowModel::num_vars() const {
  return centers_.empty() ? 0 : static_cast<std::size_t>(centers_[0].size() - 1);
}

void GaussianRowModel::sample_residuals(std::span<const double> x, Rng& rng, std::span<double> g) const {
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const Eigen::Index d = centers_[i].size();
    Eigen::VectorXd z(d);
    for (Eigen::Index k = 0; k < d; ++k) z(k) = sample_normal(rng);
    const Eigen::VectorXd u = centers_[i] + factors_[i] * z;
    double lhs = 0.0;
    for (Eigen::Index j = 0; j + 1 < d; ++j) lhs += u(j) * x[static_cast<std::size_t>(j)];
    g[i] = lhs - u(d - 1);
  }
}

StudentTRhsModel::StudentTRhsModel(Eigen::MatrixXd a, std::vector<PredictiveT> rhs)
    : a_(std::move(a)), rhs_(std::move(rhs)) {
  if (static_cast<std::size_t>(a_.rows()) != rhs_.size()) {
    throw DimensionMismatch("one predictive law per row of A is required");
  }
}

void StudentTRhsModel::sample_residuals(std::span<const double> x, Rng& rng, std::span<double> g) const {
  for (std::size_t j = 0; j < rhs_.size(); ++j) {
    const double b = sample_predictive(rhs_[j], rng);
    double lhs = 0.0;
    for (Eigen::Index k = 0; k < a_.cols(); ++k) lhs += a_(static_cast<Eigen::Index>(j), k) * x[static_cast<std::size_t>(k)];
    g[j] = lhs - b;
  }
}

BetaCoverageModel::BetaCoverageModel(BetaPosteriorMatrix post, double threshold)
    : post_(std::move(post)), threshold_(threshold) {}

void BetaCoverageModel::sample_residuals(std::span<const double> x, Rng& rng, std::span<double> g) const {
  const Eigen::MatrixXd q = sample_q_matrix(post_, rng);
  for (Eigen::Index j = 0; j < q.rows(); ++j) {
    double coverage = 0.0;
    for (Eigen::Index k = 0; k < q.cols(); ++k) coverage += q(j, k) * x[static_cast<std::size_t>(k)];
    g[static_cast<std::size_t>(j)] = threshold_ - coverage;
  }
}

Certificate certify(std::span<const double> x, const PosteriorModel& model, std::uint64_t m,
                    double beta, Rng& rng) {
  if (x.size() != model.num_vars()) throw DimensionMismatch("solution length differs from the model");
  struct Token {};
  return certify(
      x,
      [&](std::span<const double> xs, const Token&, std::span<double> g) {
        model.sample_residuals(xs, rng, g);
      },
      [](Rng&) { return Token{}; }, model.num_constraints(), m, beta, rng);
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const auto data = rows.get<std::vector<std::vector<double>>>();
  const std::size_t cols = data.empty() ? 0 : data.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() != cols) throw ParseError("ragged matrix in model JSON");
    for (std::size_t j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
  }
  return out;
}

}  // namespace

std::unique_ptr<PosteriorModel> posterior_model_from_json(const nlohmann::json& doc) {
  try {
    const std::string family = doc.at("family").get<std::string>();
    if (family == "gaussian_rows") {
      std::vector<Eigen::VectorXd> centers;
      std::vector<Eigen::MatrixXd> covs;
      for (const auto& row : doc.at("rows")) {
        const auto c = row.at("center").get<std::vector<double>>();
        centers.emplace_back(Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
        covs.push_back(matrix_from_json(row.at("cov")));
      }
      return std::make_unique<GaussianRowModel>(std::move(centers), covs);
    }
    if (family == "student_t_rhs") {
      Eigen::MatrixXd a = matrix_from_json(doc.at("A"));
      std::vector<PredictiveT> rhs;
      for (const auto& p : doc.at("predictive")) {
        PredictiveT t{p.at("dof").get<double>(), p.at("loc").get<double>(), p.at("scale").get<double>()};
        if (!(t.dof > 0.0) || !(t.scale > 0.0)) throw ParseError("predictive dof and scale must be positive");
        rhs.push_back(t);
      }
      return std::make_unique<StudentTRhsModel>(std::move(a), std::move(rhs));
    }
    if (family == "beta_coverage") {
      BetaPosteriorMatrix post;
      post.a = matrix_from_json(doc.at("a"));
      post.b = matrix_from_json(doc.at("b"));
      if (post.a.rows() != post.b.rows() || post.a.cols() != post.b.cols()) {
        throw ParseError("beta_coverage a and b must have equal shape");
      }
      if ((post.a.array() <= 0.0).any() || (post.b.array() <= 0.0).any()) {
        throw ParseError("beta_coverage parameters must be positive");
      }
      return std::make_unique<BetaCoverageModel>(std::move(post), doc.at("threshold").get<double>());
    }
    throw ParseError("unsupported posterior family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Certificate& cert) {
  return {{"M", cert.m},
          {"s", cert.s},
          {"v_hat", cert.v_hat},
          {"upper_bound", cert.upper_bound},
          {"beta", cert.beta},
          {"per_constraint", cert.per_constraint_rates}};
}

Certificate certificate_from_json(const nlohmann::json& doc) {
  try {
    Certificate cert;
    cert.m = doc.at("M").get<std::uint64_t>();
    cert.s = doc.at("s").get<std::uint64_t>();
    cert.v_hat = doc.at("v_hat").get<double>();
    cert.upper_bound = doc.at("upper_bound").get<double>();
    cert.beta = doc.at("beta").get<double>();
    if (doc.contains("per_constraint")) {
      cert.per_constraint_rates = doc.at("per_constraint").get<std::vector<double>>();
    }
    if (cert.s > cert.m) throw ParseError("certificate has s > M");
    return cert;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("certificate JSON: ") + e.what());
  }
}

}  // namespace postfeas
