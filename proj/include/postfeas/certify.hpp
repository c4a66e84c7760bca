#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "postfeas/posterior.hpp"
#include "postfeas/rng.hpp"

namespace postfeas {

struct ViolationCount {
  std::uint64_t draws = 0;
  std::uint64_t violations = 0;
  std::vector<std::uint64_t> per_constraint;
};

struct Certificate {
  std::uint64_t m = 0;  // certification draws
  std::uint64_t s = 0;  // violating draws
  double v_hat = 0.0;
  double upper_bound = 1.0;
  double beta = 0.05;
  std::vector<double> per_constraint_rates;
};

/// One-sided (1 - beta) Clopper-Pearson upper bound: BetaInv(1 - beta; s + 1, M - s), 1 when s = M.
double clopper_pearson_upper(std::uint64_t s, std::uint64_t m, double beta);

Certificate make_certificate(const ViolationCount& count, double beta);

/// Counts draws theta with some g_i(x, theta) > 0. The residual oracle writes
/// g_1..g_m for a draw; a draw violates on the raw sign, with no tolerance.
template <class Sampler, class Residuals>
  requires std::invocable<Sampler&, Rng&>
ViolationCount estimate_violation(std::span<const double> x, Residuals&& residuals, Sampler&& sampler,
                                  std::size_t num_constraints, std::uint64_t m, Rng& rng) {
  ViolationCount out;
  out.draws = m;
  out.per_constraint.assign(num_constraints, 0);
  std::vector<double> g(num_constraints);
  for (std::uint64_t l = 0; l < m; ++l) {
    const auto draw = sampler(rng);
    residuals(x, draw, std::span<double>(g));
    bool any = false;
    for (std::size_t i = 0; i < num_constraints; ++i) {
      if (g[i] > 0.0) {
        ++out.per_constraint[i];
        any = true;
      }
    }
    if (any) ++out.violations;
  }
  return out;
}

template <class Sampler, class Residuals>
Certificate certify(std::span<const double> x, Residuals&& residuals, Sampler&& sampler,
                    std::size_t num_constraints, std::uint64_t m, double beta, Rng& rng) {
  return make_certificate(estimate_violation(x, residuals, sampler, num_constraints, m, rng), beta);
}

/// Posterior over the uncertain constraints of a decision problem, able to
/// draw theta and evaluate g(x, theta) in one step.
class PosteriorModel {
 public:
  virtual ~PosteriorModel() = default;
  virtual std::size_t num_constraints() const = 0;
  virtual std::size_t num_vars() const = 0;
  virtual void sample_residuals(std::span<const double> x, Rng& rng, std::span<double> g) const = 0;
};

/// u_i = (a_i, b_i) ~ N(center_i, cov_i) independently; g_i = a_i^T x - b_i.
class GaussianRowModel final : public PosteriorModel {
 public:
  GaussianRowModel(std::vector<Eigen::VectorXd> centers, const std::vector<Eigen::MatrixXd>& covs);
  std::size_t num_constraints() const override { return centers_.size(); }
  std::size_t num_vars() const override;
  void sample_residuals(std::span<const double> x, Rng& rng, std::span<double> g) const override;

 private:
  std::vector<Eigen::VectorXd> centers_;
  std::vector<Eigen::MatrixXd> factors_;
};

/// Fixed A, b_j ~ independent location-scale Student-t; g_j = (A x)_j - b_j.
class StudentTRhsModel final : public PosteriorModel {
 public:
  StudentTRhsModel(Eigen::MatrixXd a, std::vector<PredictiveT> rhs);
  std::size_t num_constraints() const override { return rhs_.size(); }
  std::size_t num_vars() const override { return static_cast<std::size_t>(a_.cols()); }
  void sample_residuals(std::span<const double> x, Rng& rng, std::span<double> g) const override;

 private:
  Eigen::MatrixXd a_;
  std::vector<PredictiveT> rhs_;
};

/// Coverage sum_g q_jg x_g >= L with q_jg ~ Beta(a_jg, b_jg); g_j = L - coverage_j.
class BetaCoverageModel final : public PosteriorModel {
 public:
  BetaCoverageModel(BetaPosteriorMatrix post, double threshold);
  std::size_t num_constraints() const override { return static_cast<std::size_t>(post_.clusters()); }
  std::size_t num_vars() const override { return static_cast<std::size_t>(post_.genes()); }
  void sample_residuals(std::span<const double> x, Rng& rng, std::span<double> g) const override;

 private:
  BetaPosteriorMatrix post_;
  double threshold_;
};

Certificate certify(std::span<const double> x, const PosteriorModel& model, std::uint64_t m,
                    double beta, Rng& rng);

/// model.json families: "gaussian_rows", "student_t_rhs", "beta_coverage".
std::unique_ptr<PosteriorModel> posterior_model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Certificate& cert);
Certificate certificate_from_json(const nlohmann::json& doc);

}  // namespace postfeas
