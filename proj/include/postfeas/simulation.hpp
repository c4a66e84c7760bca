#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "postfeas/lp.hpp"
#include "postfeas/posterior.hpp"
#include "postfeas/rng.hpp"

namespace postfeas {

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
  double draw(Rng& rng) const { return lo + (hi - lo) * rng.uniform(); }
};

struct SimConfig {
  std::size_t n = 18;
  std::size_t m = 7;
  std::size_t d_ctx = 6;
  std::size_t n_obs = 90;
  std::size_t n_scen = 300;
  std::uint64_t m_true = 5000;
  std::uint64_t m_cert = 5000;
  std::size_t trials_per_alpha = 60;
  std::vector<double> alphas{0.01, 0.05, 0.10};
  double x_max = 50.0;
  std::uint64_t master_seed = 42;
  double cert_beta = 0.05;

  UniformRange a_entry{0.5, 1.5};
  UniformRange p_entry{1.0, 5.0};
  UniformRange intercept{150.0, 250.0};
  UniformRange slope{-2.0, 2.0};
  UniformRange sigma{12.0, 24.0};
  UniformRange context{0.0, 1.0};

  // NIG prior: mean 0, precision prior_precision * I, shape/rate.
  double prior_precision = 1e-2;
  double prior_shape = 2.0;
  double prior_rate = 2.0;

  void validate() const;
};

nlohmann::json to_json(const SimConfig& cfg);
/// Missing keys keep their defaults.
SimConfig sim_config_from_json(const nlohmann::json& doc);

struct SimInstance {
  Eigen::MatrixXd a;                   // m x n
  Eigen::VectorXd p;                   // n
  Eigen::MatrixXd beta_true;           // m x d_ctx
  Eigen::VectorXd sigma_true;          // m
  Eigen::VectorXd x_ctx;               // decision-time context
  Eigen::MatrixXd x_hist;              // n_obs x d_ctx
  Eigen::MatrixXd b_hist;              // n_obs x m

  Eigen::VectorXd true_mean() const { return beta_true * x_ctx; }
};

enum class Method { CR, FPQ, PM, PS, RB };
inline constexpr std::array<Method, 5> kAllMethods{Method::CR, Method::FPQ, Method::PM, Method::PS, Method::RB};

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

struct TrialRecord {
  double alpha = 0.0;
  Method method = Method::PM;
  std::size_t trial = 0;
  std::string status = "optimal";  // optimal | infeasible | unbounded | error
  double profit = 0.0;
  double v_true = 0.0;
  double v_post = 0.0;
  double v_post_ub95 = 0.0;
  bool clamped = false;  // some b-hat entry was negative and set to 0
  std::uint64_t seed = 0;
  std::uint64_t instance_stream = 0;
};

SimInstance gen_instance(const SimConfig& cfg, Rng& rng);

/// Per-resource posterior predictive laws of next-period b at x_ctx.
std::vector<PredictiveT> fit_predictives(const SimConfig& cfg, const SimInstance& inst);

/// Capacity vector b-hat chosen by a method; `scenario_rng` is used only by PS.
Eigen::VectorXd method_capacity(Method method, const SimConfig& cfg, const SimInstance& inst,
                                const std::vector<PredictiveT>& pred, double alpha, Rng& scenario_rng);

/// max p^T x  s.t.  A x <= b, 0 <= x <= x_max.
LpProblem capacity_lp(const SimInstance& inst, const Eigen::VectorXd& b, double x_max);

/// Fraction of m_true fresh true-model draws with A x not <= b.
double true_violation(const SimInstance& inst, const std::vector<double>& x, std::uint64_t draws, Rng& rng);

/// Streams are derived from (master_seed, trial_index): "scenario" for PS,
/// "truth" for v_true and "certify" for the posterior certificate.
TrialRecord run_method(Method method, const SimConfig& cfg, const SimInstance& inst,
                       const std::vector<PredictiveT>& pred, double alpha, std::uint64_t trial_index);

bool succeeded(const TrialRecord& rec);

struct SummaryRow {
  double alpha = 0.0;  // NaN in the pooled table
  Method method = Method::PM;
  std::size_t n = 0;
  double profit_mean = 0.0;
  double profit_sd = 0.0;
  double vtrue_mean = 0.0;
  double vtrue_sd = 0.0;
  double vpost_mean = 0.0;
  double vpost_ub95_mean = 0.0;
};

struct BenchmarkResult {
  std::vector<TrialRecord> trials;  // sorted by (alpha, method, trial)
  std::vector<SummaryRow> by_alpha;
  std::vector<SummaryRow> overall;
};

std::vector<SummaryRow> summarize_by_alpha(const SimConfig& cfg, const std::vector<TrialRecord>& trials);
std::vector<SummaryRow> summarize_overall(const std::vector<TrialRecord>& trials);

/// Runs trials_per_alpha trials per alpha with `jobs` worker threads.
/// Output is independent of `jobs`.
BenchmarkResult run_benchmark(const SimConfig& cfg, std::size_t jobs = 1);

std::string by_alpha_csv(const std::vector<SummaryRow>& rows);
std::string overall_csv(const std::vector<SummaryRow>& rows);
std::string trials_csv(const std::vector<TrialRecord>& trials);

}  // namespace postfeas
