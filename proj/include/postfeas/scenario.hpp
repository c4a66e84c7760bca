#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "postfeas/lp.hpp"

namespace postfeas {

struct StreamRef {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// One posterior draw of the m uncertain rows: rows(i, :) x  (sense_i)  rhs(i).
struct ScenarioDraw {
  Eigen::MatrixXd rows;
  Eigen::VectorXd rhs;
};

struct ScenarioSet {
  std::vector<Sense> senses;  // one per uncertain row
  std::vector<ScenarioDraw> draws;
  StreamRef source;

  std::size_t uncertain_rows() const { return senses.size(); }
  std::size_t size() const { return draws.size(); }
  void validate(std::size_t num_vars) const;
};

/// Scenario set where only right-hand sides vary: every draw shares `rows`.
ScenarioSet make_rhs_scenarios(const Eigen::MatrixXd& rows, Sense sense,
                               const std::vector<Eigen::VectorXd>& rhs_draws, StreamRef source);

/// Smallest N with binomial_tail(N, eps, d) <= delta.
std::uint64_t required_sample_size(double eps, double delta, std::uint64_t d);

/// P(violation > eps) bound for N scenarios and support rank d.
double violation_bound(std::uint64_t n, double eps, std::uint64_t d);

/// base plus m * N stacked sampled constraints (draw-major order).
LpProblem build_scenario_lp(const LpProblem& base, const ScenarioSet& scen);

/// Componentwise minimum of right-hand-side draws.
std::vector<double> rhs_scenario_min(const std::vector<std::vector<double>>& draws);

/// Indices of draws kept per uncertain row after dropping rows dominated by
/// another draw of the same row. Only valid when every variable has lo >= 0.
std::vector<std::vector<std::size_t>> nondominated_draws(const ScenarioSet& scen);

struct ScenarioSolveOptions {
  bool prefilter = true;
  /// Row generation: solve over a working subset, add violated draws, repeat.
  bool lazy = true;
  std::size_t lazy_threshold = 200;  // stacked rows above which row generation is used
  std::size_t add_per_row = 8;
  SolverTolerances tol{};
};

struct ScenarioSolve {
  LpSolution solution;
  std::size_t stacked_rows = 0;
  std::size_t kept_rows = 0;   // after the dominance filter
  std::size_t active_rows = 0; // rows present in the final LP
  std::size_t rounds = 0;
};

ScenarioSolve solve_scenario_lp(const LpProblem& base, const ScenarioSet& scen,
                                const ScenarioSolveOptions& opts = {});

/// Largest residual of any sampled constraint at x (0 when all hold).
double max_scenario_residual(const ScenarioSet& scen, const std::vector<double>& x);

nlohmann::json to_json(const ScenarioSet& scen);
ScenarioSet scenario_set_from_json(const nlohmann::json& doc);

}  // namespace postfeas
