#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace postfeas {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, GreaterEqual, Equal };

std::string_view to_string(Sense sense);
Sense sense_from_string(std::string_view text);

struct Constraint {
  std::vector<double> row;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct Bound {
  double lo = 0.0;
  double hi = kInf;
};

/// Maximize objective^T x subject to linear constraints and per-variable bounds.
struct LpProblem {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<Bound> bounds;

  std::size_t num_vars() const { return objective.size(); }

  /// Throws DimensionMismatch / DomainError when the invariants do not hold.
  void validate() const;

  /// Convenience: append a constraint, checking its length.
  void add(std::vector<double> row, Sense sense, double rhs);
};

/// Fresh problem with n variables, zero objective and bounds [0, +inf).
LpProblem make_problem(std::size_t n);

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  std::size_t iterations = 0;
};

struct SolverTolerances {
  double feas = 1e-8;
  double obj = 1e-7;
  double pivot = 1e-10;
  /// Consecutive degenerate pivots before switching from Dantzig to Bland.
  std::size_t degenerate_limit = 50;
  std::size_t max_iterations = 200000;
  std::size_t refactor_every = 64;
};

/// Equality form: maximize c^T y + offset, A y = b, 0 <= y <= upper.
struct StandardFormLp {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major rows x cols
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> upper;
  double objective_offset = 0.0;

  /// How each original variable is reconstructed from standard-form columns.
  enum class Map { Shift, NegatedShift, Split };
  struct VarMap {
    Map kind = Map::Shift;
    std::size_t col = 0;
    std::size_t col_neg = 0;  // only for Split
    double offset = 0.0;
  };
  std::vector<VarMap> var_map;
  /// Slack column per original constraint, or npos for equalities.
  std::vector<std::size_t> slack_col;
  std::size_t original_vars = 0;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double& at(std::size_t r, std::size_t c_) { return a[r * cols + c_]; }
  double at(std::size_t r, std::size_t c_) const { return a[r * cols + c_]; }

  /// Original-space x from a standard-form point y.
  std::vector<double> recover(const std::vector<double>& y) const;
};

StandardFormLp standardize(const LpProblem& problem);

/// Dense two-phase revised simplex (bounded variables, Dantzig pricing with a
/// Bland fallback after a run of degenerate pivots).
LpSolution solve_lp(const LpProblem& problem, const SolverTolerances& tol = {});

/// Vertex-enumeration oracle for tiny problems (n <= 6, at most 24 hyperplanes).
LpSolution brute_force_lp(const LpProblem& problem, double tol = 1e-9);

/// Largest violation of any constraint or bound at x (0 when feasible).
double max_residual(const LpProblem& problem, const std::vector<double>& x);

double dot(const std::vector<double>& a, const std::vector<double>& b);

nlohmann::json to_json(const LpProblem& problem);
LpProblem lp_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const LpSolution& solution);

/// JSON number, or null for an infinite value.
nlohmann::json bound_to_json(double value);
double bound_from_json(const nlohmann::json& value, double infinite_as);

}  // namespace postfeas
