#include "postfeas/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "postfeas/errors.hpp"

namespace postfeas {

std::string_view to_string(Sense sense) {
  switch (sense) {
    case Sense::LessEqual:
      return "<=";
    case Sense::GreaterEqual:
      return ">=";
    case Sense::Equal:
      return "=";
  }
  return "?";
}

Sense sense_from_string(std::string_view text) {
  if (text == "<=") return Sense::LessEqual;
  if (text == ">=") return Sense::GreaterEqual;
  if (text == "=" || text == "==") return Sense::Equal;
  throw ParseError("unknown constraint sense '" + std::string(text) + "'");
}

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "?";
}

void LpProblem::validate() const {
  const std::size_t n = objective.size();
  if (bounds.size() != n) {
    throw DimensionMismatch("bounds length differs from objective length");
  }
  for (double v : objective) {
    if (!std::isfinite(v)) throw DomainError("non-finite objective coefficient");
  }
  for (const auto& con : constraints) {
    if (con.row.size() != n) throw DimensionMismatch("constraint row length differs from n");
    if (!std::isfinite(con.rhs)) throw DomainError("non-finite right-hand side");
    for (double v : con.row) {
      if (!std::isfinite(v)) throw DomainError("non-finite constraint coefficient");
    }
  }
  for (const auto& bd : bounds) {
    if (std::isnan(bd.lo) || std::isnan(bd.hi)) throw DomainError("NaN bound");
    if (bd.lo == kInf || bd.hi == -kInf) throw DomainError("bound lo=+inf or hi=-inf");
    if (bd.lo > bd.hi) throw DomainError("variable bound lo > hi");
  }
}

void LpProblem::add(std::vector<double> row, Sense sense, double rhs) {
  if (row.size() != objective.size()) {
    throw DimensionMismatch("constraint row length differs from n");
  }
  constraints.push_back({std::move(row), sense, rhs});
}

LpProblem make_problem(std::size_t n) {
  LpProblem p;
  p.objective.assign(n, 0.0);
  p.bounds.assign(n, Bound{});
  return p;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_residual(const LpProblem& problem, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& con : problem.constraints) {
    const double lhs = dot(con.row, x);
    double r = 0.0;
    switch (con.sense) {
      case Sense::LessEqual:
        r = lhs - con.rhs;
        break;
      case Sense::GreaterEqual:
        r = con.rhs - lhs;
        break;
      case Sense::Equal:
        r = std::abs(lhs - con.rhs);
        break;
    }
    worst = std::max(worst, r);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max(worst, problem.bounds[j].lo - x[j]);
    worst = std::max(worst, x[j] - problem.bounds[j].hi);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Standard form

StandardFormLp standardize(const LpProblem& problem) {
  problem.validate();
  StandardFormLp sf;
  const std::size_t n = problem.num_vars();
  sf.original_vars = n;

  std::size_t cols = 0;
  sf.var_map.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Bound bd = problem.bounds[j];
    auto& vm = sf.var_map[j];
    if (std::isfinite(bd.lo)) {
      vm.kind = StandardFormLp::Map::Shift;
      vm.offset = bd.lo;
      vm.col = cols++;
    } else if (std::isfinite(bd.hi)) {
      vm.kind = StandardFormLp::Map::NegatedShift;
      vm.offset = bd.hi;
      vm.col = cols++;
    } else {
      vm.kind = StandardFormLp::Map::Split;
      vm.col = cols++;
      vm.col_neg = cols++;
    }
  }
  const std::size_t structural = cols;
  sf.slack_col.assign(problem.constraints.size(), StandardFormLp::npos);
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    if (problem.constraints[i].sense != Sense::Equal) sf.slack_col[i] = cols++;
  }

  sf.rows = problem.constraints.size();
  sf.cols = cols;
  sf.a.assign(sf.rows * sf.cols, 0.0);
  sf.b.assign(sf.rows, 0.0);
  sf.c.assign(sf.cols, 0.0);
  sf.upper.assign(sf.cols, kInf);

  for (std::size_t j = 0; j < n; ++j) {
    const auto& vm = sf.var_map[j];
    const double cj = problem.objective[j];
    switch (vm.kind) {
      case StandardFormLp::Map::Shift:
        sf.c[vm.col] = cj;
        sf.upper[vm.col] = problem.bounds[j].hi - vm.offset;
        sf.objective_offset += cj * vm.offset;
        break;
      case StandardFormLp::Map::NegatedShift:
        sf.c[vm.col] = -cj;
        sf.objective_offset += cj * vm.offset;
        break;
      case StandardFormLp::Map::Split:
        sf.c[vm.col] = cj;
        sf.c[vm.col_neg] = -cj;
        break;
    }
  }
  (void)structural;

  for (std::size_t i = 0; i < sf.rows; ++i) {
    const auto& con = problem.constraints[i];
    double rhs = con.rhs;
    for (std::size_t j = 0; j < n; ++j) {
      const double aij = con.row[j];
      if (aij == 0.0) continue;
      const auto& vm = sf.var_map[j];
      switch (vm.kind) {
        case StandardFormLp::Map::Shift:
          sf.at(i, vm.col) = aij;
          rhs -= aij * vm.offset;
          break;
        case StandardFormLp::Map::NegatedShift:
          sf.at(i, vm.col) = -aij;
          rhs -= aij * vm.offset;
          break;
        case StandardFormLp::Map::Split:
          sf.at(i, vm.col) = aij;
          sf.at(i, vm.col_neg) = -aij;
          break;
      }
    }
    if (con.sense == Sense::LessEqual) sf.at(i, sf.slack_col[i]) = 1.0;
    if (con.sense == Sense::GreaterEqual) sf.at(i, sf.slack_col[i]) = -1.0;
    sf.b[i] = rhs;
  }
  return sf;
}

std::vector<double> StandardFormLp::recover(const std::vector<double>& y) const {
  std::vector<double> x(original_vars, 0.0);
  for (std::size_t j = 0; j < original_vars; ++j) {
    const auto& vm = var_map[j];
    switch (vm.kind) {
      case Map::Shift:
        x[j] = vm.offset + y[vm.col];
        break;
      case Map::NegatedShift:
        x[j] = vm.offset - y[vm.col];
        break;
      case Map::Split:
        x[j] = y[vm.col] - y[vm.col_neg];
        break;
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Revised simplex

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

class Simplex {
 public:
  Simplex(const StandardFormLp& sf, const SolverTolerances& tol) : sf_(sf), tol_(tol) {
    m_ = sf.rows;
    n_ = sf.cols;
    total_ = n_ + m_;
    a_.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(total_));
    a_.setZero();
    b_.resize(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      // Rows are sign-normalized so the artificial basis starts feasible.
      const double sign = sf.b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) a_(idx(i), idx(j)) = sign * sf.at(i, j);
      a_(idx(i), idx(n_ + i)) = 1.0;
      b_(idx(i)) = sign * sf.b[i];
    }
    upper_.assign(total_, kInf);
    for (std::size_t j = 0; j < n_; ++j) upper_[j] = sf.upper[j];
    cost_.assign(total_, 0.0);
    value_.assign(total_, 0.0);
    state_.assign(total_, VarState::AtLower);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      state_[n_ + i] = VarState::Basic;
      value_[n_ + i] = b_(idx(i));
    }
    binv_ = Eigen::MatrixXd::Identity(idx(m_), idx(m_));
    b_scale_ = 1.0;
    for (std::size_t i = 0; i < m_; ++i) b_scale_ = std::max(b_scale_, std::abs(b_(idx(i))));
  }

  LpSolution run() {
    LpSolution out;
    // Phase I: maximize -(sum of artificials).
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) cost_[n_ + i] = -1.0;
    allow_artificial_entry_ = false;
    if (m_ > 0) {
      const auto phase1 = iterate();
      (void)phase1;
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i) infeas += value_[n_ + i];
      if (infeas > tol_.feas * b_scale_) {
        out.status = LpStatus::Infeasible;
        out.iterations = iterations_;
        return out;
      }
      drive_out_artificials();
    }
    for (std::size_t i = 0; i < m_; ++i) upper_[n_ + i] = 0.0;

    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = sf_.c[j];
    const bool bounded = iterate();
    out.iterations = iterations_;
    if (!bounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    refactor();
    std::vector<double> y(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double v = value_[j];
      if (v < 0.0) v = 0.0;
      if (v > upper_[j]) v = upper_[j];
      y[j] = v;
    }
    out.status = LpStatus::Optimal;
    out.x = sf_.recover(y);
    return out;
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  // Returns false if the objective is unbounded along an improving ray.
  bool iterate() {
    std::size_t degenerate_run = 0;
    bool bland = false;
    std::size_t since_refactor = 0;
    Eigen::VectorXd cb(idx(m_));
    Eigen::VectorXd w(idx(m_));
    Eigen::VectorXd cvec(idx(total_));

    while (true) {
      if (iterations_ >= tol_.max_iterations) {
        throw NumericalBreakdown("simplex iteration limit reached");
      }
      if (since_refactor >= tol_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      for (std::size_t i = 0; i < m_; ++i) cb(idx(i)) = cost_[basis_[i]];
      for (std::size_t j = 0; j < total_; ++j) cvec(idx(j)) = cost_[j];
      const Eigen::VectorXd y = binv_.transpose() * cb;
      const Eigen::VectorXd d = cvec - a_.transpose() * y;

      // Pricing.
      std::size_t enter = total_;
      double best = 0.0;
      const double dtol = tol_.feas;
      for (std::size_t j = 0; j < total_; ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (j >= n_ && !allow_artificial_entry_) continue;
        const double dj = d(idx(j));
        double gain = 0.0;
        if (state_[j] == VarState::AtLower && dj > dtol && upper_[j] > 0.0) gain = dj;
        if (state_[j] == VarState::AtUpper && dj < -dtol) gain = -dj;
        if (gain <= 0.0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (gain > best) {
          best = gain;
          enter = j;
        }
      }
      if (enter == total_) return true;

      w = binv_ * a_.col(idx(enter));
      const double dir = state_[enter] == VarState::AtLower ? 1.0 : -1.0;

      // Ratio test.
      double t_best = upper_[enter];  // bound flip
      std::size_t leave_row = m_;
      bool leave_to_upper = false;
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double delta = -dir * w(idx(i));
        const std::size_t col = basis_[i];
        double t = kInf;
        bool to_upper = false;
        if (delta < -tol_.pivot) {
          t = std::max(value_[col], 0.0) / (-delta);
        } else if (delta > tol_.pivot && std::isfinite(upper_[col])) {
          t = std::max(upper_[col] - value_[col], 0.0) / delta;
          to_upper = true;
        } else {
          continue;
        }
        const double mag = std::abs(delta);
        bool take = false;
        if (t < t_best - 1e-12) {
          take = true;
        } else if (t <= t_best + 1e-12 && leave_row < m_) {
          take = bland ? col < basis_[leave_row] : mag > best_pivot;
        } else if (t <= t_best && leave_row == m_) {
          take = true;
        }
        if (take) {
          t_best = t;
          leave_row = i;
          leave_to_upper = to_upper;
          best_pivot = mag;
        }
      }

      if (!std::isfinite(t_best)) return false;

      ++iterations_;
      ++since_refactor;
      if (t_best <= 1e-12) {
        if (++degenerate_run >= tol_.degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
      }

      for (std::size_t i = 0; i < m_; ++i) value_[basis_[i]] -= dir * t_best * w(idx(i));
      value_[enter] += dir * t_best;

      if (leave_row == m_) {
        state_[enter] = state_[enter] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        value_[enter] = state_[enter] == VarState::AtLower ? 0.0 : upper_[enter];
        continue;
      }

      if (std::abs(w(idx(leave_row))) < tol_.pivot) {
        refactor();
        since_refactor = 0;
        w = binv_ * a_.col(idx(enter));
        if (std::abs(w(idx(leave_row))) < tol_.pivot) {
          throw NumericalBreakdown("pivot magnitude below tolerance after refactorization");
        }
      }
      pivot(leave_row, enter, w, leave_to_upper);
    }
  }

  void pivot(std::size_t r, std::size_t enter, const Eigen::VectorXd& w, bool leave_to_upper) {
    const std::size_t leaving = basis_[r];
    state_[leaving] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
    value_[leaving] = leave_to_upper ? upper_[leaving] : 0.0;
    basis_[r] = enter;
    state_[enter] = VarState::Basic;

    const double wr = w(idx(r));
    binv_.row(idx(r)) /= wr;
    const Eigen::RowVectorXd pivot_row = binv_.row(idx(r));
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double wi = w(idx(i));
      if (wi != 0.0) binv_.row(idx(i)) -= wi * pivot_row;
    }
  }

  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd basis_mat(idx(m_), idx(m_));
    for (std::size_t i = 0; i < m_; ++i) basis_mat.col(idx(i)) = a_.col(idx(basis_[i]));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_mat);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) throw NumericalBreakdown("basis matrix is numerically singular");
    binv_ = lu.inverse();
    Eigen::VectorXd rhs = b_;
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == VarState::AtUpper) rhs -= upper_[j] * a_.col(idx(j));
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (std::size_t i = 0; i < m_; ++i) value_[basis_[i]] = xb(idx(i));
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      const Eigen::RowVectorXd row = binv_.row(idx(r)) * a_.leftCols(idx(n_));
      std::size_t best_col = n_;
      double best_mag = 1e-7;
      for (std::size_t j = 0; j < n_; ++j) {
        if (state_[j] == VarState::Basic) continue;
        const double mag = std::abs(row(idx(j)));
        if (mag > best_mag) {
          best_mag = mag;
          best_col = j;
        }
      }
      if (best_col == n_) continue;  // redundant row; artificial stays basic at zero
      const Eigen::VectorXd w = binv_ * a_.col(idx(best_col));
      const double keep = value_[best_col];
      pivot(r, best_col, w, false);
      value_[best_col] = keep;
      refactor();
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (state_[n_ + i] != VarState::Basic) value_[n_ + i] = 0.0;
    }
  }

  const StandardFormLp& sf_;
  SolverTolerances tol_;
  std::size_t m_ = 0, n_ = 0, total_ = 0;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd binv_;
  std::vector<double> upper_, cost_, value_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  std::size_t iterations_ = 0;
  bool allow_artificial_entry_ = false;
  double b_scale_ = 1.0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const SolverTolerances& tol) {
  const StandardFormLp sf = standardize(problem);
  Simplex simplex(sf, tol);
  LpSolution sol = simplex.run();
  if (sol.status == LpStatus::Optimal) {
    double scale = 1.0;
    for (const auto& con : problem.constraints) scale = std::max(scale, std::abs(con.rhs));
    if (max_residual(problem, sol.x) > tol.feas * scale) {
      throw NumericalBreakdown("optimal basis fails the feasibility check");
    }
    sol.objective_value = dot(problem.objective, sol.x);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Vertex enumeration oracle

namespace {

struct Hyperplane {
  Eigen::VectorXd normal;
  double rhs;
  Sense sense;
};

bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
  const std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

bool satisfies(const Hyperplane& h, double lhs, double tol) {
  const double slack_tol = tol * (1.0 + std::abs(h.rhs));
  switch (h.sense) {
    case Sense::LessEqual:
      return lhs <= h.rhs + slack_tol;
    case Sense::GreaterEqual:
      return lhs >= h.rhs - slack_tol;
    case Sense::Equal:
      return std::abs(lhs - h.rhs) <= slack_tol;
  }
  return false;
}

bool in_cone(const Hyperplane& h, double lhs, double tol) {
  switch (h.sense) {
    case Sense::LessEqual:
      return lhs <= tol;
    case Sense::GreaterEqual:
      return lhs >= -tol;
    case Sense::Equal:
      return std::abs(lhs) <= tol;
  }
  return false;
}

}  // namespace

LpSolution brute_force_lp(const LpProblem& problem, double tol) {
  problem.validate();
  const std::size_t n = problem.num_vars();
  std::vector<Hyperplane> planes;
  for (const auto& con : problem.constraints) {
    planes.push_back({Eigen::Map<const Eigen::VectorXd>(con.row.data(), static_cast<Eigen::Index>(n)),
                      con.rhs, con.sense});
  }
  for (std::size_t j = 0; j < n; ++j) {
    const Bound bd = problem.bounds[j];
    Eigen::VectorXd e = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
    if (std::isfinite(bd.lo) && std::isfinite(bd.hi) && bd.lo == bd.hi) {
      planes.push_back({e, bd.lo, Sense::Equal});
      continue;
    }
    if (std::isfinite(bd.lo)) planes.push_back({e, bd.lo, Sense::GreaterEqual});
    if (std::isfinite(bd.hi)) planes.push_back({e, bd.hi, Sense::LessEqual});
  }
  if (n > 6 || planes.size() > 24) {
    throw SizeLimitExceeded("brute_force_lp supports n <= 6 and at most 24 constraints+bounds");
  }

  const Eigen::Map<const Eigen::VectorXd> c(problem.objective.data(), static_cast<Eigen::Index>(n));

  // Restrict to the row space of the constraint normals so the feasible set is pointed.
  Eigen::MatrixXd all(static_cast<Eigen::Index>(planes.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < planes.size(); ++i) all.row(static_cast<Eigen::Index>(i)) = planes[i].normal.transpose();
  Eigen::MatrixXd basis;  // n x r
  std::size_t rank = 0;
  if (planes.empty() || n == 0) {
    basis.resize(static_cast<Eigen::Index>(n), 0);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(all, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cut) ++rank;
    }
    basis = svd.matrixV().leftCols(static_cast<Eigen::Index>(rank));
  }
  const Eigen::VectorXd c_null = c - basis * (basis.transpose() * c);
  const bool objective_in_lineality = c_null.norm() > 1e-9 * std::max(1.0, c.norm());

  std::vector<Hyperplane> reduced;
  reduced.reserve(planes.size());
  for (const auto& h : planes) reduced.push_back({basis.transpose() * h.normal, h.rhs, h.sense});
  const Eigen::VectorXd c_red = basis.transpose() * c;

  auto feasible = [&](const Eigen::VectorXd& y) {
    for (const auto& h : reduced) {
      if (!satisfies(h, h.normal.dot(y), tol)) return false;
    }
    return true;
  };

  LpSolution out;
  bool found = false;
  Eigen::VectorXd best_y;
  double best_val = -kInf;

  if (rank == 0) {
    Eigen::VectorXd y0(0);
    if (feasible(y0)) {
      found = true;
      best_y = y0;
      best_val = 0.0;
    }
  } else if (reduced.size() >= rank) {
    std::vector<std::size_t> comb(rank);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    do {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(rank));
      Eigen::VectorXd r(static_cast<Eigen::Index>(rank));
      for (std::size_t k = 0; k < rank; ++k) {
        m.row(static_cast<Eigen::Index>(k)) = reduced[comb[k]].normal.transpose();
        r(static_cast<Eigen::Index>(k)) = reduced[comb[k]].rhs;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      lu.setThreshold(1e-10);
      if (lu.rank() < static_cast<Eigen::Index>(rank)) continue;
      const Eigen::VectorXd y = lu.solve(r);
      if (!feasible(y)) continue;
      const double val = c_red.dot(y);
      if (!found || val > best_val) {
        found = true;
        best_val = val;
        best_y = y;
      }
    } while (next_combination(comb, reduced.size()));
  }

  if (!found) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  if (objective_in_lineality) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  // Extreme rays of the recession cone: 1-dimensional null spaces of (rank-1) active sets.
  if (rank > 0) {
    const double ray_tol = 1e-9;
    std::vector<std::size_t> comb(rank - 1);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    bool more = reduced.size() >= rank - 1;
    while (more) {
      Eigen::VectorXd dir;
      if (rank == 1) {
        dir = Eigen::VectorXd::Ones(1);
      } else {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rank - 1), static_cast<Eigen::Index>(rank));
        for (std::size_t k = 0; k + 1 < rank; ++k) {
          m.row(static_cast<Eigen::Index>(k)) = reduced[comb[k]].normal.transpose();
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        lu.setThreshold(1e-10);
        const Eigen::MatrixXd ker = lu.kernel();
        if (ker.cols() == 1) dir = ker.col(0).normalized();
      }
      if (dir.size() == static_cast<Eigen::Index>(rank)) {
        for (double sign : {1.0, -1.0}) {
          const Eigen::VectorXd d = sign * dir;
          bool ok = true;
          for (const auto& h : reduced) {
            if (!in_cone(h, h.normal.dot(d), ray_tol)) {
              ok = false;
              break;
            }
          }
          if (ok && c_red.dot(d) > ray_tol) {
            out.status = LpStatus::Unbounded;
            return out;
          }
        }
      }
      more = rank > 1 && next_combination(comb, reduced.size());
    }
  }

  out.status = LpStatus::Optimal;
  const Eigen::VectorXd x = basis * best_y;
  out.x.assign(x.data(), x.data() + x.size());
  out.objective_value = dot(problem.objective, out.x);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json bound_to_json(double value) {
  if (std::isinf(value)) return nullptr;
  return value;
}

double bound_from_json(const nlohmann::json& value, double infinite_as) {
  if (value.is_null()) return infinite_as;
  if (!value.is_number()) throw ParseError("bound must be a number or null");
  return value.get<double>();
}

nlohmann::json to_json(const LpProblem& problem) {
  nlohmann::json doc;
  doc["maximize"] = problem.objective;
  auto cons = nlohmann::json::array();
  for (const auto& con : problem.constraints) {
    cons.push_back({{"row", con.row}, {"sense", std::string(to_string(con.sense))}, {"rhs", con.rhs}});
  }
  doc["constraints"] = std::move(cons);
  auto bds = nlohmann::json::array();
  for (const auto& bd : problem.bounds) bds.push_back({bound_to_json(bd.lo), bound_to_json(bd.hi)});
  doc["bounds"] = std::move(bds);
  return doc;
}

LpProblem lp_from_json(const nlohmann::json& doc) {
  try {
    LpProblem p;
    p.objective = doc.at("maximize").get<std::vector<double>>();
    const std::size_t n = p.objective.size();
    if (doc.contains("constraints")) {
      for (const auto& item : doc.at("constraints")) {
        Constraint con;
        con.row = item.at("row").get<std::vector<double>>();
        con.sense = sense_from_string(item.at("sense").get<std::string>());
        con.rhs = item.at("rhs").get<double>();
        p.constraints.push_back(std::move(con));
      }
    }
    if (doc.contains("bounds")) {
      for (const auto& item : doc.at("bounds")) {
        if (!item.is_array() || item.size() != 2) throw ParseError("each bound must be [lo, hi]");
        p.bounds.push_back({bound_from_json(item[0], -kInf), bound_from_json(item[1], kInf)});
      }
    } else {
      p.bounds.assign(n, Bound{});
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("LP JSON: ") + e.what());
  } catch (const DimensionMismatch& e) {
    throw ParseError(std::string("LP JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(std::string("LP JSON: ") + e.what());
  }
}

nlohmann::json to_json(const LpSolution& solution) {
  nlohmann::json doc;
  doc["status"] = std::string(to_string(solution.status));
  doc["x"] = solution.x;
  if (solution.status == LpStatus::Optimal) {
    doc["objective"] = solution.objective_value;
  } else {
    doc["objective"] = nullptr;
  }
  doc["iterations"] = solution.iterations;
  return doc;
}

}  // namespace postfeas
