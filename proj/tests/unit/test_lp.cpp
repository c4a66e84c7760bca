#include <doctest.h>

#include "helpers.hpp"
#include "postfeas/errors.hpp"
#include "postfeas/lp.hpp"

using namespace postfeas;

namespace {

LpProblem one_var(double rhs) {
  LpProblem lp = make_problem(1);
  lp.objective = {1.0};
  lp.add({1.0}, Sense::LessEqual, rhs);
  return lp;
}

void check_feasible(const LpProblem& lp, const LpSolution& sol) {
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(max_residual(lp, sol.x) <= 1e-8);
  CHECK(sol.objective_value == doctest::Approx(dot(lp.objective, sol.x)).epsilon(1e-12));
}

}  // namespace

TEST_CASE("single active bound") {
  const LpProblem lp = one_var(1.0);
  const LpSolution sol = solve_lp(lp);
  check_feasible(lp, sol);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.objective_value == doctest::Approx(1.0));
  const LpSolution bf = brute_force_lp(lp);
  CHECK(bf.status == LpStatus::Optimal);
  CHECK(bf.objective_value == doctest::Approx(1.0));
}

TEST_CASE("contradictory bounds are infeasible") {
  const LpProblem lp = one_var(-1.0);
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
  CHECK(brute_force_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded objective") {
  LpProblem lp = make_problem(2);
  lp.objective = {1.0, 1.0};
  lp.add({1.0, -1.0}, Sense::LessEqual, 1.0);
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
  CHECK(brute_force_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("degenerate square: value unique even if vertex is not") {
  LpProblem lp = make_problem(2);
  lp.objective = {1.0, 1.0};
  lp.add({1.0, 1.0}, Sense::LessEqual, 1.0);
  const LpSolution a = solve_lp(lp);
  const LpSolution b = brute_force_lp(lp);
  check_feasible(lp, a);
  CHECK(a.objective_value == doctest::Approx(1.0));
  CHECK(b.objective_value == doctest::Approx(1.0));
}

TEST_CASE("free and upper-only variables") {
  LpProblem lp = make_problem(3);
  lp.objective = {1.0, -1.0, 2.0};
  lp.bounds = {{-kInf, kInf}, {-kInf, 3.0}, {-1.0, 2.0}};
  lp.add({1.0, 1.0, 0.0}, Sense::LessEqual, 4.0);
  lp.add({1.0, 0.0, 0.0}, Sense::LessEqual, 2.5);
  lp.add({0.0, 1.0, 1.0}, Sense::GreaterEqual, -5.0);
  const LpSolution sol = solve_lp(lp);
  check_feasible(lp, sol);
  // x0 = 2.5, x1 = -7 (from x1 + x2 >= -5 with x2 = 2), x2 = 2
  CHECK(sol.objective_value == doctest::Approx(2.5 + 7.0 + 4.0));
  const LpSolution bf = brute_force_lp(lp);
  CHECK(bf.objective_value == doctest::Approx(sol.objective_value).epsilon(1e-9));
}

TEST_CASE("equality rows") {
  LpProblem lp = make_problem(3);
  lp.objective = {1.0, 2.0, 3.0};
  lp.add({1.0, 1.0, 1.0}, Sense::Equal, 1.0);
  lp.add({0.0, 0.0, 1.0}, Sense::LessEqual, 0.25);
  const LpSolution sol = solve_lp(lp);
  check_feasible(lp, sol);
  CHECK(sol.objective_value == doctest::Approx(0.75 * 2.0 + 0.25 * 3.0));
}

TEST_CASE("standardize adds slacks only for inequalities") {
  LpProblem lp = make_problem(2);
  lp.add({1.0, 1.0}, Sense::LessEqual, 1.0);
  lp.add({1.0, -1.0}, Sense::Equal, 0.0);
  lp.add({1.0, 0.0}, Sense::GreaterEqual, 0.1);
  const StandardFormLp sf = standardize(lp);
  CHECK(sf.rows == 3);
  REQUIRE(sf.slack_col.size() == 3);
  CHECK(sf.slack_col[0] != StandardFormLp::npos);
  CHECK(sf.slack_col[1] == StandardFormLp::npos);
  CHECK(sf.slack_col[2] != StandardFormLp::npos);
  CHECK(sf.upper[sf.slack_col[0]] == kInf);
  CHECK(sf.at(0, sf.slack_col[0]) == 1.0);
  CHECK(sf.at(2, sf.slack_col[2]) == -1.0);
  CHECK(sf.cols == 4);
}

TEST_CASE("standardize round trip recovers original-space points") {
  Rng rng(7, 1);
  for (int trial = 0; trial < 50; ++trial) {
    LpProblem lp = testing::random_box_lp(rng, 1 + testing::pick(rng, 4), 1 + testing::pick(rng, 5));
    // Mix in free and upper-only variables.
    if (trial % 3 == 0) lp.bounds[0] = {-kInf, lp.bounds[0].hi};
    if (trial % 5 == 0) lp.bounds.back() = {-kInf, kInf};
    const StandardFormLp sf = standardize(lp);
    std::vector<double> x(lp.num_vars());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const Bound b = lp.bounds[j];
      const double lo = std::isfinite(b.lo) ? b.lo : (std::isfinite(b.hi) ? b.hi - 3 : -1.5);
      const double hi = std::isfinite(b.hi) ? b.hi : lo + 3;
      x[j] = testing::uniform(rng, lo, hi);
    }
    // Build y from x and check recover(y) == x and A y == b.
    std::vector<double> y(sf.cols, 0.0);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const auto& vm = sf.var_map[j];
      switch (vm.kind) {
        case StandardFormLp::Map::Shift: y[vm.col] = x[j] - vm.offset; break;
        case StandardFormLp::Map::NegatedShift: y[vm.col] = vm.offset - x[j]; break;
        case StandardFormLp::Map::Split:
          y[vm.col] = std::max(0.0, x[j]);
          y[vm.col_neg] = std::max(0.0, -x[j]);
          break;
      }
    }
    const auto back = sf.recover(y);
    for (std::size_t j = 0; j < x.size(); ++j) CHECK(back[j] == doctest::Approx(x[j]).epsilon(1e-12));
    // Objective offset consistency.
    double obj_sf = sf.objective_offset;
    for (std::size_t k = 0; k < sf.cols; ++k) obj_sf += sf.c[k] * y[k];
    CHECK(obj_sf == doctest::Approx(dot(lp.objective, x)).epsilon(1e-12));
  }
}

TEST_CASE("solve_lp agrees with vertex enumeration on 200 random instances") {
  Rng rng(2024, 11);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + testing::pick(rng, 4);
    const std::size_t m = 1 + testing::pick(rng, 6);
    const LpProblem lp = testing::random_box_lp(rng, n, m);
    const LpSolution a = solve_lp(lp);
    const LpSolution b = brute_force_lp(lp);
    INFO("trial " << trial);
    REQUIRE(a.status == b.status);
    if (a.status == LpStatus::Optimal) {
      ++optimal;
      CHECK(max_residual(lp, a.x) <= 1e-8);
      CHECK(std::abs(a.objective_value - b.objective_value) <= 1e-6);
    } else {
      ++infeasible;
    }
  }
  CHECK(optimal > 50);
  CHECK(infeasible > 5);
}

TEST_CASE("unbounded detection agrees with the recession-ray oracle") {
  Rng rng(99, 3);
  int unbounded = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + testing::pick(rng, 3);
    LpProblem lp = testing::random_box_lp(rng, n, 1 + testing::pick(rng, 3));
    for (auto& b : lp.bounds) {
      if (rng.uniform() < 0.5) b.hi = kInf;
      if (rng.uniform() < 0.2) b.lo = -kInf;
    }
    const LpSolution a = solve_lp(lp);
    const LpSolution b = brute_force_lp(lp);
    INFO("trial " << trial);
    REQUIRE(a.status == b.status);
    if (a.status == LpStatus::Unbounded) ++unbounded;
    if (a.status == LpStatus::Optimal) CHECK(std::abs(a.objective_value - b.objective_value) <= 1e-6);
  }
  CHECK(unbounded > 10);
}

TEST_CASE("scaling the objective keeps x and scales the value") {
  Rng rng(5, 5);
  for (int trial = 0; trial < 30; ++trial) {
    LpProblem lp = testing::random_box_lp(rng, 4, 5);
    const LpSolution a = solve_lp(lp);
    if (a.status != LpStatus::Optimal) continue;
    for (auto& c : lp.objective) c *= 4.0;  // power of two keeps arithmetic exact
    const LpSolution b = solve_lp(lp);
    REQUIRE(b.status == LpStatus::Optimal);
    CHECK(a.x == b.x);
    CHECK(b.objective_value == doctest::Approx(4.0 * a.objective_value).epsilon(1e-12));
  }
}

TEST_CASE("solver is deterministic") {
  Rng rng(8, 8);
  const LpProblem lp = testing::random_box_lp(rng, 4, 6);
  CHECK(to_json(solve_lp(lp)).dump() == to_json(solve_lp(lp)).dump());
}

TEST_CASE("degenerate LP with many ties terminates") {
  // Klee-Minty-like degenerate stack: many constraints through the origin.
  LpProblem lp = make_problem(4);
  lp.objective = {1, 1, 1, 1};
  for (int k = 0; k < 30; ++k) {
    const double t = 0.1 * k;
    lp.add({1.0, -t, t, -1.0}, Sense::LessEqual, 0.0);
    lp.add({-t, 1.0, -1.0, t}, Sense::LessEqual, 0.0);
  }
  lp.add({1, 1, 1, 1}, Sense::LessEqual, 10.0);
  const LpSolution sol = solve_lp(lp);
  check_feasible(lp, sol);
  CHECK(sol.objective_value == doctest::Approx(10.0));
}

TEST_CASE("larger stacked LP stays feasible") {
  Rng rng(31, 2);
  LpProblem lp = make_problem(18);
  for (auto& c : lp.objective) c = testing::uniform(rng, 1, 5);
  for (auto& b : lp.bounds) b = {0.0, 50.0};
  for (int i = 0; i < 300; ++i) {
    std::vector<double> row(18);
    for (auto& v : row) v = testing::uniform(rng, 0.5, 1.5);
    lp.add(std::move(row), Sense::LessEqual, testing::uniform(rng, 40, 80));
  }
  const LpSolution sol = solve_lp(lp);
  check_feasible(lp, sol);
}

TEST_CASE("JSON round trip is bit exact") {
  Rng rng(3, 4);
  LpProblem lp = testing::random_box_lp(rng, 3, 4);
  lp.bounds[1] = {-kInf, kInf};
  lp.bounds[2].hi = kInf;
  const auto doc = to_json(lp);
  const LpProblem back = lp_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back.objective == lp.objective);
  REQUIRE(back.constraints.size() == lp.constraints.size());
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    CHECK(back.constraints[i].row == lp.constraints[i].row);
    CHECK(back.constraints[i].rhs == lp.constraints[i].rhs);
    CHECK(back.constraints[i].sense == lp.constraints[i].sense);
  }
  for (std::size_t j = 0; j < lp.bounds.size(); ++j) {
    CHECK(back.bounds[j].lo == lp.bounds[j].lo);
    CHECK(back.bounds[j].hi == lp.bounds[j].hi);
  }
  CHECK(doc["bounds"][1][0].is_null());
}

TEST_CASE("validation errors") {
  LpProblem lp = make_problem(2);
  CHECK_THROWS_AS(lp.add({1.0}, Sense::LessEqual, 1.0), DimensionMismatch);
  lp.bounds[0] = {2.0, 1.0};
  CHECK_THROWS_AS(solve_lp(lp), DomainError);
  LpProblem nan = make_problem(1);
  nan.objective[0] = std::nan("");
  CHECK_THROWS_AS(solve_lp(nan), DomainError);
  CHECK_THROWS_AS(lp_from_json(nlohmann::json::parse(R"({"maximize": [1], "constraints": [{"row": [1, 2], "sense": "<=", "rhs": 1}]})")),
                  ParseError);
  CHECK_THROWS_AS(sense_from_string("<"), ParseError);
}

TEST_CASE("brute force guard") {
  LpProblem lp = make_problem(7);
  CHECK_THROWS_AS(brute_force_lp(lp), SizeLimitExceeded);
  LpProblem wide = make_problem(3);
  for (int i = 0; i < 22; ++i) wide.add({1, 1, 1}, Sense::LessEqual, 1.0 + i);
  CHECK_THROWS_AS(brute_force_lp(wide), SizeLimitExceeded);
}
