#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "postfeas/errors.hpp"
#include "postfeas/scenario.hpp"
#include "postfeas/stats.hpp"

using namespace postfeas;

namespace {

Eigen::MatrixXd random_rows(Rng& rng, Eigen::Index m, Eigen::Index n) {
  Eigen::MatrixXd a(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = testing::uniform(rng, 0.5, 1.5);
  return a;
}

LpProblem product_mix(const std::vector<double>& p, double x_max) {
  LpProblem lp = make_problem(p.size());
  lp.objective = p;
  for (auto& b : lp.bounds) b = {0.0, x_max};
  return lp;
}

// Each draw has its own coefficients and right-hand side.
ScenarioSet random_full_scenarios(Rng& rng, Eigen::Index m, Eigen::Index n, std::size_t count) {
  ScenarioSet scen;
  scen.senses.assign(static_cast<std::size_t>(m), Sense::LessEqual);
  for (std::size_t k = 0; k < count; ++k) {
    ScenarioDraw d{random_rows(rng, m, n), Eigen::VectorXd(m)};
    for (Eigen::Index i = 0; i < m; ++i) d.rhs(i) = testing::uniform(rng, 8, 12);
    scen.draws.push_back(d);
  }
  return scen;
}

}  // namespace

TEST_CASE("required sample size reference values") {
  CHECK(required_sample_size(0.05, 0.05, 1) == 59);
  CHECK(required_sample_size(0.9, 0.5, 1) == 1);
  CHECK(required_sample_size(0.5, 0.5, 1) == 1);
  CHECK(std::pow(0.95, 59) <= 0.05);
  CHECK(std::pow(0.95, 58) > 0.05);
  CHECK_THROWS_AS(required_sample_size(0.0, 0.05, 1), DomainError);
  CHECK_THROWS_AS(required_sample_size(0.05, 1.0, 1), DomainError);
  CHECK_THROWS_AS(required_sample_size(0.05, 0.05, 0), DomainError);
}

TEST_CASE("required sample size is minimal") {
  for (double eps : {0.01, 0.05, 0.1, 0.3}) {
    for (double delta : {1e-9, 1e-3, 0.05, 0.4}) {
      for (std::uint64_t d : {1u, 2u, 5u, 18u, 50u}) {
        const std::uint64_t n = required_sample_size(eps, delta, d);
        INFO("eps=" << eps << " delta=" << delta << " d=" << d);
        CHECK(n >= d);
        CHECK(violation_bound(n, eps, d) <= delta);
        if (n > d) CHECK(violation_bound(n - 1, eps, d) > delta);
      }
    }
  }
}

TEST_CASE("required sample size monotonicity") {
  std::uint64_t prev = 0;
  for (double eps = 0.3; eps > 0.005; eps *= 0.8) {
    const std::uint64_t n = required_sample_size(eps, 0.05, 6);
    CHECK(n >= prev);
    prev = n;
  }
  prev = 0;
  for (double delta = 0.5; delta > 1e-12; delta *= 0.1) {
    const std::uint64_t n = required_sample_size(0.05, delta, 6);
    CHECK(n >= prev);
    prev = n;
  }
  prev = 0;
  for (std::uint64_t d = 1; d <= 40; ++d) {
    const std::uint64_t n = required_sample_size(0.05, 0.05, d);
    CHECK(n > prev);
    prev = n;
  }
}

TEST_CASE("violation bound edges") {
  CHECK(violation_bound(5, 0.1, 6) == 1.0);
  CHECK(violation_bound(10, 0.0, 1) == 1.0);
  CHECK(violation_bound(10, 1.0, 1) == 0.0);
  CHECK(violation_bound(59, 0.05, 1) == doctest::Approx(std::pow(0.95, 59)).epsilon(1e-13));
}

TEST_CASE("stacked rhs scenarios equal the componentwise minimum") {
  Rng rng(1, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index m = 3, n = 4;
    const Eigen::MatrixXd a = random_rows(rng, m, n);
    std::vector<Eigen::VectorXd> rhs;
    std::vector<std::vector<double>> rhs_vec;
    for (int k = 0; k < 120; ++k) {
      Eigen::VectorXd b(m);
      for (Eigen::Index i = 0; i < m; ++i) b(i) = 20.0 + 3.0 * sample_normal(rng);
      rhs.push_back(b);
      rhs_vec.emplace_back(b.data(), b.data() + m);
    }
    const ScenarioSet scen = make_rhs_scenarios(a, Sense::LessEqual, rhs, {1, 0});
    const LpProblem base = product_mix({3, 2, 4, 1}, 50.0);

    LpProblem tight = base;
    const auto bmin = rhs_scenario_min(rhs_vec);
    for (Eigen::Index i = 0; i < m; ++i) {
      std::vector<double> row(n);
      for (Eigen::Index j = 0; j < n; ++j) row[j] = a(i, j);
      tight.add(std::move(row), Sense::LessEqual, bmin[i]);
    }
    const double ref = solve_lp(tight).objective_value;
    for (bool prefilter : {false, true}) {
      for (bool lazy : {false, true}) {
        ScenarioSolveOptions opts;
        opts.prefilter = prefilter;
        opts.lazy = lazy;
        opts.lazy_threshold = 10;
        const ScenarioSolve res = solve_scenario_lp(base, scen, opts);
        REQUIRE(res.solution.status == LpStatus::Optimal);
        CHECK(std::abs(res.solution.objective_value - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
        CHECK(res.stacked_rows == 360);
        CHECK(max_scenario_residual(scen, res.solution.x) <= 1e-7);
      }
    }
    const LpSolution stacked = solve_lp(build_scenario_lp(base, scen));
    CHECK(std::abs(stacked.objective_value - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("solver options agree on full-row scenarios") {
  Rng rng(2, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const ScenarioSet scen = random_full_scenarios(rng, 3, 5, 150);
    const LpProblem base = product_mix({3, 2, 4, 1, 2.5}, 20.0);
    const double ref = solve_lp(build_scenario_lp(base, scen)).objective_value;
    for (bool prefilter : {false, true}) {
      for (bool lazy : {false, true}) {
        ScenarioSolveOptions opts;
        opts.prefilter = prefilter;
        opts.lazy = lazy;
        opts.lazy_threshold = 10;
        const ScenarioSolve res = solve_scenario_lp(base, scen, opts);
        CHECK(std::abs(res.solution.objective_value - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
        CHECK(res.kept_rows <= res.stacked_rows);
        CHECK(max_scenario_residual(scen, res.solution.x) <= 1e-7);
      }
    }
  }
}

TEST_CASE("more scenarios never raise the optimum") {
  Rng rng(3, 0);
  const ScenarioSet all = random_full_scenarios(rng, 2, 3, 400);
  const LpProblem base = product_mix({1, 2, 1.5}, 30.0);
  double prev = 1e300;
  for (std::size_t count : {1u, 5u, 20u, 50u, 100u, 200u, 400u}) {
    ScenarioSet sub = all;
    sub.draws.resize(count);
    const double obj = solve_scenario_lp(base, sub).solution.objective_value;
    CHECK(obj <= prev + 1e-9);
    prev = obj;
  }
}

TEST_CASE("scenario solutions meet the violation guarantee empirically") {
  // max x1 + x2 s.t. a^T x <= 1, a ~ N(mu, s^2 I), 0 <= x <= 10. Support rank
  // d = 2; the exact violation of a candidate x is 1 - Phi((1 - mu^T x) / (s |x|)).
  const double eps = 0.1, delta = 0.1;
  const std::uint64_t d = 2;
  const std::uint64_t n = required_sample_size(eps, delta, d);
  const Eigen::Vector2d mu(1.0, 0.6);
  const double s = 0.2;
  const LpProblem base = product_mix({1.0, 1.0}, 10.0);
  Rng rng(4, 0);
  const int reps = 500;
  int exceed = 0;
  for (int rep = 0; rep < reps; ++rep) {
    ScenarioSet scen;
    scen.senses = {Sense::LessEqual};
    for (std::uint64_t k = 0; k < n; ++k) {
      Eigen::MatrixXd row(1, 2);
      row << mu(0) + s * sample_normal(rng), mu(1) + s * sample_normal(rng);
      scen.draws.push_back({row, Eigen::VectorXd::Ones(1)});
    }
    const LpSolution sol = solve_scenario_lp(base, scen).solution;
    REQUIRE(sol.status == LpStatus::Optimal);
    const Eigen::Vector2d x(sol.x[0], sol.x[1]);
    const double v = 1.0 - normal_cdf((1.0 - mu.dot(x)) / (s * x.norm()));
    if (v > eps) ++exceed;
  }
  const double rate = static_cast<double>(exceed) / reps;
  CHECK(rate <= delta + 3.0 * std::sqrt(delta * (1 - delta) / reps));
}

TEST_CASE("scenario set validation and json round trip") {
  Rng rng(5, 0);
  ScenarioSet scen = random_full_scenarios(rng, 2, 3, 5);
  scen.source = {42, 7};
  const ScenarioSet back = scenario_set_from_json(to_json(scen));
  REQUIRE(back.size() == scen.size());
  CHECK(back.senses == scen.senses);
  CHECK(back.source.seed == 42);
  CHECK(back.source.stream_id == 7);
  for (std::size_t k = 0; k < scen.size(); ++k) {
    CHECK(back.draws[k].rows == scen.draws[k].rows);
    CHECK(back.draws[k].rhs == scen.draws[k].rhs);
  }
  CHECK_THROWS_AS(scen.validate(4), DimensionMismatch);
  CHECK_THROWS_AS(rhs_scenario_min({}), EmptyInput);
}
