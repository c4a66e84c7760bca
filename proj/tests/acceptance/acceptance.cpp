// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   acceptance [--cli PATH] [N ...]     (no N: run all)

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "postfeas/certify.hpp"
#include "postfeas/errors.hpp"
#include "postfeas/io.hpp"
#include "postfeas/lp.hpp"
#include "postfeas/panel.hpp"
#include "postfeas/robustify.hpp"
#include "postfeas/scenario.hpp"
#include "postfeas/simulation.hpp"
#include "postfeas/stats.hpp"

namespace fs = std::filesystem;
using namespace postfeas;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

fs::path g_cli;

// Shared by criteria 3-5: default distributions, 30 trials per alpha.
const BenchmarkResult& benchmark_30() {
  static const BenchmarkResult res = [] {
    SimConfig cfg;
    cfg.trials_per_alpha = 30;
    return run_benchmark(cfg, 1);
  }();
  return res;
}

double mean_vtrue(const BenchmarkResult& res, Method m, double alpha) {
  for (const auto& row : res.by_alpha) {
    if (row.method == m && std::abs(row.alpha - alpha) < 1e-12) return row.vtrue_mean;
  }
  throw std::runtime_error("missing summary row");
}

Outcome c1_clopper_pearson() {
  const double ub = clopper_pearson_upper(82, 4000, 0.05);
  return {std::abs(ub - 0.024582) <= 1e-5, "upper_bound(82, 4000, 0.05) = " + fmt("%.6f", ub) + " (expected 0.024582)"};
}

Outcome c2_scenario_size() {
  const std::uint64_t a = required_sample_size(0.05, 0.05, 1);
  const std::uint64_t b = required_sample_size(0.5, 0.5, 1);
  const bool min_a = violation_bound(a, 0.05, 1) <= 0.05 && violation_bound(a - 1, 0.05, 1) > 0.05;
  const bool min_b = violation_bound(b, 0.5, 1) <= 0.5 && (b == 1 || violation_bound(b - 1, 0.5, 1) > 0.5);
  return {a == 59 && b == 1 && min_a && min_b,
          "N(0.05, 0.05, 1) = " + std::to_string(a) + ", N(0.5, 0.5, 1) = " + std::to_string(b) +
              ", minimal: " + (min_a && min_b ? "yes" : "no")};
}

Outcome c3_plugin_danger() {
  const double v = mean_vtrue(benchmark_30(), Method::PM, 0.05);
  return {v >= 0.8, "mean v_true(PM) at alpha 0.05 = " + fmt("%.4f", v) + " (need >= 0.8)"};
}

Outcome c4_hedged_calibration() {
  const auto& res = benchmark_30();
  bool ok = true;
  std::string detail;
  for (double alpha : {0.05, 0.10}) {
    for (Method m : {Method::PS, Method::CR}) {
      const double v = mean_vtrue(res, m, alpha);
      ok = ok && v <= alpha;
      detail += std::string(to_string(m)) + "@" + fmt("%.2f", alpha) + "=" + fmt("%.4f", v) + " ";
    }
  }
  return {ok, detail + "(need <= alpha)"};
}

Outcome c5_profit_sacrifice() {
  const auto& res = benchmark_30();
  std::map<Method, double> profit;
  for (const auto& row : res.overall) profit[row.method] = row.profit_mean;
  bool ok = true;
  std::string detail = "PM " + fmt("%.1f", profit[Method::PM]) + ";";
  for (Method m : {Method::CR, Method::PS, Method::FPQ, Method::RB}) {
    const double ratio = profit[Method::PM] / profit[m];
    ok = ok && ratio >= 1.2;
    detail += " PM/" + std::string(to_string(m)) + "=" + fmt("%.3f", ratio);
  }
  return {ok, detail + " (need >= 1.2)"};
}

Outcome c6_credible_region() {
  const double alpha = 0.1;
  const std::uint64_t m_cert = 5000;
  const double limit = alpha + 3.0 * std::sqrt(alpha * (1 - alpha) / static_cast<double>(m_cert));
  int pass = 0;
  const int instances = 50;
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    Rng rng(derive_stream(2024, static_cast<std::uint64_t>(k), "acceptance-instance"), 0);
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 3);
    const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 4);
    LpProblem base = make_problem(n);
    for (std::size_t j = 0; j < n; ++j) {
      base.objective[j] = uniform(rng, 1, 3);
      base.bounds[j] = {0.0, 20.0};
    }
    std::vector<UncertainRow> rows;
    std::vector<Eigen::VectorXd> centers;
    std::vector<Eigen::MatrixXd> covs;
    const auto dim = static_cast<Eigen::Index>(n + 1);
    for (std::size_t i = 0; i < m; ++i) {
      Eigen::VectorXd c(dim);
      for (Eigen::Index j = 0; j + 1 < dim; ++j) c(j) = uniform(rng, 0.5, 1.5);
      c(dim - 1) = uniform(rng, 8, 12);
      Eigen::MatrixXd g(dim, dim);
      for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index s = 0; s < dim; ++s) g(r, s) = uniform(rng, -1, 1);
      const double scale = uniform(rng, 0.005, 0.05);
      Eigen::MatrixXd cov = scale * (g * g.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim));
      cov(dim - 1, dim - 1) += uniform(rng, 0.1, 1.0);
      rows.push_back({c, cov});
      centers.push_back(c);
      covs.push_back(cov);
    }
    const RobustSolve sol = solve_robust_cutting_planes(robustify_rows(base, rows, alpha));
    if (sol.solution.status != LpStatus::Optimal) continue;
    const GaussianRowModel model(centers, covs);
    Rng crng = make_stream(2024, static_cast<std::uint64_t>(k), "certify");
    const Certificate cert = certify(sol.solution.x, model, m_cert, 0.05, crng);
    worst = std::max(worst, cert.v_hat);
    if (cert.v_hat <= limit) ++pass;
  }
  const double share = static_cast<double>(pass) / instances;
  return {share >= 0.95, std::to_string(pass) + "/" + std::to_string(instances) + " instances with v_hat <= " +
                             fmt("%.4f", limit) + " (max v_hat " + fmt("%.4f", worst) + ", need >= 95%)"};
}

Outcome c7_oracles() {
  // (a) simplex vs vertex enumeration
  Rng rng(7001, 0);
  int agree_a = 0;
  double worst_a = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    LpProblem lp = make_problem(n);
    for (std::size_t j = 0; j < n; ++j) {
      lp.objective[j] = uniform(rng, -3, 3);
      const double lo = uniform(rng, -2, 1);
      lp.bounds[j] = {lo, lo + uniform(rng, 0.5, 4)};
    }
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> row(n);
      for (auto& v : row) v = uniform(rng, -2, 2);
      const double u = rng.uniform();
      lp.add(std::move(row), u < 0.6 ? Sense::LessEqual : (u < 0.9 ? Sense::GreaterEqual : Sense::Equal),
             uniform(rng, -2, 3));
    }
    const LpSolution s = solve_lp(lp);
    const LpSolution b = brute_force_lp(lp);
    if (s.status != b.status) continue;
    if (s.status == LpStatus::Optimal) {
      const double d = std::abs(s.objective_value - b.objective_value);
      worst_a = std::max(worst_a, d);
      if (d > 1e-6) continue;
    }
    ++agree_a;
  }
  // (b) stacked scenario LP vs min-RHS LP
  int agree_b = 0;
  double worst_b = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.uniform() * 4);
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 5);
    Eigen::MatrixXd a(m, static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = uniform(rng, 0.5, 1.5);
    std::vector<Eigen::VectorXd> draws;
    std::vector<std::vector<double>> draws_vec;
    for (int s = 0; s < 100; ++s) {
      Eigen::VectorXd b(m);
      for (Eigen::Index i = 0; i < m; ++i) b(i) = 30.0 + 4.0 * sample_normal(rng);
      draws.push_back(b);
      draws_vec.emplace_back(b.data(), b.data() + m);
    }
    LpProblem base = make_problem(n);
    for (std::size_t j = 0; j < n; ++j) {
      base.objective[j] = uniform(rng, 1, 5);
      base.bounds[j] = {0.0, 50.0};
    }
    const ScenarioSet scen = make_rhs_scenarios(a, Sense::LessEqual, draws, {7002, static_cast<std::uint64_t>(k)});
    const double stacked = solve_lp(build_scenario_lp(base, scen)).objective_value;
    LpProblem tight = base;
    const auto bmin = rhs_scenario_min(draws_vec);
    for (Eigen::Index i = 0; i < m; ++i) {
      std::vector<double> row(n);
      for (std::size_t j = 0; j < n; ++j) row[j] = a(i, static_cast<Eigen::Index>(j));
      tight.add(std::move(row), Sense::LessEqual, bmin[static_cast<std::size_t>(i)]);
    }
    const double d = std::abs(stacked - solve_lp(tight).objective_value);
    worst_b = std::max(worst_b, d);
    if (d <= 1e-8) ++agree_b;
  }
  // (c) support function vs 1e5-point boundary search
  int agree_c = 0;
  double worst_c = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Vector2d c(uniform(rng, -3, 3), uniform(rng, -3, 3));
    Eigen::Matrix2d g;
    g << uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1);
    const Eigen::Matrix2d cov = g * g.transpose() + 0.05 * Eigen::Matrix2d::Identity();
    const double radius = uniform(rng, 0.5, 3);
    const Eigen::Vector2d z(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(cov).matrixL();
    double best = -1e300;
    for (int t = 0; t < 100000; ++t) {
      const double th = 2.0 * M_PI * rng.uniform();
      best = std::max(best, (c + radius * l * Eigen::Vector2d(std::cos(th), std::sin(th))).dot(z));
    }
    const double sup = soc_support(Ellipsoid::from_covariance(c, cov, radius), z).value;
    const double gap = sup - best;
    worst_c = std::max(worst_c, std::abs(gap));
    if (gap >= -1e-12 && gap <= 1e-4) ++agree_c;
  }
  const bool ok = agree_a == 200 && agree_b == 50 && agree_c == 50;
  return {ok, "(a) " + std::to_string(agree_a) + "/200 max|d| " + fmt("%.1e", worst_a) + "; (b) " +
                  std::to_string(agree_b) + "/50 max|d| " + fmt("%.1e", worst_b) + "; (c) " + std::to_string(agree_c) +
                  "/50 max gap " + fmt("%.1e", worst_c)};
}

Outcome c8_binomial_law() {
  const std::uint64_t m = 20;
  const int reps = 5000;
  bool ok = true;
  std::string detail;
  for (double p : {0.05, 0.3}) {
    Rng rng = make_stream(8000, static_cast<std::uint64_t>(p * 1000), "acceptance-binomial-law");
    const std::vector<double> x{0.0};
    std::vector<double> observed(m + 1, 0.0);
    for (int r = 0; r < reps; ++r) {
      const ViolationCount c = estimate_violation(
          x, [&](std::span<const double>, double u, std::span<double> g) { g[0] = p - u; },
          [](Rng& rr) { return rr.uniform(); }, 1, m, rng);
      observed[c.violations] += 1.0;
    }
    // Pearson statistic with adjacent cells pooled until the expected count is >= 5.
    double stat = 0.0, eo = 0.0, ee = 0.0;
    int cells = 0;
    for (std::uint64_t k = 0; k <= m; ++k) {
      const double pk = std::exp(log_gamma(m + 1.0) - log_gamma(k + 1.0) - log_gamma(m - k + 1.0) +
                                 k * std::log(p) + (m - k) * std::log1p(-p));
      eo += observed[k];
      ee += reps * pk;
      if (ee >= 5.0 && k < m) {
        stat += (eo - ee) * (eo - ee) / ee;
        ++cells;
        eo = ee = 0.0;
      }
    }
    if (ee > 0.0) {
      stat += (eo - ee) * (eo - ee) / ee;
      ++cells;
    }
    const double crit = chi2_quantile(0.99, cells - 1);
    ok = ok && stat < crit;
    detail += "p=" + fmt("%.2f", p) + ": chi2=" + fmt("%.2f", stat) + " < " + fmt("%.2f", crit) + " (df " +
              std::to_string(cells - 1) + "); ";
  }
  return {ok, detail};
}

double exact_tail(unsigned n, unsigned num, unsigned den, unsigned d) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  const cpp_rational eps = cpp_rational(cpp_int(num)) / cpp_rational(cpp_int(den));
  const cpp_rational q = 1 - eps;
  cpp_rational sum = 0;
  cpp_int binom = 1;
  for (unsigned j = 0; j < d && j <= n; ++j) {
    cpp_rational term(binom);
    for (unsigned k = 0; k < j; ++k) term *= eps;
    for (unsigned k = 0; k < n - j; ++k) term *= q;
    sum += term;
    binom = binom * (n - j) / (j + 1);
  }
  return static_cast<double>(sum);
}

Outcome c9_special_functions() {
  const std::vector<double> ps{1e-6, 1e-3, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999};
  double beta_err = 0.0, chi_err = 0.0, t_err = 0.0, tail_err = 0.0;
  for (double a : {0.5, 1.0, 2.5, 10.0, 50.0, 300.0, 4000.0}) {
    for (double b : {0.5, 1.0, 2.5, 10.0, 50.0, 300.0, 4000.0}) {
      for (double p : ps) beta_err = std::max(beta_err, std::abs(reg_inc_beta(beta_quantile(p, a, b), a, b) - p));
    }
  }
  for (double df : {1.0, 2.0, 3.0, 5.0, 10.0, 19.0, 50.0, 126.0, 500.0}) {
    for (double p : ps) {
      const double q = chi2_quantile(p, df);
      const double back = p > 0.5 ? 1.0 - reg_inc_gamma_upper(df / 2, q / 2) : chi2_cdf(q, df);
      chi_err = std::max(chi_err, std::abs(back - p));
    }
  }
  for (double dof : {1.0, 2.0, 3.0, 5.0, 10.0, 30.0, 84.0, 200.0}) {
    for (double p : ps) t_err = std::max(t_err, std::abs(student_t_cdf(student_t_quantile(p, dof), dof) - p));
  }
  for (unsigned n = 1; n <= 30; ++n) {
    for (unsigned d = 1; d <= n + 1; ++d) {
      for (unsigned num : {1u, 5u, 13u, 50u, 77u}) {
        tail_err = std::max(tail_err, std::abs(binomial_tail(n, num / 100.0, d) - exact_tail(n, num, 100, d)));
      }
    }
  }
  const bool ok = beta_err <= 1e-10 && chi_err <= 1e-9 && t_err <= 1e-9 && tail_err <= 1e-12;
  return {ok, "beta " + fmt("%.1e", beta_err) + " (<=1e-10), chi2 " + fmt("%.1e", chi_err) + " (<=1e-9), t " +
                  fmt("%.1e", t_err) + " (<=1e-9), binomial_tail " + fmt("%.1e", tail_err) + " (<=1e-12)"};
}

struct PanelFixture {
  DetectionData data;
  std::vector<double> weights;
  PanelConfig cfg;
  BetaPosteriorMatrix post;
};

PanelFixture load_panel(const std::string& name) {
  const fs::path dir = fs::path(POSTFEAS_TEST_DATA) / name;
  PanelFixture f;
  f.data = load_detections(read_csv(dir / "detections.csv"), read_csv(dir / "clusters.csv"));
  f.weights = load_weights(read_csv(dir / "weights.csv"), f.data.genes);
  f.cfg = panel_config_from_json(read_json(dir / "panel.json"));
  f.post = fit_beta_binomial(f.data.detections, f.data.cluster_sizes, f.cfg.prior_a, f.cfg.prior_b);
  return f;
}

Outcome c10_panel() {
  const double tau_feas = 1e-8;
  const PanelFixture syn = load_panel("panel_synth");
  const PanelResult r = panel_select(syn.weights, syn.post, syn.data.genes, syn.data.clusters, syn.cfg);
  const double resid = max_scenario_residual(r.scenarios, r.relaxed_x);
  const bool syn_ok = r.panel.size() == syn.cfg.budget && resid <= tau_feas &&
                      r.certificate.v_hat <= r.certificate.upper_bound;

  const PanelFixture adv = load_panel("panel_adversarial");
  const PanelResult ra = panel_select(adv.weights, adv.post, adv.data.genes, adv.data.clusters, adv.cfg);
  const auto low = std::count_if(ra.panel_genes.begin(), ra.panel_genes.end(),
                                 [](const std::string& g) { return g.front() == 'L'; });
  double worst_c2 = 1e300;
  for (const auto& draw : ra.scenarios.draws) {
    double cov = 0.0;
    for (Eigen::Index g = 0; g < draw.rows.cols(); ++g) cov += draw.rows(1, g) * ra.relaxed_x[g];
    worst_c2 = std::min(worst_c2, cov);
  }
  const double l = adv.cfg.threshold;
  const bool binds = worst_c2 >= l - tau_feas && worst_c2 <= l + 1e-6;
  const bool adv_ok = ra.panel.size() == adv.cfg.budget && low >= 1 && binds;
  return {syn_ok && adv_ok,
          "synthetic: |panel| " + std::to_string(r.panel.size()) + ", max scenario residual " + fmt("%.1e", resid) +
              ", v_hat " + fmt("%.4f", r.certificate.v_hat) + " <= ub " + fmt("%.4f", r.certificate.upper_bound) +
              "; adversarial: " + std::to_string(low) + " cluster-2 genes selected, min C2 coverage " +
              fmt("%.6f", worst_c2) + " vs L " + fmt("%.1f", l)};
}

Outcome c11_determinism() {
  if (g_cli.empty()) return {false, "no --cli path given"};
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  SimConfig cfg;
  cfg.trials_per_alpha = 30;
  write_json(root / "sim.json", to_json(cfg));
  for (const char* run : {"a", "b"}) {
    const std::string cmd = "\"" + g_cli.string() + "\" sim --config \"" + (root / "sim.json").string() +
                            "\" --seed 42 --out \"" + (root / run).string() + "\" > \"" +
                            (root / (std::string(run) + ".log")).string() + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("sim run ") + run + " failed"};
  }
  std::string detail;
  bool ok = true;
  for (const char* file : {"by_alpha.csv", "overall.csv", "trials.csv"}) {
    const std::string a = read_text(root / "a" / file);
    const std::string b = read_text(root / "b" / file);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += std::string(file) + (same ? " identical (" + std::to_string(a.size()) + " bytes); " : " DIFFERS; ");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"clopper-pearson reference value", c1_clopper_pearson},
      {"scenario sizing closed form", c2_scenario_size},
      {"plug-in danger", c3_plugin_danger},
      {"hedged calibration", c4_hedged_calibration},
      {"profit sacrifice", c5_profit_sacrifice},
      {"credible-region feasibility", c6_credible_region},
      {"oracle equivalences", c7_oracles},
      {"exact binomial certification law", c8_binomial_law},
      {"special-function precision", c9_special_functions},
      {"panel pipeline", c10_panel},
      {"simulation determinism", c11_determinism},
  };
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else {
      const int k = std::atoi(arg.c_str());
      if (k < 1 || k > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "unknown criterion '%s'\n", arg.c_str());
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(k));
    }
  }
  if (selected.empty()) {
    selected.resize(criteria.size());
    std::iota(selected.begin(), selected.end(), std::size_t{1});
  }
  int failures = 0;
  for (std::size_t k : selected) {
    const auto& [name, fn] = criteria[k - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s [%.2fs]\n", out.ok ? "PASS" : "FAIL", k, name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
