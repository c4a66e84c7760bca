// postfeas command-line tool.
//
// Exit codes: 0 ok, 1 other failure, 2 parse/domain error, 3 infeasible,
// 4 unbounded, 5 numerical breakdown.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "postfeas/certify.hpp"
#include "postfeas/errors.hpp"
#include "postfeas/io.hpp"
#include "postfeas/lp.hpp"
#include "postfeas/panel.hpp"
#include "postfeas/robustify.hpp"
#include "postfeas/scenario.hpp"
#include "postfeas/simulation.hpp"
#include "postfeas/stats.hpp"
#include "postfeas/svg.hpp"
#include "postfeas/version.hpp"

namespace fs = std::filesystem;
using namespace postfeas;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kParse = 2, kInfeasible = 3, kUnbounded = 4, kBreakdown = 5 };

struct Manifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const fs::path& path) const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::json doc{{"command", command},
                       {"config", config},
                       {"master_seed", seed},
                       {"version", kVersion},
                       {"outputs", outputs},
                       {"duration_seconds", secs}};
    write_json(path, doc);
  }
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("postfeas");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("POSTFEAS_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

std::string fmt_vec(const std::vector<double>& x) {
  std::string s = "[";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_real(x[i], 8);
  return s + "]";
}

fs::path manifest_near(const fs::path& output) {
  return output.has_parent_path() ? output.parent_path() / "manifest.json" : fs::path("manifest.json");
}

int status_exit(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return kOk;
    case LpStatus::Infeasible: return kInfeasible;
    case LpStatus::Unbounded: return kUnbounded;
  }
  return kFailure;
}

void print_solution(const LpSolution& sol) {
  std::printf("status: %s\n", std::string(to_string(sol.status)).c_str());
  if (sol.status == LpStatus::Optimal) {
    std::printf("objective: %s\n", format_real(sol.objective_value, 10).c_str());
    std::printf("x: %s\n", fmt_vec(sol.x).c_str());
  }
}

// ---- solve ---------------------------------------------------------------

struct SolveArgs {
  std::string problem;
  std::string out = "solution.json";
};

int cmd_solve(const SolveArgs& a) {
  Manifest man;
  man.command = "solve";
  man.config = {{"problem", a.problem}, {"out", a.out}};
  const LpProblem lp = lp_from_json(read_json(a.problem));
  spdlog::info("solving LP with {} variables and {} constraints", lp.num_vars(), lp.constraints.size());
  const LpSolution sol = solve_lp(lp);
  write_json(a.out, to_json(sol));
  man.outputs.push_back(a.out);
  print_solution(sol);
  man.write(manifest_near(a.out));
  return status_exit(sol.status);
}

// ---- robustify -----------------------------------------------------------

struct RobustifyArgs {
  std::string problem;
  double alpha = 0.05;
  std::string out = "solution.json";
};

int cmd_robustify(const RobustifyArgs& a) {
  Manifest man;
  man.command = "robustify";
  man.config = {{"problem", a.problem}, {"alpha", a.alpha}, {"out", a.out}};
  const nlohmann::json doc = read_json(a.problem);
  RobustLp rlp;
  if (doc.contains("robust_rows")) {
    rlp = robust_lp_from_json(doc);
  } else {
    const LpProblem base = lp_from_json(doc);
    std::vector<UncertainRow> rows;
    try {
      for (const auto& item : doc.at("uncertain_rows")) {
        const auto c = item.at("center").get<std::vector<double>>();
        const auto cov = item.at("cov").get<std::vector<std::vector<double>>>();
        UncertainRow row;
        row.center = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        row.cov.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(c.size()));
        for (std::size_t i = 0; i < cov.size(); ++i) {
          if (cov[i].size() != c.size()) throw ParseError("uncertain row cov must be (n+1) x (n+1)");
          for (std::size_t j = 0; j < c.size(); ++j) {
            row.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov[i][j];
          }
        }
        rows.push_back(std::move(row));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("robustify input: ") + e.what());
    }
    rlp = robustify_rows(base, rows, a.alpha);
  }
  const RobustSolve res = solve_robust_cutting_planes(rlp);
  spdlog::info("cutting planes: {} rounds, {} cuts", res.log.rounds, res.log.cuts);
  nlohmann::json out = to_json(res.solution);
  out["rounds"] = res.log.rounds;
  out["cuts"] = res.log.cuts;
  out["max_support"] = res.log.max_support;
  write_json(a.out, out);
  const fs::path robust_path = fs::path(a.out).parent_path() / "robust_lp.json";
  write_json(robust_path, to_json(rlp));
  man.outputs = {a.out, robust_path.string()};
  print_solution(res.solution);
  man.write(manifest_near(a.out));
  return status_exit(res.solution.status);
}

// ---- scenario-size -------------------------------------------------------

struct SizeArgs {
  double eps = 0.05;
  double delta = 0.05;
  std::uint64_t d = 1;
  std::string manifest = "manifest.json";
};

int cmd_scenario_size(const SizeArgs& a) {
  Manifest man;
  man.command = "scenario-size";
  man.config = {{"eps", a.eps}, {"delta", a.delta}, {"d", a.d}};
  const std::uint64_t n = required_sample_size(a.eps, a.delta, a.d);
  const double bound = violation_bound(n, a.eps, a.d);
  std::printf("N: %llu\n", static_cast<unsigned long long>(n));
  std::printf("bound: %s\n", format_real(bound, 12).c_str());
  if (n > a.d) {
    const double prev = violation_bound(n - 1, a.eps, a.d);
    std::printf("bound(N-1): %s (%s delta)\n", format_real(prev, 12).c_str(), prev > a.delta ? ">" : "<=");
  } else {
    std::printf("bound(N-1): 1 (N-1 < d)\n");
  }
  man.write(a.manifest);
  return kOk;
}

// ---- certify -------------------------------------------------------------

struct CertifyArgs {
  std::string solution;
  std::string model;
  std::uint64_t m = 5000;
  double beta = 0.05;
  std::uint64_t seed = 42;
  std::int64_t s = -1;  // replay mode when >= 0
  std::string out = "certificate.json";
};

int cmd_certify(const CertifyArgs& a) {
  Manifest man;
  man.command = "certify";
  man.seed = a.seed;
  man.config = {{"M", a.m}, {"beta", a.beta}, {"out", a.out}};
  Certificate cert;
  if (a.s >= 0) {
    man.config["s"] = a.s;
    ViolationCount count;
    count.draws = a.m;
    count.violations = static_cast<std::uint64_t>(a.s);
    if (count.violations > count.draws) throw DomainError("--s must not exceed --M");
    cert = make_certificate(count, a.beta);
  } else {
    if (a.solution.empty() || a.model.empty()) throw ParseError("certify needs --solution and --model (or --s)");
    man.config["solution"] = a.solution;
    man.config["model"] = a.model;
    const nlohmann::json sol = read_json(a.solution);
    std::vector<double> x;
    try {
      x = sol.at("x").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("solution JSON: ") + e.what());
    }
    const auto model = posterior_model_from_json(read_json(a.model));
    if (x.size() != model->num_vars()) throw ParseError("solution length does not match the model");
    Rng rng = make_stream(a.seed, 0, "certify");
    cert = certify(x, *model, a.m, a.beta, rng);
  }
  write_json(a.out, to_json(cert));
  man.outputs.push_back(a.out);
  std::printf("M: %llu\ns: %llu\nv_hat: %s\nupper_bound: %s\n", static_cast<unsigned long long>(cert.m),
              static_cast<unsigned long long>(cert.s), format_real(cert.v_hat, 6).c_str(),
              format_real(cert.upper_bound, 6).c_str());
  man.write(manifest_near(a.out));
  return kOk;
}

// ---- sim -----------------------------------------------------------------

struct SimArgs {
  std::string config;
  std::string out = "sim_out";
  std::size_t jobs = 1;
  std::int64_t seed = -1;
};

int cmd_sim(const SimArgs& a) {
  SimConfig cfg = a.config.empty() ? SimConfig{} : sim_config_from_json(read_json(a.config));
  if (a.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(a.seed);
  cfg.validate();
  Manifest man;
  man.command = "sim";
  man.seed = cfg.master_seed;
  man.config = to_json(cfg);
  man.config["jobs"] = a.jobs;

  spdlog::info("running {} trials x {} alphas with {} job(s)", cfg.trials_per_alpha, cfg.alphas.size(), a.jobs);
  const BenchmarkResult res = run_benchmark(cfg, a.jobs);
  const fs::path dir(a.out);
  fs::create_directories(dir);

  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    man.outputs.push_back((dir / name).string());
  };
  emit("by_alpha.csv", by_alpha_csv(res.by_alpha));
  emit("overall.csv", overall_csv(res.overall));
  emit("trials.csv", trials_csv(res.trials));

  for (double alpha : cfg.alphas) {
    std::vector<svg::Bar> profit, viol;
    for (const auto& row : res.by_alpha) {
      if (row.alpha != alpha) continue;
      profit.push_back({std::string(to_string(row.method)), row.profit_mean});
      viol.push_back({std::string(to_string(row.method)), row.vtrue_mean});
    }
    const std::string tag = format_real(alpha, 2);
    emit("profit_alpha_" + tag + ".svg", svg::bar_chart("Mean profit, alpha = " + tag, "profit", profit));
    emit("violation_alpha_" + tag + ".svg",
         svg::bar_chart("Mean true violation, alpha = " + tag, "violation probability", viol, alpha));
  }
  std::vector<svg::Point> pts;
  for (const auto& r : res.trials) {
    if (succeeded(r)) pts.push_back({r.v_post, r.v_true, std::string(to_string(r.method))});
  }
  emit("calibration.svg", svg::calibration_scatter("Posterior vs true violation", "posterior violation (certificate)",
                                                   "true violation", pts));

  std::size_t ok = 0;
  for (const auto& r : res.trials) ok += succeeded(r) ? 1 : 0;
  for (const auto& r : res.trials) {
    if (!succeeded(r)) {
      spdlog::warn("trial {} method {} alpha {}: {}", r.trial, to_string(r.method), r.alpha, r.status);
    }
  }
  std::fputs(by_alpha_csv(res.by_alpha).c_str(), stdout);
  man.write(dir / "manifest.json");
  return ok > 0 ? kOk : kFailure;
}

// ---- panel ---------------------------------------------------------------

struct PanelArgs {
  std::string detections;
  std::string clusters;
  std::string weights;
  std::string config;
  std::string out = "panel_out";
  std::int64_t seed = -1;
};

int cmd_panel(const PanelArgs& a) {
  PanelConfig cfg = a.config.empty() ? PanelConfig{} : panel_config_from_json(read_json(a.config));
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  Manifest man;
  man.command = "panel";
  man.seed = cfg.seed;
  man.config = to_json(cfg);
  man.config["detections"] = a.detections;
  man.config["clusters"] = a.clusters;
  man.config["weights"] = a.weights;

  const DetectionData data = load_detections(read_csv(a.detections), read_csv(a.clusters));
  const std::vector<double> weights = load_weights(read_csv(a.weights), data.genes);
  const BetaPosteriorMatrix post = fit_beta_binomial(data.detections, data.cluster_sizes, cfg.prior_a, cfg.prior_b);
  spdlog::info("panel: {} clusters, {} genes, B = {}, L = {}", data.clusters.size(), data.genes.size(), cfg.budget,
               cfg.threshold);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  PanelResult res;
  try {
    res = panel_select(weights, post, data.genes, data.clusters, cfg);
  } catch (const PanelInfeasible& e) {
    std::fprintf(stderr, "panel infeasible: %s\n", e.what());
    if (!e.cluster().empty()) std::fprintf(stderr, "binding cluster: %s\n", e.cluster().c_str());
    man.write(dir / "manifest.json");
    return kInfeasible;
  }

  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    man.outputs.push_back((dir / name).string());
  };
  emit("panel.csv", panel_csv(res, weights));
  emit("panel_clusters.csv", panel_clusters_csv(res.cluster_summaries));
  write_json(dir / "certificate.json", to_json(res.certificate));
  man.outputs.push_back((dir / "certificate.json").string());
  std::vector<svg::BoxStats> boxes;
  for (const auto& c : res.cluster_summaries) boxes.push_back({c.cluster, c.q05, c.q25, c.median, c.q75, c.q95});
  emit("coverage_box.svg", svg::boxplot("Posterior coverage by cluster", "coverage", boxes, cfg.threshold));

  std::printf("panel (%zu genes):", res.panel_genes.size());
  for (const auto& g : res.panel_genes) std::printf(" %s", g.c_str());
  std::printf("\nv_hat: %s\nupper_bound: %s\n", format_real(res.certificate.v_hat, 6).c_str(),
              format_real(res.certificate.upper_bound, 6).c_str());
  man.write(dir / "manifest.json");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Bayesian linear programming with posterior feasibility checks"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s_solve = app.add_subcommand("solve", "Solve an LP from JSON");
  s_solve->add_option("problem", solve.problem, "LP problem JSON")->required()->check(CLI::ExistingFile);
  s_solve->add_option("--out", solve.out, "solution JSON path");

  RobustifyArgs rob;
  auto* s_rob = app.add_subcommand("robustify", "Solve the ellipsoidal robust counterpart by cutting planes");
  s_rob->add_option("problem", rob.problem, "LP JSON with uncertain_rows or robust_rows")
      ->required()
      ->check(CLI::ExistingFile);
  s_rob->add_option("--alpha", rob.alpha, "joint risk level split across rows");
  s_rob->add_option("--out", rob.out, "solution JSON path");

  SizeArgs size;
  auto* s_size = app.add_subcommand("scenario-size", "Scenarios needed for a violation level");
  s_size->add_option("--eps", size.eps, "violation level")->required();
  s_size->add_option("--delta", size.delta, "confidence parameter")->required();
  s_size->add_option("--d", size.d, "support rank")->required();
  s_size->add_option("--manifest", size.manifest, "manifest path");

  CertifyArgs cert;
  auto* s_cert = app.add_subcommand("certify", "Monte Carlo certificate for a fixed solution");
  s_cert->add_option("--solution", cert.solution, "solution JSON with field x");
  s_cert->add_option("--model", cert.model, "posterior model JSON");
  s_cert->add_option("--M", cert.m, "certification draws");
  s_cert->add_option("--beta", cert.beta, "one-sided confidence parameter");
  s_cert->add_option("--seed", cert.seed, "master seed");
  s_cert->add_option("--s", cert.s, "replay: violation count out of M");
  s_cert->add_option("--out", cert.out, "certificate JSON path");

  SimArgs sim;
  auto* s_sim = app.add_subcommand("sim", "Run the simulation benchmark");
  s_sim->add_option("--config", sim.config, "SimConfig JSON")->check(CLI::ExistingFile);
  s_sim->add_option("--out", sim.out, "output directory");
  s_sim->add_option("--jobs", sim.jobs, "worker threads")->check(CLI::PositiveNumber);
  s_sim->add_option("--seed", sim.seed, "master seed (overrides config)");

  PanelArgs panel;
  auto* s_panel = app.add_subcommand("panel", "Select a gene panel with coverage constraints");
  s_panel->add_option("--detections", panel.detections, "detections.csv")->required()->check(CLI::ExistingFile);
  s_panel->add_option("--clusters", panel.clusters, "clusters.csv")->required()->check(CLI::ExistingFile);
  s_panel->add_option("--weights", panel.weights, "weights.csv")->required()->check(CLI::ExistingFile);
  s_panel->add_option("--config", panel.config, "panel config JSON")->check(CLI::ExistingFile);
  s_panel->add_option("--out", panel.out, "output directory");
  s_panel->add_option("--seed", panel.seed, "master seed (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*s_solve) return cmd_solve(solve);
    if (*s_rob) return cmd_robustify(rob);
    if (*s_size) return cmd_scenario_size(size);
    if (*s_cert) return cmd_certify(cert);
    if (*s_sim) return cmd_sim(sim);
    if (*s_panel) return cmd_panel(panel);
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const DomainError& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const DimensionMismatch& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const CountOutOfRange& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const EmptyInput& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const NumericalBreakdown& e) {
    spdlog::error("{}", e.what());
    return kBreakdown;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}
