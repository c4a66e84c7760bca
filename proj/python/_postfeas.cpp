// JSON documents cross the boundary as strings; the package wrapper turns
// them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

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
#include "postfeas/version.hpp"

namespace py = pybind11;
using namespace postfeas;
using nlohmann::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

std::string solve(const std::string& problem) { return to_json(solve_lp(lp_from_json(parse(problem)))).dump(); }

std::string robustify(const std::string& problem, double alpha) {
  const json doc = parse(problem);
  RobustLp rlp;
  if (doc.contains("robust_rows")) {
    rlp = robust_lp_from_json(doc);
  } else {
    std::vector<UncertainRow> rows;
    for (const auto& item : doc.at("uncertain_rows")) {
      const auto c = item.at("center").get<std::vector<double>>();
      const auto cov = item.at("cov").get<std::vector<std::vector<double>>>();
      const auto d = static_cast<Eigen::Index>(c.size());
      UncertainRow row{Eigen::Map<const Eigen::VectorXd>(c.data(), d), Eigen::MatrixXd(d, d)};
      if (static_cast<Eigen::Index>(cov.size()) != d) throw DimensionMismatch("uncertain row cov must be square");
      for (Eigen::Index i = 0; i < d; ++i) {
        if (static_cast<Eigen::Index>(cov[i].size()) != d) throw DimensionMismatch("uncertain row cov must be square");
        for (Eigen::Index j = 0; j < d; ++j) row.cov(i, j) = cov[i][j];
      }
      rows.push_back(std::move(row));
    }
    rlp = robustify_rows(lp_from_json(doc), rows, alpha);
  }
  const RobustSolve res = solve_robust_cutting_planes(rlp);
  json out = to_json(res.solution);
  out["rounds"] = res.log.rounds;
  out["cuts"] = res.log.cuts;
  return out.dump();
}

std::string certify_model(const std::vector<double>& x, const std::string& model, std::uint64_t m, double beta,
                          std::uint64_t seed) {
  const auto post = posterior_model_from_json(parse(model));
  if (x.size() != post->num_vars()) throw DimensionMismatch("solution length does not match the model");
  Rng rng = make_stream(seed, 0, "certify");
  return to_json(certify(x, *post, m, beta, rng)).dump();
}

std::string certify_replay(std::uint64_t s, std::uint64_t m, double beta) {
  if (s > m) throw DomainError("s must not exceed M");
  ViolationCount count;
  count.draws = m;
  count.violations = s;
  return to_json(make_certificate(count, beta)).dump();
}

py::dict benchmark(const std::string& config, std::size_t jobs) {
  const SimConfig cfg = sim_config_from_json(parse(config));
  cfg.validate();
  BenchmarkResult res;
  {
    py::gil_scoped_release nogil;
    res = run_benchmark(cfg, jobs);
  }
  py::dict out;
  out["by_alpha"] = by_alpha_csv(res.by_alpha);
  out["overall"] = overall_csv(res.overall);
  out["trials"] = trials_csv(res.trials);
  return out;
}

py::dict panel(const std::string& detections, const std::string& clusters, const std::string& weights,
               const std::string& config) {
  const PanelConfig cfg = panel_config_from_json(parse(config));
  const DetectionData data = load_detections(read_csv(detections), read_csv(clusters));
  const std::vector<double> w = load_weights(read_csv(weights), data.genes);
  const BetaPosteriorMatrix post = fit_beta_binomial(data.detections, data.cluster_sizes, cfg.prior_a, cfg.prior_b);
  const PanelResult res = panel_select(w, post, data.genes, data.clusters, cfg);
  py::dict out;
  out["genes"] = res.panel_genes;
  out["relaxed_x"] = res.relaxed_x;
  out["relaxed_objective"] = res.relaxed_objective;
  out["max_scenario_residual"] = res.max_scenario_residual;
  out["certificate"] = to_json(res.certificate).dump();
  out["panel_csv"] = panel_csv(res, w);
  out["clusters_csv"] = panel_clusters_csv(res.cluster_summaries);
  return out;
}

}  // namespace

PYBIND11_MODULE(_postfeas, m) {
  m.attr("__version__") = kVersion;

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
  static py::exception<DomainError> domain_error(m, "DomainError", base.ptr());
  static py::exception<PanelInfeasible> panel_infeasible(m, "PanelInfeasible", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      parse_error(e.what());
    } catch (const DomainError& e) {
      domain_error(e.what());
    } catch (const PanelInfeasible& e) {
      panel_infeasible(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def("solve_lp", &solve, py::arg("problem"));
  m.def("robustify", &robustify, py::arg("problem"), py::arg("alpha"));
  m.def("certify", &certify_model, py::arg("x"), py::arg("model"), py::arg("m"), py::arg("beta"), py::arg("seed"));
  m.def("certify_replay", &certify_replay, py::arg("s"), py::arg("m"), py::arg("beta"));
  m.def("run_benchmark", &benchmark, py::arg("config"), py::arg("jobs") = 1);
  m.def("panel", &panel, py::arg("detections"), py::arg("clusters"), py::arg("weights"), py::arg("config"));

  m.def("required_sample_size", &required_sample_size, py::arg("eps"), py::arg("delta"), py::arg("d"));
  m.def("violation_bound", &violation_bound, py::arg("n"), py::arg("eps"), py::arg("d"));
  m.def("clopper_pearson_upper", &clopper_pearson_upper, py::arg("s"), py::arg("m"), py::arg("beta"));
  m.def("bonferroni_kappa", &bonferroni_kappa, py::arg("alpha"), py::arg("m"), py::arg("dim"));

  m.def("reg_inc_beta", &reg_inc_beta, py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("beta_quantile", &beta_quantile, py::arg("p"), py::arg("a"), py::arg("b"));
  m.def("chi2_cdf", &chi2_cdf, py::arg("x"), py::arg("df"));
  m.def("chi2_quantile", &chi2_quantile, py::arg("p"), py::arg("df"));
  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("dof"));
  m.def("student_t_quantile", &student_t_quantile, py::arg("p"), py::arg("dof"));
  m.def("binomial_tail", &binomial_tail, py::arg("n"), py::arg("eps"), py::arg("d"));
}
