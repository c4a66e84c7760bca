#include "postfeas/panel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "postfeas/errors.hpp"
#include "postfeas/io.hpp"

namespace postfeas {

void PanelConfig::validate() const {
  if (budget < 1) throw DomainError("PanelConfig: budget must be >= 1");
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw DomainError("PanelConfig: threshold must be positive");
  if (scenarios < 1) throw DomainError("PanelConfig: scenarios must be >= 1");
  if (m_cert < 1) throw DomainError("PanelConfig: m_cert must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("PanelConfig: beta must lie in (0, 1)");
  if (!(alpha_intent > 0.0 && alpha_intent < 1.0)) throw DomainError("PanelConfig: alpha_intent must lie in (0, 1)");
  if (!(prior_a > 0.0 && prior_b > 0.0)) throw DomainError("PanelConfig: Beta prior must be positive");
}

nlohmann::json to_json(const PanelConfig& cfg) {
  return {{"B", cfg.budget},       {"L", cfg.threshold}, {"S", cfg.scenarios},
          {"m_cert", cfg.m_cert},  {"beta", cfg.beta},   {"alpha_intent", cfg.alpha_intent},
          {"prior_a", cfg.prior_a}, {"prior_b", cfg.prior_b}, {"seed", cfg.seed}};
}

PanelConfig panel_config_from_json(const nlohmann::json& doc) {
  PanelConfig cfg;
  try {
    if (!doc.is_object()) throw ParseError("panel config must be a JSON object");
    if (doc.contains("B")) cfg.budget = doc.at("B").get<std::size_t>();
    if (doc.contains("L")) cfg.threshold = doc.at("L").get<double>();
    if (doc.contains("S")) cfg.scenarios = doc.at("S").get<std::size_t>();
    if (doc.contains("m_cert")) cfg.m_cert = doc.at("m_cert").get<std::uint64_t>();
    if (doc.contains("beta")) cfg.beta = doc.at("beta").get<double>();
    if (doc.contains("alpha_intent")) cfg.alpha_intent = doc.at("alpha_intent").get<double>();
    if (doc.contains("prior_a")) cfg.prior_a = doc.at("prior_a").get<double>();
    if (doc.contains("prior_b")) cfg.prior_b = doc.at("prior_b").get<double>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("panel config JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInput("sample_quantile needs at least one value");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sample_quantile requires p in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ScenarioSet panel_scenarios(const BetaPosteriorMatrix& post, const PanelConfig& cfg, Rng& rng) {
  ScenarioSet scen;
  scen.senses.assign(static_cast<std::size_t>(post.clusters()), Sense::GreaterEqual);
  scen.source = {rng.seed(), rng.stream_id()};
  scen.draws.reserve(cfg.scenarios);
  for (std::size_t s = 0; s < cfg.scenarios; ++s) {
    ScenarioDraw d;
    d.rows = sample_q_matrix(post, rng);
    d.rhs = Eigen::VectorXd::Constant(post.clusters(), cfg.threshold);
    scen.draws.push_back(std::move(d));
  }
  return scen;
}

std::vector<std::size_t> rank_genes(const std::vector<double>& x, const std::vector<double>& weights,
                                    const std::vector<std::string>& genes) {
  if (x.size() != weights.size() || x.size() != genes.size()) {
    throw DimensionMismatch("rank_genes: x, weights and genes differ in length");
  }
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(x[a] - x[b]) > 1e-9) return x[a] > x[b];
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return genes[a] < genes[b];
  });
  return order;
}

PanelDetail panel_certify_detail(const std::vector<double>& x_panel, const BetaPosteriorMatrix& post,
                                 const std::vector<std::string>& clusters, const PanelConfig& cfg, Rng& rng) {
  const auto j_count = static_cast<std::size_t>(post.clusters());
  if (x_panel.size() != static_cast<std::size_t>(post.genes())) {
    throw DimensionMismatch("panel vector length differs from the gene count");
  }
  if (clusters.size() != j_count) throw DimensionMismatch("one cluster name per posterior row is required");
  const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x_panel.data(), static_cast<Eigen::Index>(x_panel.size()));

  std::vector<std::vector<double>> coverage(j_count, std::vector<double>(cfg.m_cert));
  ViolationCount count;
  count.draws = cfg.m_cert;
  count.per_constraint.assign(j_count, 0);
  for (std::uint64_t l = 0; l < cfg.m_cert; ++l) {
    const Eigen::VectorXd cov = sample_q_matrix(post, rng) * xv;
    bool any = false;
    for (std::size_t j = 0; j < j_count; ++j) {
      const double c = cov(static_cast<Eigen::Index>(j));
      coverage[j][l] = c;
      if (cfg.threshold - c > 0.0) {
        ++count.per_constraint[j];
        any = true;
      }
    }
    if (any) ++count.violations;
  }

  PanelDetail out;
  out.certificate = make_certificate(count, cfg.beta);
  for (std::size_t j = 0; j < j_count; ++j) {
    ClusterSummary s;
    s.cluster = clusters[j];
    s.mean = std::accumulate(coverage[j].begin(), coverage[j].end(), 0.0) / static_cast<double>(cfg.m_cert);
    s.q05 = sample_quantile(coverage[j], 0.05);
    s.q25 = sample_quantile(coverage[j], 0.25);
    s.median = sample_quantile(coverage[j], 0.5);
    s.q75 = sample_quantile(coverage[j], 0.75);
    s.q95 = sample_quantile(coverage[j], 0.95);
    s.violation_rate = out.certificate.per_constraint_rates[j];
    out.clusters.push_back(std::move(s));
  }
  return out;
}

PanelResult panel_select(const std::vector<double>& weights, const BetaPosteriorMatrix& post,
                         const std::vector<std::string>& genes, const std::vector<std::string>& clusters,
                         const PanelConfig& cfg) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(post.genes());
  if (weights.size() != k || genes.size() != k) throw DimensionMismatch("one weight and id per gene is required");
  if (clusters.size() != static_cast<std::size_t>(post.clusters())) {
    throw DimensionMismatch("one cluster name per posterior row is required");
  }
  if (k < cfg.budget) throw DomainError("panel_select requires at least B genes");
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("gene weights must be nonnegative");
  }

  PanelResult res;
  Rng opt_rng = make_stream(cfg.seed, 0, "panel-scenario");
  res.scenarios = panel_scenarios(post, cfg, opt_rng);

  // Per scenario and cluster the best reachable coverage is the sum of the B largest q.
  for (std::size_t s = 0; s < res.scenarios.size(); ++s) {
    const auto& q = res.scenarios.draws[s].rows;
    for (Eigen::Index j = 0; j < q.rows(); ++j) {
      std::vector<double> row(k);
      for (std::size_t g = 0; g < k; ++g) row[g] = q(j, static_cast<Eigen::Index>(g));
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(cfg.budget), row.end(),
                        std::greater<>());
      const double best = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(cfg.budget), 0.0);
      if (best < cfg.threshold) {
        const std::string& name = clusters[static_cast<std::size_t>(j)];
        throw PanelInfeasible("cluster '" + name + "' cannot reach coverage " + format_real(cfg.threshold, 4) +
                                  " with " + std::to_string(cfg.budget) + " genes (best " + format_real(best, 4) +
                                  " in scenario " + std::to_string(s) + ")",
                              name);
      }
    }
  }

  LpProblem base = make_problem(k);
  for (std::size_t g = 0; g < k; ++g) {
    base.objective[g] = weights[g];
    base.bounds[g] = {0.0, 1.0};
  }
  base.add(std::vector<double>(k, 1.0), Sense::LessEqual, static_cast<double>(cfg.budget));

  const ScenarioSolve solved = solve_scenario_lp(base, res.scenarios);
  if (solved.solution.status == LpStatus::Infeasible) {
    throw PanelInfeasible("coverage constraints are jointly infeasible within the budget", "");
  }
  if (solved.solution.status != LpStatus::Optimal) throw NumericalBreakdown("panel LP did not reach optimality");
  res.relaxed_x = solved.solution.x;
  res.relaxed_objective = solved.solution.objective_value;
  res.max_scenario_residual = max_scenario_residual(res.scenarios, res.relaxed_x);

  const auto order = rank_genes(res.relaxed_x, weights, genes);
  res.panel.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.budget));
  std::vector<double> indicator(k, 0.0);
  for (std::size_t g : res.panel) {
    indicator[g] = 1.0;
    res.panel_genes.push_back(genes[g]);
  }

  Rng cert_rng = make_stream(cfg.seed, 0, "certify");
  PanelDetail detail = panel_certify_detail(indicator, post, clusters, cfg, cert_rng);
  res.certificate = std::move(detail.certificate);
  res.cluster_summaries = std::move(detail.clusters);
  return res;
}

std::string panel_csv(const PanelResult& res, const std::vector<double>& weights) {
  std::string s = "rank,gene,x_relaxed,weight\n";
  for (std::size_t r = 0; r < res.panel.size(); ++r) {
    const std::size_t g = res.panel[r];
    s += std::to_string(r + 1) + "," + csv_escape(res.panel_genes[r]) + "," + format_real(res.relaxed_x[g]) + "," +
         format_real(weights[g]) + "\n";
  }
  return s;
}

std::string panel_clusters_csv(const std::vector<ClusterSummary>& rows) {
  std::string s = "cluster,mean,q05,median,q95,violation_rate\n";
  for (const auto& r : rows) {
    s += csv_escape(r.cluster) + "," + format_real(r.mean) + "," + format_real(r.q05) + "," + format_real(r.median) +
         "," + format_real(r.q95) + "," + format_real(r.violation_rate) + "\n";
  }
  return s;
}

}  // namespace postfeas
