#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "postfeas/certify.hpp"
#include "postfeas/posterior.hpp"
#include "postfeas/scenario.hpp"

namespace postfeas {

struct PanelConfig {
  std::size_t budget = 30;     // B
  double threshold = 8.0;      // L
  std::size_t scenarios = 300; // S
  std::uint64_t m_cert = 4000;
  double beta = 0.05;
  double alpha_intent = 0.05;
  double prior_a = 1.0;
  double prior_b = 1.0;
  std::uint64_t seed = 42;

  void validate() const;
};

nlohmann::json to_json(const PanelConfig& cfg);
/// Missing keys keep their defaults.
PanelConfig panel_config_from_json(const nlohmann::json& doc);

struct ClusterSummary {
  std::string cluster;
  double mean = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;  // box edges for plots; not part of the CSV
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
  double violation_rate = 0.0;
};

struct PanelDetail {
  std::vector<ClusterSummary> clusters;
  Certificate certificate;
};

struct PanelResult {
  std::vector<double> relaxed_x;
  double relaxed_objective = 0.0;
  std::vector<std::size_t> panel;  // gene indices, rank order
  std::vector<std::string> panel_genes;
  Certificate certificate;
  std::vector<ClusterSummary> cluster_summaries;
  ScenarioSet scenarios;               // optimization draws
  double max_scenario_residual = 0.0;  // of relaxed_x over all scenario rows
};

/// Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double p);

/// Optimization scenario set: S draws of the J x K matrix q, each row j giving
/// the constraint q_j^T x >= L.
ScenarioSet panel_scenarios(const BetaPosteriorMatrix& post, const PanelConfig& cfg, Rng& rng);

/// Ranking of the relaxed solution: x descending, then weight descending,
/// then gene id ascending. Values of x within 1e-9 count as tied.
std::vector<std::size_t> rank_genes(const std::vector<double>& x, const std::vector<double>& weights,
                                    const std::vector<std::string>& genes);

/// Per-cluster coverage of `x_panel` over m_cert fresh q draws, plus the global
/// certificate computed from the same draws.
PanelDetail panel_certify_detail(const std::vector<double>& x_panel, const BetaPosteriorMatrix& post,
                                 const std::vector<std::string>& clusters, const PanelConfig& cfg, Rng& rng);

/// Streams: "panel-scenario" for optimization, "certify" for certification,
/// both derived from cfg.seed.
PanelResult panel_select(const std::vector<double>& weights, const BetaPosteriorMatrix& post,
                         const std::vector<std::string>& genes, const std::vector<std::string>& clusters,
                         const PanelConfig& cfg);

std::string panel_csv(const PanelResult& res, const std::vector<double>& weights);
std::string panel_clusters_csv(const std::vector<ClusterSummary>& rows);

}  // namespace postfeas
