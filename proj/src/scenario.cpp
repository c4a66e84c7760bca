#include "postfeas/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "postfeas/errors.hpp"
#include "postfeas/stats.hpp"

namespace postfeas {

namespace {

double row_residual(Sense sense, double lhs, double rhs) {
  switch (sense) {
    case Sense::LessEqual:
      return lhs - rhs;
    case Sense::GreaterEqual:
      return rhs - lhs;
    case Sense::Equal:
      return std::abs(lhs - rhs);
  }
  return 0.0;
}

std::vector<double> row_of(const ScenarioDraw& draw, std::size_t i) {
  const auto r = static_cast<Eigen::Index>(i);
  std::vector<double> out(static_cast<std::size_t>(draw.rows.cols()));
  for (Eigen::Index j = 0; j < draw.rows.cols(); ++j) out[static_cast<std::size_t>(j)] = draw.rows(r, j);
  return out;
}

double lhs_at(const ScenarioDraw& draw, std::size_t i, const std::vector<double>& x) {
  const auto r = static_cast<Eigen::Index>(i);
  double s = 0.0;
  for (Eigen::Index j = 0; j < draw.rows.cols(); ++j) s += draw.rows(r, j) * x[static_cast<std::size_t>(j)];
  return s;
}

bool all_nonnegative_vars(const LpProblem& base) {
  return std::all_of(base.bounds.begin(), base.bounds.end(), [](const Bound& b) { return b.lo >= 0.0; });
}

}  // namespace

void ScenarioSet::validate(std::size_t num_vars) const {
  if (draws.empty()) throw EmptyInput("scenario set has no draws");
  for (const auto& d : draws) {
    if (static_cast<std::size_t>(d.rows.rows()) != senses.size() ||
        static_cast<std::size_t>(d.rhs.size()) != senses.size()) {
      throw DimensionMismatch("scenario draw row count differs from the sense list");
    }
    if (static_cast<std::size_t>(d.rows.cols()) != num_vars) {
      throw DimensionMismatch("scenario draw width differs from the number of variables");
    }
  }
}

ScenarioSet make_rhs_scenarios(const Eigen::MatrixXd& rows, Sense sense,
                               const std::vector<Eigen::VectorXd>& rhs_draws, StreamRef source) {
  ScenarioSet scen;
  scen.senses.assign(static_cast<std::size_t>(rows.rows()), sense);
  scen.source = source;
  scen.draws.reserve(rhs_draws.size());
  for (const auto& b : rhs_draws) {
    if (b.size() != rows.rows()) throw DimensionMismatch("rhs draw length differs from row count");
    scen.draws.push_back({rows, b});
  }
  return scen;
}

double violation_bound(std::uint64_t n, double eps, std::uint64_t d) { return binomial_tail(n, eps, d); }

std::uint64_t required_sample_size(double eps, double delta, std::uint64_t d) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("required_sample_size requires eps in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("required_sample_size requires delta in (0, 1)");
  if (d < 1) throw DomainError("required_sample_size requires d >= 1");
  // binomial_tail(d - 1, ., d) == 1 > delta, so the answer is at least d.
  std::uint64_t lo = d - 1;
  std::uint64_t hi = std::max<std::uint64_t>(d, 1);
  while (binomial_tail(hi, eps, d) > delta) {
    lo = hi;
    if (hi > (std::uint64_t{1} << 60)) throw DomainError("required sample size overflows");
    hi *= 2;
  }
  // Invariant: tail(lo) > delta (or lo == d - 1), tail(hi) <= delta.
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (binomial_tail(mid, eps, d) <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

LpProblem build_scenario_lp(const LpProblem& base, const ScenarioSet& scen) {
  base.validate();
  scen.validate(base.num_vars());
  LpProblem out = base;
  out.constraints.reserve(base.constraints.size() + scen.size() * scen.uncertain_rows());
  for (const auto& draw : scen.draws) {
    for (std::size_t i = 0; i < scen.uncertain_rows(); ++i) {
      out.add(row_of(draw, i), scen.senses[i], draw.rhs(static_cast<Eigen::Index>(i)));
    }
  }
  return out;
}

std::vector<double> rhs_scenario_min(const std::vector<std::vector<double>>& draws) {
  if (draws.empty()) throw EmptyInput("rhs_scenario_min needs at least one draw");
  std::vector<double> out = draws.front();
  for (const auto& d : draws) {
    if (d.size() != out.size()) throw DimensionMismatch("rhs draws differ in length");
    for (std::size_t j = 0; j < d.size(); ++j) out[j] = std::min(out[j], d[j]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> nondominated_draws(const ScenarioSet& scen) {
  const std::size_t m = scen.uncertain_rows();
  const std::size_t n_draws = scen.size();
  std::vector<std::vector<std::size_t>> kept(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Sense sense = scen.senses[i];
    if (sense == Sense::Equal) {
      kept[i].resize(n_draws);
      std::iota(kept[i].begin(), kept[i].end(), std::size_t{0});
      continue;
    }
    // Visit draws from the tightest right-hand side; a draw is dropped when a
    // kept draw implies it (x >= 0 makes coefficientwise comparison valid).
    const double flip = sense == Sense::LessEqual ? 1.0 : -1.0;
    std::vector<std::size_t> order(n_draws);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return flip * scen.draws[a].rhs(r) < flip * scen.draws[b].rhs(r);
    });
    for (std::size_t k : order) {
      const auto& row_k = scen.draws[k].rows.row(r);
      bool dominated = false;
      for (std::size_t kk : kept[i]) {
        const auto& row_kk = scen.draws[kk].rows.row(r);
        if ((flip * (row_kk - row_k).array() >= 0.0).all()) {
          dominated = true;
          break;
        }
      }
      if (!dominated) kept[i].push_back(k);
    }
    std::sort(kept[i].begin(), kept[i].end());
  }
  return kept;
}

double max_scenario_residual(const ScenarioSet& scen, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& draw : scen.draws) {
    for (std::size_t i = 0; i < scen.uncertain_rows(); ++i) {
      worst = std::max(worst, row_residual(scen.senses[i], lhs_at(draw, i, x),
                                           draw.rhs(static_cast<Eigen::Index>(i))));
    }
  }
  return worst;
}

ScenarioSolve solve_scenario_lp(const LpProblem& base, const ScenarioSet& scen,
                                const ScenarioSolveOptions& opts) {
  base.validate();
  scen.validate(base.num_vars());
  const std::size_t m = scen.uncertain_rows();

  ScenarioSolve out;
  out.stacked_rows = m * scen.size();

  // Candidate (row, draw) pairs.
  std::vector<std::vector<std::size_t>> candidates;
  if (opts.prefilter && all_nonnegative_vars(base)) {
    candidates = nondominated_draws(scen);
  } else {
    candidates.assign(m, std::vector<std::size_t>(scen.size()));
    for (auto& c : candidates) std::iota(c.begin(), c.end(), std::size_t{0});
  }
  for (const auto& c : candidates) out.kept_rows += c.size();

  auto add_pair = [&](LpProblem& lp, std::size_t i, std::size_t k) {
    lp.add(row_of(scen.draws[k], i), scen.senses[i], scen.draws[k].rhs(static_cast<Eigen::Index>(i)));
  };

  auto solve_all = [&]() {
    LpProblem lp = base;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k : candidates[i]) add_pair(lp, i, k);
    }
    out.active_rows = out.kept_rows;
    out.rounds = 1;
    out.solution = solve_lp(lp, opts.tol);
    return out;
  };

  if (!opts.lazy || out.kept_rows <= opts.lazy_threshold) return solve_all();

  std::vector<std::vector<char>> active(m);
  LpProblem lp = base;
  for (std::size_t i = 0; i < m; ++i) {
    active[i].assign(candidates[i].size(), 0);
    if (scen.senses[i] == Sense::Equal) {
      for (std::size_t c = 0; c < candidates[i].size(); ++c) {
        active[i][c] = 1;
        add_pair(lp, i, candidates[i][c]);
      }
      continue;
    }
    // Seed with the tightest right-hand side.
    const double flip = scen.senses[i] == Sense::LessEqual ? 1.0 : -1.0;
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates[i].size(); ++c) {
      if (flip * scen.draws[candidates[i][c]].rhs(static_cast<Eigen::Index>(i)) <
          flip * scen.draws[candidates[i][best]].rhs(static_cast<Eigen::Index>(i))) {
        best = c;
      }
    }
    active[i][best] = 1;
    add_pair(lp, i, candidates[i][best]);
  }

  const double add_tol = 0.5 * opts.tol.feas;
  for (std::size_t round = 1;; ++round) {
    out.rounds = round;
    out.solution = solve_lp(lp, opts.tol);
    if (out.solution.status == LpStatus::Unbounded) return solve_all();
    if (out.solution.status != LpStatus::Optimal) break;
    std::size_t added = 0;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::pair<double, std::size_t>> violated;
      for (std::size_t c = 0; c < candidates[i].size(); ++c) {
        if (active[i][c]) continue;
        const auto& draw = scen.draws[candidates[i][c]];
        const double r = row_residual(scen.senses[i], lhs_at(draw, i, out.solution.x),
                                      draw.rhs(static_cast<Eigen::Index>(i)));
        if (r > add_tol) violated.emplace_back(-r, c);
      }
      const std::size_t take = std::min(violated.size(), opts.add_per_row);
      std::partial_sort(violated.begin(), violated.begin() + static_cast<std::ptrdiff_t>(take),
                        violated.end());
      for (std::size_t t = 0; t < take; ++t) {
        const std::size_t c = violated[t].second;
        active[i][c] = 1;
        add_pair(lp, i, candidates[i][c]);
        ++added;
      }
    }
    if (added == 0) break;
  }
  out.active_rows = lp.constraints.size() - base.constraints.size();
  return out;
}

nlohmann::json to_json(const ScenarioSet& scen) {
  nlohmann::json doc;
  auto senses = nlohmann::json::array();
  for (Sense s : scen.senses) senses.push_back(std::string(to_string(s)));
  doc["senses"] = std::move(senses);
  doc["source_stream"] = {{"seed", scen.source.seed}, {"stream_id", scen.source.stream_id}};
  auto draws = nlohmann::json::array();
  for (const auto& d : scen.draws) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < scen.uncertain_rows(); ++i) rows.push_back(row_of(d, i));
    draws.push_back({{"rows", rows}, {"rhs", std::vector<double>(d.rhs.data(), d.rhs.data() + d.rhs.size())}});
  }
  doc["draws"] = std::move(draws);
  return doc;
}

ScenarioSet scenario_set_from_json(const nlohmann::json& doc) {
  try {
    ScenarioSet scen;
    for (const auto& s : doc.at("senses")) scen.senses.push_back(sense_from_string(s.get<std::string>()));
    scen.source.seed = doc.at("source_stream").at("seed").get<std::uint64_t>();
    scen.source.stream_id = doc.at("source_stream").at("stream_id").get<std::uint64_t>();
    for (const auto& item : doc.at("draws")) {
      const auto rows = item.at("rows").get<std::vector<std::vector<double>>>();
      const auto rhs = item.at("rhs").get<std::vector<double>>();
      if (rows.size() != scen.senses.size() || rhs.size() != scen.senses.size()) {
        throw ParseError("scenario draw size differs from the sense list");
      }
      ScenarioDraw d;
      const std::size_t n = rows.empty() ? 0 : rows.front().size();
      d.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != n) throw ParseError("ragged scenario rows");
        for (std::size_t j = 0; j < n; ++j) d.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
      d.rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
      scen.draws.push_back(std::move(d));
    }
    return scen;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
}

}  // namespace postfeas
