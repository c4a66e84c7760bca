#include "postfeas/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "postfeas/certify.hpp"
#include "postfeas/errors.hpp"
#include "postfeas/io.hpp"
#include "postfeas/robustify.hpp"
#include "postfeas/scenario.hpp"
#include "postfeas/stats.hpp"

namespace postfeas {

namespace {

void check_range(const UniformRange& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw DomainError(std::string("SimConfig: invalid range for ") + name);
  }
}

nlohmann::json range_json(const UniformRange& r) { return nlohmann::json::array({r.lo, r.hi}); }

void read_range(const nlohmann::json& doc, const char* key, UniformRange& r) {
  if (!doc.contains(key)) return;
  const auto v = doc.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw ParseError(std::string("SimConfig: '") + key + "' must be [lo, hi]");
  r = {v[0], v[1]};
}

template <class T>
void read_value(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

SummaryRow summarize(double alpha, Method method, const std::vector<const TrialRecord*>& recs) {
  std::vector<double> profit, vtrue, vpost, ub;
  for (const auto* r : recs) {
    if (!succeeded(*r)) continue;
    profit.push_back(r->profit);
    vtrue.push_back(r->v_true);
    vpost.push_back(r->v_post);
    ub.push_back(r->v_post_ub95);
  }
  SummaryRow row;
  row.alpha = alpha;
  row.method = method;
  row.n = profit.size();
  row.profit_mean = mean_of(profit);
  row.profit_sd = sd_of(profit);
  row.vtrue_mean = mean_of(vtrue);
  row.vtrue_sd = sd_of(vtrue);
  row.vpost_mean = mean_of(vpost);
  row.vpost_ub95_mean = mean_of(ub);
  return row;
}

}  // namespace

void SimConfig::validate() const {
  if (n == 0 || m == 0 || d_ctx == 0 || n_obs == 0 || n_scen == 0 || m_true == 0 || m_cert == 0 ||
      trials_per_alpha == 0) {
    throw DomainError("SimConfig: all counts must be positive");
  }
  if (alphas.empty()) throw DomainError("SimConfig: alphas must be non-empty");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("SimConfig: alphas must lie in (0, 1)");
  }
  if (!(x_max > 0.0)) throw DomainError("SimConfig: x_max must be positive");
  if (!(cert_beta > 0.0 && cert_beta < 1.0)) throw DomainError("SimConfig: cert_beta must lie in (0, 1)");
  check_range(a_entry, "a_entry");
  check_range(p_entry, "p_entry");
  check_range(intercept, "intercept");
  check_range(slope, "slope");
  check_range(sigma, "sigma");
  check_range(context, "context");
  if (!(a_entry.lo > 0.0) || !(p_entry.lo > 0.0)) throw DomainError("SimConfig: A and p entries must be positive");
  if (!(sigma.lo > 0.0)) throw DomainError("SimConfig: sigma must be positive");
  if (!(prior_precision > 0.0 && prior_shape > 0.0 && prior_rate > 0.0)) {
    throw DomainError("SimConfig: prior hyperparameters must be positive");
  }
}

nlohmann::json to_json(const SimConfig& cfg) {
  return {{"n", cfg.n},
          {"m", cfg.m},
          {"d_ctx", cfg.d_ctx},
          {"n_obs", cfg.n_obs},
          {"n_scen", cfg.n_scen},
          {"m_true", cfg.m_true},
          {"m_cert", cfg.m_cert},
          {"trials_per_alpha", cfg.trials_per_alpha},
          {"alphas", cfg.alphas},
          {"x_max", cfg.x_max},
          {"master_seed", cfg.master_seed},
          {"cert_beta", cfg.cert_beta},
          {"a_entry", range_json(cfg.a_entry)},
          {"p_entry", range_json(cfg.p_entry)},
          {"intercept", range_json(cfg.intercept)},
          {"slope", range_json(cfg.slope)},
          {"sigma", range_json(cfg.sigma)},
          {"context", range_json(cfg.context)},
          {"prior_precision", cfg.prior_precision},
          {"prior_shape", cfg.prior_shape},
          {"prior_rate", cfg.prior_rate}};
}

SimConfig sim_config_from_json(const nlohmann::json& doc) {
  SimConfig cfg;
  try {
    if (!doc.is_object()) throw ParseError("SimConfig JSON must be an object");
    read_value(doc, "n", cfg.n);
    read_value(doc, "m", cfg.m);
    read_value(doc, "d_ctx", cfg.d_ctx);
    read_value(doc, "n_obs", cfg.n_obs);
    read_value(doc, "n_scen", cfg.n_scen);
    read_value(doc, "m_true", cfg.m_true);
    read_value(doc, "m_cert", cfg.m_cert);
    read_value(doc, "trials_per_alpha", cfg.trials_per_alpha);
    read_value(doc, "alphas", cfg.alphas);
    read_value(doc, "x_max", cfg.x_max);
    read_value(doc, "master_seed", cfg.master_seed);
    read_value(doc, "cert_beta", cfg.cert_beta);
    read_range(doc, "a_entry", cfg.a_entry);
    read_range(doc, "p_entry", cfg.p_entry);
    read_range(doc, "intercept", cfg.intercept);
    read_range(doc, "slope", cfg.slope);
    read_range(doc, "sigma", cfg.sigma);
    read_range(doc, "context", cfg.context);
    read_value(doc, "prior_precision", cfg.prior_precision);
    read_value(doc, "prior_shape", cfg.prior_shape);
    read_value(doc, "prior_rate", cfg.prior_rate);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("SimConfig JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::CR: return "CR";
    case Method::FPQ: return "FPQ";
    case Method::PM: return "PM";
    case Method::PS: return "PS";
    case Method::RB: return "RB";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw ParseError("unknown method '" + std::string(s) + "'");
}

SimInstance gen_instance(const SimConfig& cfg, Rng& rng) {
  const auto m = static_cast<Eigen::Index>(cfg.m);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto d = static_cast<Eigen::Index>(cfg.d_ctx);
  const auto n_obs = static_cast<Eigen::Index>(cfg.n_obs);
  SimInstance inst;
  inst.a.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) inst.a(i, j) = cfg.a_entry.draw(rng);
  }
  inst.p.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) inst.p(j) = cfg.p_entry.draw(rng);
  inst.beta_true.resize(m, d);
  inst.sigma_true.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    inst.beta_true(i, 0) = cfg.intercept.draw(rng);
    for (Eigen::Index k = 1; k < d; ++k) inst.beta_true(i, k) = cfg.slope.draw(rng);
    inst.sigma_true(i) = cfg.sigma.draw(rng);
  }
  auto draw_context = [&] {
    Eigen::VectorXd x(d);
    x(0) = 1.0;
    for (Eigen::Index k = 1; k < d; ++k) x(k) = cfg.context.draw(rng);
    return x;
  };
  inst.x_ctx = draw_context();
  inst.x_hist.resize(n_obs, d);
  inst.b_hist.resize(n_obs, m);
  for (Eigen::Index t = 0; t < n_obs; ++t) {
    const Eigen::VectorXd xt = draw_context();
    inst.x_hist.row(t) = xt.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
      inst.b_hist(t, i) = inst.beta_true.row(i).dot(xt) + inst.sigma_true(i) * sample_normal(rng);
    }
  }
  return inst;
}

std::vector<PredictiveT> fit_predictives(const SimConfig& cfg, const SimInstance& inst) {
  NigPrior prior;
  prior.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.d_ctx));
  prior.precision = cfg.prior_precision *
                    Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(cfg.d_ctx), static_cast<Eigen::Index>(cfg.d_ctx));
  prior.shape = cfg.prior_shape;
  prior.rate = cfg.prior_rate;
  std::vector<PredictiveT> out;
  out.reserve(cfg.m);
  for (Eigen::Index i = 0; i < inst.b_hist.cols(); ++i) {
    const NigPosterior post = fit_nig(inst.x_hist, inst.b_hist.col(i), prior);
    out.push_back(predictive(post, inst.x_ctx));
  }
  return out;
}

Eigen::VectorXd method_capacity(Method method, const SimConfig& cfg, const SimInstance& inst,
                                const std::vector<PredictiveT>& pred, double alpha, Rng& scenario_rng) {
  const auto m = static_cast<Eigen::Index>(pred.size());
  Eigen::VectorXd b(m);
  switch (method) {
    case Method::PM:
      for (Eigen::Index i = 0; i < m; ++i) b(i) = pred[static_cast<std::size_t>(i)].loc;
      break;
    case Method::CR: {
      const auto q = rhs_quantile_tighten(pred, alpha);
      for (Eigen::Index i = 0; i < m; ++i) b(i) = q[static_cast<std::size_t>(i)];
      break;
    }
    case Method::PS: {
      std::vector<std::vector<double>> draws(cfg.n_scen, std::vector<double>(pred.size()));
      for (auto& draw : draws) {
        for (std::size_t i = 0; i < pred.size(); ++i) draw[i] = sample_predictive(pred[i], scenario_rng);
      }
      const auto lo = rhs_scenario_min(draws);
      for (Eigen::Index i = 0; i < m; ++i) b(i) = lo[static_cast<std::size_t>(i)];
      break;
    }
    case Method::FPQ: {
      const double level = alpha / static_cast<double>(pred.size());
      for (Eigen::Index i = 0; i < m; ++i) {
        const OlsFit fit = fit_ols(inst.x_hist, inst.b_hist.col(i));
        b(i) = ols_predictive_quantile(fit, inst.x_ctx, level);
      }
      break;
    }
    case Method::RB: {
      std::vector<double> mu, sd;
      for (const auto& p : pred) {
        mu.push_back(p.mean());
        sd.push_back(p.sd());
      }
      const auto r = rb_heuristic_tighten(mu, sd, alpha, pred.size());
      for (Eigen::Index i = 0; i < m; ++i) b(i) = r[static_cast<std::size_t>(i)];
      break;
    }
  }
  return b;
}

LpProblem capacity_lp(const SimInstance& inst, const Eigen::VectorXd& b, double x_max) {
  const auto n = static_cast<std::size_t>(inst.a.cols());
  LpProblem lp = make_problem(n);
  for (std::size_t j = 0; j < n; ++j) {
    lp.objective[j] = inst.p(static_cast<Eigen::Index>(j));
    lp.bounds[j] = {0.0, x_max};
  }
  for (Eigen::Index i = 0; i < inst.a.rows(); ++i) {
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = inst.a(i, static_cast<Eigen::Index>(j));
    lp.add(std::move(row), Sense::LessEqual, b(i));
  }
  return lp;
}

double true_violation(const SimInstance& inst, const std::vector<double>& x, std::uint64_t draws, Rng& rng) {
  const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd load = inst.a * xv;
  const Eigen::VectorXd mean = inst.true_mean();
  std::uint64_t bad = 0;
  for (std::uint64_t l = 0; l < draws; ++l) {
    bool any = false;
    for (Eigen::Index i = 0; i < load.size(); ++i) {
      const double b = mean(i) + inst.sigma_true(i) * sample_normal(rng);
      if (load(i) > b) any = true;
    }
    if (any) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(draws);
}

bool succeeded(const TrialRecord& rec) { return rec.status == "optimal"; }

TrialRecord run_method(Method method, const SimConfig& cfg, const SimInstance& inst,
                       const std::vector<PredictiveT>& pred, double alpha, std::uint64_t trial_index) {
  TrialRecord rec;
  rec.alpha = alpha;
  rec.method = method;
  rec.seed = cfg.master_seed;
  rec.instance_stream = derive_stream(cfg.master_seed, trial_index, "instance");
  try {
    Rng scen_rng = make_stream(cfg.master_seed, trial_index, "scenario");
    Eigen::VectorXd b = method_capacity(method, cfg, inst, pred, alpha, scen_rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      if (b(i) < 0.0) {
        b(i) = 0.0;
        rec.clamped = true;
      }
    }
    const LpSolution sol = solve_lp(capacity_lp(inst, b, cfg.x_max));
    if (sol.status != LpStatus::Optimal) {
      rec.status = std::string(to_string(sol.status));
      return rec;
    }
    rec.profit = sol.objective_value;
    Rng truth_rng = make_stream(cfg.master_seed, trial_index, "truth");
    rec.v_true = true_violation(inst, sol.x, cfg.m_true, truth_rng);

    const StudentTRhsModel model(inst.a, pred);
    Rng cert_rng = make_stream(cfg.master_seed, trial_index, "certify");
    const Certificate cert = certify(sol.x, model, cfg.m_cert, cfg.cert_beta, cert_rng);
    rec.v_post = cert.v_hat;
    rec.v_post_ub95 = cert.upper_bound;
  } catch (const Error&) {
    rec.status = "error";
  }
  return rec;
}

std::vector<SummaryRow> summarize_by_alpha(const SimConfig& cfg, const std::vector<TrialRecord>& trials) {
  std::vector<SummaryRow> out;
  for (double alpha : cfg.alphas) {
    for (Method method : kAllMethods) {
      std::vector<const TrialRecord*> recs;
      for (const auto& r : trials) {
        if (r.alpha == alpha && r.method == method) recs.push_back(&r);
      }
      out.push_back(summarize(alpha, method, recs));
    }
  }
  return out;
}

std::vector<SummaryRow> summarize_overall(const std::vector<TrialRecord>& trials) {
  std::vector<SummaryRow> out;
  for (Method method : kAllMethods) {
    std::vector<const TrialRecord*> recs;
    for (const auto& r : trials) {
      if (r.method == method) recs.push_back(&r);
    }
    out.push_back(summarize(std::numeric_limits<double>::quiet_NaN(), method, recs));
  }
  return out;
}

BenchmarkResult run_benchmark(const SimConfig& cfg, std::size_t jobs) {
  cfg.validate();
  const std::size_t per_alpha = cfg.trials_per_alpha;
  const std::size_t total = cfg.alphas.size() * per_alpha;
  std::vector<std::vector<TrialRecord>> slots(total);

  auto run_one = [&](std::size_t idx) {
    const double alpha = cfg.alphas[idx / per_alpha];
    Rng inst_rng = make_stream(cfg.master_seed, idx, "instance");
    const SimInstance inst = gen_instance(cfg, inst_rng);
    std::vector<PredictiveT> pred;
    try {
      pred = fit_predictives(cfg, inst);
    } catch (const Error&) {
      for (Method method : kAllMethods) {
        TrialRecord rec;
        rec.alpha = alpha;
        rec.method = method;
        rec.status = "error";
        rec.seed = cfg.master_seed;
        rec.instance_stream = derive_stream(cfg.master_seed, idx, "instance");
        rec.trial = idx % per_alpha;
        slots[idx].push_back(rec);
      }
      return;
    }
    for (Method method : kAllMethods) {
      TrialRecord rec = run_method(method, cfg, inst, pred, alpha, idx);
      rec.trial = idx % per_alpha;
      slots[idx].push_back(rec);
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, total));
  if (jobs == 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) {
          try {
            run_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  BenchmarkResult out;
  for (auto& slot : slots) {
    for (auto& rec : slot) out.trials.push_back(std::move(rec));
  }
  std::stable_sort(out.trials.begin(), out.trials.end(), [&](const TrialRecord& x, const TrialRecord& y) {
    const auto ax = std::find(cfg.alphas.begin(), cfg.alphas.end(), x.alpha);
    const auto ay = std::find(cfg.alphas.begin(), cfg.alphas.end(), y.alpha);
    if (ax != ay) return ax < ay;
    if (x.method != y.method) return x.method < y.method;
    return x.trial < y.trial;
  });
  out.by_alpha = summarize_by_alpha(cfg, out.trials);
  out.overall = summarize_overall(out.trials);
  return out;
}

std::string by_alpha_csv(const std::vector<SummaryRow>& rows) {
  std::string s = "alpha,method,n,profit_mean,profit_sd,vtrue_mean,vtrue_sd,vpost_mean,vpost_ub95_mean\n";
  for (const auto& r : rows) {
    s += format_real(r.alpha, 4) + "," + std::string(to_string(r.method)) + "," + std::to_string(r.n) + "," +
         format_real(r.profit_mean, 4) + "," + format_real(r.profit_sd, 4) + "," + format_real(r.vtrue_mean) +
         "," + format_real(r.vtrue_sd) + "," + format_real(r.vpost_mean) + "," + format_real(r.vpost_ub95_mean) +
         "\n";
  }
  return s;
}

std::string overall_csv(const std::vector<SummaryRow>& rows) {
  std::string s = "method,n,profit_mean,profit_sd,vtrue_mean,vpost_mean,vpost_ub95_mean\n";
  for (const auto& r : rows) {
    s += std::string(to_string(r.method)) + "," + std::to_string(r.n) + "," + format_real(r.profit_mean, 4) +
         "," + format_real(r.profit_sd, 4) + "," + format_real(r.vtrue_mean) + "," + format_real(r.vpost_mean) +
         "," + format_real(r.vpost_ub95_mean) + "\n";
  }
  return s;
}

std::string trials_csv(const std::vector<TrialRecord>& trials) {
  std::string s = "alpha,method,trial,status,profit,v_true,v_post,v_post_ub95,clamped,seed,instance_stream\n";
  for (const auto& r : trials) {
    s += format_real(r.alpha, 4) + "," + std::string(to_string(r.method)) + "," + std::to_string(r.trial) + "," +
         r.status + "," + format_real(r.profit, 6) + "," + format_real(r.v_true) + "," + format_real(r.v_post) +
         "," + format_real(r.v_post_ub95, 8) + "," + (r.clamped ? "1" : "0") + "," + std::to_string(r.seed) + "," +
         std::to_string(r.instance_stream) + "\n";
  }
  return s;
}

}  // namespace postfeas
