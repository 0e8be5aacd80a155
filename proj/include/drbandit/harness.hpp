#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "drbandit/config.hpp"
#include "drbandit/core.hpp"
#include "drbandit/env.hpp"
#include "drbandit/io.hpp"
#include "drbandit/plot.hpp"
#include "drbandit/policies.hpp"

namespace drbandit::harness {

/// Auto fields filled in: gamma defaults to 1/(N+1), v to the exploration
/// scale implied by gamma, mu to the symmetric default.
struct Resolved {
  double v = 0.0;
  double gamma = 0.0;
  LambdaSchedule schedule;
  EnvSpec env;  // beta left empty when drawn per replication
};

inline Resolved resolve(const RunConfig& config) {
  Resolved r;
  r.gamma = config.gamma ? *config.gamma : 1.0 / (config.arms + 1.0);
  r.v = config.v ? *config.v : exploration_v(config.arms, r.gamma);
  if (config.policy == PolicyKind::drts) {
    r.schedule = LambdaSchedule{config.lambda_mode, config.lambda_base, config.arms,
                                config.delta};
  } else {
    // Baselines keep a constant ridge regularizer.
    r.schedule = LambdaSchedule{LambdaMode::algorithmic, config.lambda_base};
  }
  r.env.arms = config.arms;
  r.env.dim = config.dim;
  r.env.rho = config.rho;
  r.env.sigma = config.sigma;
  r.env.seed = config.seed;
  if (config.mu) {
    r.env.mu = Eigen::Map<const Eigen::VectorXd>(config.mu->data(),
                                                 static_cast<long>(config.mu->size()));
  } else {
    r.env.mu = default_mu(config.arms);
  }
  if (config.beta) {
    r.env.beta = Eigen::Map<const Eigen::VectorXd>(config.beta->data(),
                                                   static_cast<long>(config.beta->size()));
  }
  validate_env_spec(r.env);
  return r;
}

namespace detail {

struct AnyPolicy {
  std::variant<LinTsPolicy, BltsPolicy, DrtsPolicy> impl;

  static AnyPolicy make(const RunConfig& config, const Resolved& resolved) {
    ProbConfig prob;
    prob.gamma = resolved.gamma;
    prob.qmc_points = config.qmc_points;
    prob.delta = config.delta;
    switch (config.policy) {
      case PolicyKind::lints:
        return {LinTsPolicy(config.dim, config.lambda_base, resolved.v)};
      case PolicyKind::blts:
        return {BltsPolicy(config.dim, config.lambda_base, resolved.v, resolved.gamma,
                           prob)};
      case PolicyKind::drts:
        return {DrtsPolicy(config.dim, resolved.schedule, resolved.v, prob)};
    }
    throw std::logic_error("unknown policy");
  }

  PolicyDecision decide(const ContextSet& contexts, int t, RngStream& rng) {
    return std::visit([&](auto& p) { return p.decide(contexts, t, rng); }, impl);
  }
  void update(const ContextSet& contexts, const PolicyDecision& decision, double reward) {
    std::visit([&](auto& p) { p.update(contexts, decision, reward); }, impl);
  }
  const Eigen::VectorXd& estimate() const {
    return std::visit([](const auto& p) -> const Eigen::VectorXd& { return p.estimate(); },
                      impl);
  }
};

/// Runs fn(0..count-1) on up to `workers` threads; first exception wins.
inline void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// One full observe-decide-reward-update episode. Deterministic given
/// (config, replication): every random draw comes from a stream keyed by
/// (seed, replication, purpose). Rewards for unchosen arms are generated but
/// never revealed to the policy.
inline MetricsSeries run_episode(const RunConfig& config, int replication) {
  config.validate();
  const Resolved resolved = resolve(config);

  RngStream context_rng(config.seed, static_cast<std::uint64_t>(replication),
                        StreamPurpose::contexts);
  RngStream beta_rng(config.seed, static_cast<std::uint64_t>(replication),
                     StreamPurpose::beta);
  RngStream noise_rng(config.seed, static_cast<std::uint64_t>(replication),
                      StreamPurpose::rewards);
  RngStream policy_rng(config.seed, static_cast<std::uint64_t>(replication),
                       StreamPurpose::policy);

  EnvSpec env = resolved.env;
  if (env.beta.size() == 0) env.beta = gen_beta(config.dim, beta_rng);
  validate_env_spec(env);
  const Eigen::VectorXd& beta = env.beta;
  ContextSampler sampler(env);

  detail::AnyPolicy policy = detail::AnyPolicy::make(config, resolved);
  MetricsSeries metrics;
  Eigen::VectorXd noise(config.arms);

  for (int t = 1; t <= config.horizon; ++t) {
    try {
      const ContextSet contexts = sampler.draw(t, context_rng);
      for (int i = 0; i < config.arms; ++i) noise[i] = noise_rng.normal();

      const PolicyDecision decision = policy.decide(contexts, t, policy_rng);
      const double reward =
          contexts.vectors.row(decision.chosen).dot(beta) +
          config.sigma * noise[decision.chosen];
      policy.update(contexts, decision, reward);

      metrics.push_round(compute_regret(contexts, beta, decision.chosen),
                         (policy.estimate() - beta).norm(), decision.resamples,
                         decision.resample_exhausted);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("episode failed at round " + std::to_string(t) + ": " +
                               e.what());
    }
  }
  return metrics;
}

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> sd;
};

struct ExperimentResult {
  PolicyKind policy = PolicyKind::drts;
  double v = 0.0;
  double gamma = 0.0;
  int horizon = 0;
  int reps = 0;
  int arms = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  SeriesStats inst_regret;
  SeriesStats cum_regret;
  SeriesStats est_error;
  SeriesStats resamples;
  double final_regret_mean = 0.0;
  double final_regret_sd = 0.0;
  double final_error_mean = 0.0;
  double final_error_sd = 0.0;
  double exhausted_fraction = 0.0;
};

namespace detail {

inline SeriesStats aggregate(const std::vector<std::vector<double>>& per_rep) {
  const int reps = static_cast<int>(per_rep.size());
  const std::size_t rounds = per_rep.front().size();
  SeriesStats stats;
  stats.mean.assign(rounds, 0.0);
  stats.sd.assign(rounds, 0.0);
  for (const auto& series : per_rep) {
    for (std::size_t t = 0; t < rounds; ++t) stats.mean[t] += series[t];
  }
  for (std::size_t t = 0; t < rounds; ++t) stats.mean[t] /= reps;
  if (reps > 1) {
    for (const auto& series : per_rep) {
      for (std::size_t t = 0; t < rounds; ++t) {
        const double diff = series[t] - stats.mean[t];
        stats.sd[t] += diff * diff;
      }
    }
    for (std::size_t t = 0; t < rounds; ++t)
      stats.sd[t] = std::sqrt(stats.sd[t] / (reps - 1));
  }
  return stats;
}

}  // namespace detail

/// Runs all replications (parallel up to config.workers) and aggregates
/// mean/sd series. Replications are aggregated in index order, so execution
/// order never changes a single emitted number.
inline ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  const Resolved resolved = resolve(config);
  std::vector<MetricsSeries> episodes(static_cast<std::size_t>(config.reps));
  detail::parallel_for(config.reps, config.workers, [&](int rep) {
    try {
      episodes[static_cast<std::size_t>(rep)] = run_episode(config, rep);
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(rep) + ": " + e.what());
    }
  });

  ExperimentResult result;
  result.policy = config.policy;
  result.v = resolved.v;
  result.gamma = config.policy == PolicyKind::lints ? 0.0 : resolved.gamma;
  result.horizon = config.horizon;
  result.reps = config.reps;
  result.arms = config.arms;
  result.dim = config.dim;
  result.seed = config.seed;

  std::vector<std::vector<double>> inst, cum, err, res;
  double exhausted = 0.0;
  for (const MetricsSeries& episode : episodes) {
    inst.push_back(episode.inst_regret());
    cum.push_back(episode.cum_regret());
    err.push_back(episode.est_error());
    res.emplace_back(episode.resamples().begin(), episode.resamples().end());
    exhausted += episode.exhausted_fraction();
  }
  result.inst_regret = detail::aggregate(inst);
  result.cum_regret = detail::aggregate(cum);
  result.est_error = detail::aggregate(err);
  result.resamples = detail::aggregate(res);
  result.exhausted_fraction = exhausted / config.reps;
  result.final_regret_mean = result.cum_regret.mean.back();
  result.final_regret_sd = result.cum_regret.sd.back();
  result.final_error_mean = result.est_error.mean.back();
  result.final_error_sd = result.est_error.sd.back();
  return result;
}

// ---------------------------------------------------------------------------
// Output emission

inline std::string version_string() {
#ifdef DRBANDIT_VERSION
  return DRBANDIT_VERSION;
#else
  return "unknown";
#endif
}

/// Per-round CSV with the fixed schema
/// round,metric,mean,sd,policy,N,d,v,gamma,seed (UTF-8, LF, '.' decimals,
/// shortest round-trip doubles).
inline std::string rounds_csv(const std::vector<ExperimentResult>& results) {
  std::string csv = "round,metric,mean,sd,policy,N,d,v,gamma,seed\n";
  for (const ExperimentResult& r : results) {
    const std::string suffix = "," + to_string(r.policy) + "," + std::to_string(r.arms) +
                               "," + std::to_string(r.dim) + "," + format_double(r.v) +
                               "," + format_double(r.gamma) + "," + format_u64(r.seed) +
                               "\n";
    const std::pair<const char*, const SeriesStats*> metrics[] = {
        {"inst_regret", &r.inst_regret},
        {"cum_regret", &r.cum_regret},
        {"est_error", &r.est_error},
        {"resamples", &r.resamples}};
    for (const auto& [name, stats] : metrics) {
      for (std::size_t t = 0; t < stats->mean.size(); ++t) {
        csv += std::to_string(t + 1);
        csv += ',';
        csv += name;
        csv += ',';
        csv += format_double(stats->mean[t]);
        csv += ',';
        csv += format_double(stats->sd[t]);
        csv += suffix;
      }
    }
  }
  return csv;
}

inline std::string summary_csv(const std::vector<ExperimentResult>& results) {
  std::string csv =
      "policy,N,d,T,reps,v,gamma,seed,final_cum_regret_mean,final_cum_regret_sd,"
      "final_est_error_mean,final_est_error_sd,resample_exhausted_fraction\n";
  for (const ExperimentResult& r : results) {
    csv += to_string(r.policy) + "," + std::to_string(r.arms) + "," +
           std::to_string(r.dim) + "," + std::to_string(r.horizon) + "," +
           std::to_string(r.reps) + "," + format_double(r.v) + "," +
           format_double(r.gamma) + "," + format_u64(r.seed) + "," +
           format_double(r.final_regret_mean) + "," + format_double(r.final_regret_sd) +
           "," + format_double(r.final_error_mean) + "," +
           format_double(r.final_error_sd) + "," +
           format_double(r.exhausted_fraction) + "\n";
  }
  return csv;
}

/// Writes per-round CSV, summary CSV, the two metric plots, and a manifest
/// that reloads into the identical run.
inline void emit_outputs(const RunConfig& config,
                         const std::vector<ExperimentResult>& results,
                         const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  write_text_file(dir / "rounds.csv", rounds_csv(results));
  write_text_file(dir / "summary.csv", summary_csv(results));

  auto series_for = [&](const ExperimentResult& r, const SeriesStats& stats) {
    PlotSeries s;
    s.label = to_string(r.policy) + " (v=" + format_double(r.v) + ")";
    s.x.resize(stats.mean.size());
    for (std::size_t t = 0; t < stats.mean.size(); ++t) s.x[t] = static_cast<double>(t + 1);
    s.y = stats.mean;
    s.sd = stats.sd;
    return s;
  };

  std::vector<PlotSeries> regret_series, error_series;
  for (const ExperimentResult& r : results) {
    regret_series.push_back(series_for(r, r.cum_regret));
    error_series.push_back(series_for(r, r.est_error));
  }
  write_text_file(dir / "cum_regret.svg",
                  render_line_plot("Cumulative regret", "round", "cumulative regret",
                                   regret_series));
  write_text_file(dir / "est_error.svg",
                  render_line_plot("Estimation error", "round", "estimation error",
                                   error_series));

  std::string manifest = "# drbandit " + version_string() + " manifest\n";
  manifest += config.to_table().serialize();
  write_text_file(dir / "manifest.toml", manifest);
}

// ---------------------------------------------------------------------------
// Hyperparameter sweep

struct SweepCell {
  PolicyKind policy;
  double v;
  std::optional<double> gamma;  // BLTS only
  ExperimentResult result;
};

struct SweepOutcome {
  std::vector<SweepCell> cells;
  std::map<std::string, std::size_t> best;  // policy name -> index into cells

  const ExperimentResult& best_result(PolicyKind kind) const {
    return cells.at(best.at(to_string(kind))).result;
  }
};

/// Grid evaluation per policy: every v in v_grid, and for BLTS additionally
/// every gamma in gamma_grid. The per-policy winner is the cell with the
/// minimum final mean cumulative regret.
inline SweepOutcome run_sweep(const RunConfig& base, std::vector<PolicyKind> policies = {
                                                         PolicyKind::lints,
                                                         PolicyKind::blts,
                                                         PolicyKind::drts}) {
  SweepOutcome outcome;
  for (PolicyKind kind : policies) {
    for (double v : base.v_grid) {
      std::vector<std::optional<double>> gammas;
      if (kind == PolicyKind::blts) {
        for (double g : base.gamma_grid) gammas.emplace_back(g);
      } else {
        gammas.emplace_back(std::nullopt);  // drts: auto 1/(N+1); lints: unused
      }
      for (const auto& gamma : gammas) {
        RunConfig config = base;
        config.policy = kind;
        config.v = v;
        config.gamma = gamma;
        SweepCell cell{kind, v, gamma, run_experiment(config)};
        outcome.cells.push_back(std::move(cell));
      }
    }
  }
  for (std::size_t i = 0; i < outcome.cells.size(); ++i) {
    const std::string name = to_string(outcome.cells[i].policy);
    const auto it = outcome.best.find(name);
    if (it == outcome.best.end() ||
        outcome.cells[i].result.final_regret_mean <
            outcome.cells[it->second].result.final_regret_mean) {
      outcome.best[name] = i;
    }
  }
  return outcome;
}

/// Best-cell-per-policy runs for the side-by-side figure.
inline std::vector<ExperimentResult> figure_results(const SweepOutcome& outcome) {
  std::vector<ExperimentResult> results;
  for (PolicyKind kind : {PolicyKind::lints, PolicyKind::blts, PolicyKind::drts}) {
    const auto it = outcome.best.find(to_string(kind));
    if (it != outcome.best.end()) results.push_back(outcome.cells[it->second].result);
  }
  return results;
}

}  // namespace drbandit::harness
