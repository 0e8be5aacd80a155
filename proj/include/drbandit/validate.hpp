#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "drbandit/harness.hpp"
#include "drbandit/oracles.hpp"

namespace drbandit::validation {

using oracles::OracleRow;

inline std::string rows_to_csv(const std::vector<OracleRow>& rows) {
  std::string csv = "check,checkpoint,statistic,bound,pass\n";
  for (const OracleRow& row : rows) {
    csv += row.check + "," + format_double(row.checkpoint) + "," +
           format_double(row.statistic) + "," + format_double(row.bound) + "," +
           (row.pass ? "pass" : "fail") + "\n";
  }
  return csv;
}

inline bool all_pass(const std::vector<OracleRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const OracleRow& r) { return r.pass; });
}

namespace detail {

inline EnvSpec paper_env(int arms, int dim, std::uint64_t seed) {
  EnvSpec env;
  env.arms = arms;
  env.dim = dim;
  env.rho = 0.5;
  env.mu = default_mu(arms);
  env.sigma = 1.0;
  env.seed = seed;
  return env;
}

/// A moderately mixed (contexts, beta_hat, V) instance: a few environment
/// rounds absorbed into the Gram plus a perturbed coefficient estimate.
struct ProbInstance {
  ContextSet contexts;
  Eigen::VectorXd beta_hat;
  Eigen::MatrixXd v_matrix;
  double v_scale;
};

inline ProbInstance random_prob_instance(int arms, int dim, RngStream& rng,
                                         const ContextSampler& sampler) {
  ProbInstance instance;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(dim, dim);
  const int warm_rounds = 1 + rng.uniform_int(3);
  for (int round = 1; round <= warm_rounds; ++round) {
    const ContextSet contexts = sampler.draw(round, rng);
    gram += contexts.vectors.transpose() * contexts.vectors;
  }
  instance.contexts = sampler.draw(warm_rounds + 1, rng);
  // heterogeneous row norms spread the s_i/s_j ratios of the quadrature
  for (int i = 0; i < arms; ++i) {
    instance.contexts.vectors.row(i) *= 0.1 + 0.9 * rng.uniform01();
  }
  instance.v_matrix = gram;
  instance.beta_hat = gen_beta(dim, rng);
  for (int j = 0; j < dim; ++j) instance.beta_hat[j] += 0.1 * rng.normal();
  instance.v_scale = exploration_v(arms, 1.0 / (arms + 1.0));
  return instance;
}

}  // namespace detail

/// DR pseudo-reward unbiasedness under a maximally wrong imputation
/// (beta_check = 0) and a random selection distribution.
inline std::vector<OracleRow> dr_unbiasedness_rows(std::uint64_t seed = 101,
                                                   int arms = 10, int dim = 20,
                                                   long samples = 100000) {
  RngStream rng(seed, 0, StreamPurpose::oracle);
  const EnvSpec env = detail::paper_env(arms, dim, seed);
  ContextSampler sampler(env);
  const ContextSet contexts = sampler.draw(1, rng);
  TrueModel model;
  model.beta = gen_beta(dim, rng);
  model.sigma = 1.0;
  Eigen::VectorXd pi(arms);
  for (int i = 0; i < arms; ++i) pi[i] = 0.2 - std::log(rng.uniform01());
  pi /= pi.sum();
  const Eigen::VectorXd z = oracles::check_dr_unbiasedness(
      contexts, model, pi, Eigen::VectorXd::Zero(dim), samples, rng);
  const double worst = z.cwiseAbs().maxCoeff();
  return {{"dr_unbiasedness_max_abs_z", 0.0, worst, 4.0, worst <= 4.0}};
}

/// Closed-form post-resampling probabilities: normalization over random
/// triples plus agreement with the simulated stopping process.
inline std::vector<OracleRow> closed_form_rows(std::uint64_t seed = 102,
                                               int normalization_triples = 1000,
                                               int simulated_triples = 20,
                                               long trials = 100000) {
  RngStream rng(seed, 0, StreamPurpose::oracle);
  auto random_triple = [&rng](Eigen::VectorXd& pi_tilde, double& gamma, int& budget) {
    const int n = 2 + rng.uniform_int(9);
    pi_tilde.resize(n);
    for (int i = 0; i < n; ++i) pi_tilde[i] = -std::log(rng.uniform01());
    pi_tilde /= pi_tilde.sum();
    gamma = rng.uniform(1.0 / (n + 1.0), 1.0 / n);
    budget = 1 + rng.uniform_int(50);
  };

  double worst_sum_gap = 0.0;
  for (int rep = 0; rep < normalization_triples; ++rep) {
    Eigen::VectorXd pi_tilde;
    double gamma;
    int budget;
    random_triple(pi_tilde, gamma, budget);
    const Eigen::VectorXd pi = selection_prob_closed(pi_tilde, gamma, budget);
    worst_sum_gap = std::max(worst_sum_gap, std::fabs(pi.sum() - 1.0));
  }

  double worst_match_gap = 0.0;
  for (int rep = 0; rep < simulated_triples; ++rep) {
    Eigen::VectorXd pi_tilde;
    double gamma;
    int budget;
    random_triple(pi_tilde, gamma, budget);
    budget = 1 + rng.uniform_int(8);  // keep tail mass simulable
    const Eigen::VectorXd closed = selection_prob_closed(pi_tilde, gamma, budget);
    const Eigen::VectorXd simulated =
        oracles::simulate_resampling(pi_tilde, gamma, budget, trials, rng);
    worst_match_gap =
        std::max(worst_match_gap, (closed - simulated).lpNorm<Eigen::Infinity>());
  }

  return {{"closed_form_sum_gap", 0.0, worst_sum_gap, 1e-12, worst_sum_gap <= 1e-12},
          {"closed_form_vs_stopping_sim", 0.0, worst_match_gap, 0.01,
           worst_match_gap <= 0.01}};
}

/// Quasi-MC selection probabilities against the explicit-draw oracle: absolute
/// accuracy at M = 200 and error reduction from M = 100 to M = 400.
inline std::vector<OracleRow> qmc_rows(std::uint64_t seed = 103, int instances = 20,
                                       long mc_samples = 1000000, int arms = 10,
                                       int dim = 20) {
  RngStream rng(seed, 0, StreamPurpose::oracle);
  const EnvSpec env = detail::paper_env(arms, dim, seed);
  ContextSampler sampler(env);

  double worst_gap = 0.0;
  int improved = 0;
  for (int k = 0; k < instances; ++k) {
    const auto instance = detail::random_prob_instance(arms, dim, rng, sampler);
    const Eigen::VectorXd reference = oracles::mc_selection_prob(
        instance.contexts, instance.beta_hat, instance.v_matrix, instance.v_scale,
        mc_samples, rng);
    auto gap_at = [&](int points) {
      ProbConfig config;
      config.qmc_points = points;
      const Eigen::VectorXd pi =
          selection_prob_tilde(instance.contexts, instance.beta_hat, instance.v_matrix,
                               instance.v_scale, config);
      return (pi - reference).lpNorm<Eigen::Infinity>();
    };
    worst_gap = std::max(worst_gap, gap_at(200));
    if (gap_at(400) <= gap_at(100)) ++improved;
  }

  return {{"qmc_vs_mc_max_gap", 200.0, worst_gap, 0.01, worst_gap <= 0.01},
          {"qmc_error_reduction_count", 400.0, static_cast<double>(improved),
           std::ceil(0.8 * instances), improved >= static_cast<int>(std::ceil(0.8 * instances))}};
}

/// Frequency with which the first DRTS candidate falls in the super-
/// unsaturated set when v follows the exploration-scale formula.
inline OracleRow lemma2_row(std::uint64_t seed = 104, int rounds = 5000, int arms = 10,
                            int dim = 20) {
  const double gamma = 1.0 / (arms + 1.0);
  const double v = exploration_v(arms, gamma);
  ProbConfig prob;
  prob.gamma = gamma;

  EnvSpec env = detail::paper_env(arms, dim, seed);
  RngStream context_rng(seed, 0, StreamPurpose::contexts);
  RngStream beta_rng(seed, 0, StreamPurpose::beta);
  RngStream noise_rng(seed, 0, StreamPurpose::rewards);
  RngStream policy_rng(seed, 0, StreamPurpose::policy);

  env.beta = gen_beta(dim, beta_rng);
  ContextSampler sampler(env);
  DrtsPolicy policy(dim, LambdaSchedule{LambdaMode::algorithmic, 1.0}, v, prob);

  long members = 0;
  for (int t = 1; t <= rounds; ++t) {
    const ContextSet contexts = sampler.draw(t, context_rng);
    // Snapshot before deciding: membership is judged against H_t.
    const Eigen::VectorXd beta_hat = policy.state().beta_hat();
    const Eigen::MatrixXd v_matrix = policy.state().v();
    const PolicyDecision decision = policy.decide(contexts, t, policy_rng);
    const int candidate = decision.candidate_trace.front();
    const auto set =
        oracles::super_unsaturated_set(contexts, env.beta, beta_hat, v_matrix);
    if (std::find(set.begin(), set.end(), candidate) != set.end()) ++members;
    const double reward =
        contexts.vectors.row(decision.chosen).dot(env.beta) + env.sigma * noise_rng.normal();
    policy.update(contexts, decision, reward);
  }
  const double frequency = static_cast<double>(members) / rounds;
  const double bound = 1.0 - gamma - 0.02;
  return {"lemma2_candidate_in_super_unsaturated", static_cast<double>(rounds), frequency,
          bound, frequency >= bound};
}

/// Minimum-eigenvalue concentration violations against the allowed
/// delta/t^2 + Monte-Carlo slack.
inline std::vector<OracleRow> lemma4_rows(std::uint64_t seed = 105, int reps = 200,
                                          double delta = 0.1, int arms = 10, int dim = 20) {
  const EnvSpec env = detail::paper_env(arms, dim, seed);
  const auto report = oracles::check_min_eigen(env, delta, 1000, reps);
  std::vector<OracleRow> rows;
  for (std::size_t k = 0; k < report.checkpoints.size(); ++k) {
    rows.push_back({"lemma4_violation_freq", static_cast<double>(report.checkpoints[k]),
                    report.violation_freq[k], report.allowed[k],
                    report.violation_freq[k] <= report.allowed[k]});
  }
  return rows;
}

/// Martingale-norm boundedness (adversarial adapted directions).
inline OracleRow martingale_row(std::uint64_t seed = 106, int reps = 200) {
  RngStream rng(seed, 0, StreamPurpose::oracle);
  const auto report = oracles::check_martingale_norm(
      1.0, 10000, reps, oracles::MartingaleContexts::adversarial, rng);
  const double spread = report.spread();
  return {"lemma3_quantile_spread", 10000.0, spread, 3.0, spread <= 3.0};
}

/// Log-log slope of the DRTS estimation error over t in [500, 5000].
inline std::vector<OracleRow> rate_rows(std::uint64_t seed = 107, int reps = 10,
                                        int workers = 0) {
  RunConfig config;
  config.policy = PolicyKind::drts;
  config.horizon = 5000;
  config.reps = reps;
  config.arms = 10;
  config.dim = 20;
  config.seed = seed;
  config.workers = workers;
  const harness::ExperimentResult result = harness::run_experiment(config);

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long count = 0;
  for (int t = 500; t <= 5000; ++t) {
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(result.est_error.mean[static_cast<std::size_t>(t - 1)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return {{"theorem2_rate_slope_lower", 5000.0, slope, -0.65, slope >= -0.65},
          {"theorem2_rate_slope_upper", 5000.0, slope, -0.35, slope <= -0.35}};
}

/// Desk-scale reproduction of the three-policy comparison with the best-v
/// protocol, plus the resampling-exhaustion budget.
inline std::vector<OracleRow> figure_rows(std::uint64_t seed = 108, int horizon = 2000,
                                          int reps = 10, int arms = 20, int dim = 30,
                                          int workers = 0) {
  RunConfig base;
  base.horizon = horizon;
  base.reps = reps;
  base.arms = arms;
  base.dim = dim;
  base.seed = seed;
  base.workers = workers;
  const harness::SweepOutcome sweep = harness::run_sweep(base);
  const harness::ExperimentResult& lints = sweep.best_result(PolicyKind::lints);
  const harness::ExperimentResult& blts = sweep.best_result(PolicyKind::blts);
  const harness::ExperimentResult& drts = sweep.best_result(PolicyKind::drts);

  std::vector<OracleRow> rows;

  const double error_margin = lints.final_error_mean - drts.final_error_mean;
  rows.push_back({"figure_error_drts_below_lints", static_cast<double>(horizon),
                  drts.final_error_mean, lints.final_error_mean,
                  drts.final_error_mean < lints.final_error_mean});
  (void)error_margin;

  const double best_baseline = std::min(lints.final_regret_mean, blts.final_regret_mean);
  rows.push_back({"figure_regret_ratio", static_cast<double>(horizon),
                  drts.final_regret_mean, 1.1 * best_baseline,
                  drts.final_regret_mean <= 1.1 * best_baseline});

  auto window_max = [](const std::vector<double>& series, int lo, int hi) {
    double top = 0.0;
    for (int t = lo; t <= hi; ++t) top = std::max(top, series[static_cast<std::size_t>(t - 1)]);
    return top;
  };
  const double drts_ref = drts.est_error.mean[199];
  const double drts_ratio = window_max(drts.est_error.mean, 1, 200) / drts_ref;
  rows.push_back(
      {"figure_drts_early_stability", 200.0, drts_ratio, 2.0, drts_ratio <= 2.0});

  const double lints_ref = lints.est_error.mean[199];
  const double lints_ratio = window_max(lints.est_error.mean, 1, 200) / lints_ref;
  rows.push_back({"figure_lints_early_spike", 200.0, lints_ratio, 2.0,
                  lints_ratio >= 2.0});

  rows.push_back({"resample_exhausted_fraction", static_cast<double>(horizon),
                  drts.exhausted_fraction, 1.65 * base.delta,
                  drts.exhausted_fraction <= 1.65 * base.delta});
  return rows;
}

/// Incremental-vs-batch estimator equivalence on short random toys.
inline OracleRow incremental_row(std::uint64_t seed = 109, int seeds = 100,
                                 int rounds = 50) {
  double worst = 0.0;
  for (int s = 0; s < seeds; ++s) {
    RngStream rng(seed, static_cast<std::uint64_t>(s), StreamPurpose::oracle);
    const int arms = 3 + rng.uniform_int(4);
    const int dim = 2 + rng.uniform_int(5);
    DrState state(dim, LambdaSchedule{LambdaMode::algorithmic, 1.0});
    std::vector<RoundData> pooled;
    for (int t = 1; t <= rounds; ++t) {
      ContextSet contexts;
      contexts.round = t;
      contexts.vectors.resize(arms, dim);
      for (int i = 0; i < arms; ++i) {
        Eigen::VectorXd z(dim);
        for (int j = 0; j < dim; ++j) z[j] = rng.normal();
        const double scale = rng.uniform01();
        contexts.vectors.row(i) = (scale * z.normalized()).transpose();
      }
      Eigen::VectorXd pseudo(arms);
      for (int i = 0; i < arms; ++i) pseudo[i] = 4.0 * rng.normal();
      state = absorb_round(state, contexts, pseudo);
      pooled.push_back({contexts.vectors, pseudo});
    }
    const Eigen::VectorXd batch = dr_fit(pooled, state.lambda());
    const double rel =
        (state.beta_hat() - batch).norm() / std::max(1e-12, batch.norm());
    worst = std::max(worst, rel);
  }
  return {"incremental_vs_batch_rel_error", static_cast<double>(seeds), worst, 1e-8,
          worst <= 1e-8};
}

/// The full validation suite. `quick` shrinks sample counts for a smoke pass;
/// the acceptance-scale run uses the spec parameters.
inline std::vector<OracleRow> run_all(bool quick = false, int workers = 0,
                                      std::uint64_t seed = 20240501) {
  std::vector<OracleRow> rows;
  auto append = [&rows](const std::vector<OracleRow>& more) {
    rows.insert(rows.end(), more.begin(), more.end());
  };

  append(dr_unbiasedness_rows(seed + 1));
  append(closed_form_rows(seed + 2, quick ? 100 : 1000, quick ? 5 : 20,
                          quick ? 20000 : 100000));
  append(qmc_rows(seed + 3, quick ? 5 : 20, quick ? 200000 : 1000000));
  rows.push_back(lemma2_row(seed + 4, quick ? 1000 : 5000));
  append(lemma4_rows(seed + 5, quick ? 100 : 200));
  rows.push_back(martingale_row(seed + 6, quick ? 100 : 200));
  append(rate_rows(seed + 7, quick ? 4 : 10, workers));
  append(figure_rows(seed + 8, quick ? 400 : 2000, quick ? 4 : 10, 20, 30, workers));
  rows.push_back(incremental_row(seed + 9, quick ? 20 : 100));
  return rows;
}

}  // namespace drbandit::validation
