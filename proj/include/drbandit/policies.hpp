#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "drbandit/core.hpp"
#include "drbandit/estimators.hpp"
#include "drbandit/probcalc.hpp"
#include "drbandit/rng.hpp"

namespace drbandit {

/// What a decision rule reports back to the caller for one round.
struct PolicyDecision {
  int chosen = -1;
  int resamples = 1;
  bool resample_exhausted = false;
  std::vector<int> candidate_trace;  // every m_t drawn this round
  Eigen::VectorXd pi_tilde;          // empty for LinTS
  Eigen::VectorXd pi;                // post-resampling probabilities (DRTS)
  double propensity = 1.0;           // recorded probability of the chosen arm
};

/// Factor A with A A^T = v^2 * M^{-1}, for sampling N(mu, v^2 M^{-1}) as
/// mu + A z. Zero matrix when v = 0 (degenerate greedy draws).
inline Eigen::MatrixXd gaussian_factor(const Eigen::MatrixXd& matrix, double v_scale) {
  const int d = static_cast<int>(matrix.rows());
  if (v_scale == 0.0) return Eigen::MatrixXd::Zero(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gaussian_factor: matrix must be positive definite");
  return v_scale * llt.matrixU().solve(Eigen::MatrixXd::Identity(d, d));
}

namespace detail {

/// Per-arm independent draws btilde_i = beta_hat + A z_i; returns the
/// lowest-index argmax of x_i^T btilde_i. Arms consume normals in order.
inline int draw_independent_argmax(const ContextSet& contexts,
                                   const Eigen::VectorXd& beta_hat,
                                   const Eigen::MatrixXd& factor, RngStream& rng) {
  const int n = contexts.arms();
  const int d = contexts.dim();
  Eigen::VectorXd z(d);
  Eigen::VectorXd scores(n);
  const Eigen::MatrixXd projected = contexts.vectors * factor;  // row i = x_i^T A
  const Eigen::VectorXd mean_scores = contexts.vectors * beta_hat;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    scores[i] = mean_scores[i] + projected.row(i).dot(z);
  }
  return argmax_lowest(scores);
}

}  // namespace detail

/// LinTS baseline: one shared posterior draw btilde ~ N(beta_ridge, v^2 A^{-1})
/// around the complete-record ridge estimate, then greedy on the draw.
inline PolicyDecision lints_decide(const Eigen::MatrixXd& gram,
                                   const Eigen::VectorXd& beta_ridge,
                                   const ContextSet& contexts, double v_scale,
                                   RngStream& rng) {
  validate_context_set(contexts);
  if (beta_ridge.size() != contexts.dim())
    throw std::invalid_argument("lints_decide: estimate dimension mismatch");
  const Eigen::MatrixXd factor = gaussian_factor(gram, v_scale);
  Eigen::VectorXd z(contexts.dim());
  for (int j = 0; j < contexts.dim(); ++j) z[j] = rng.normal();
  const Eigen::VectorXd beta_tilde = beta_ridge + factor * z;
  PolicyDecision decision;
  decision.chosen = argmax_lowest(contexts.vectors * beta_tilde);
  decision.candidate_trace.push_back(decision.chosen);
  return decision;
}

/// DRTS decision (resampling loop): draws per-arm candidates from
/// N(beta_hat, v^2 V^{-1}) until the candidate's single-draw win probability
/// exceeds gamma, up to the round budget M_t. pi_tilde is computed once per
/// round; the closed-form post-resampling pi is attached for the DR update.
inline PolicyDecision drts_decide(const DrState& state, const ContextSet& contexts,
                                  double v_scale, const ProbConfig& config, int t,
                                  RngStream& rng) {
  validate_context_set(contexts);
  validate_prob_config(config, contexts.arms());
  if (t < 1) throw std::invalid_argument("drts_decide: t must be >= 1");
  if (contexts.dim() != state.dim())
    throw std::invalid_argument("drts_decide: state dimension mismatch");

  const int n = contexts.arms();
  PolicyDecision decision;
  // At t = 1 the state is the zero prior and every arm wins with the same
  // probability; skip the quadrature and use the uniform vector directly.
  decision.pi_tilde = t == 1 ? Eigen::VectorXd::Constant(n, 1.0 / n)
                             : selection_prob_tilde(contexts, state.beta_hat(),
                                                    state.v(), v_scale, config);

  const int budget = max_resamples(t, config.delta, config.gamma);
  const Eigen::MatrixXd factor = gaussian_factor(state.v(), v_scale);

  decision.resample_exhausted = true;
  for (int attempt = 1; attempt <= budget; ++attempt) {
    const int candidate =
        detail::draw_independent_argmax(contexts, state.beta_hat(), factor, rng);
    decision.candidate_trace.push_back(candidate);
    decision.chosen = candidate;
    decision.resamples = attempt;
    if (decision.pi_tilde[candidate] > config.gamma) {
      decision.resample_exhausted = false;
      break;
    }
  }

  decision.pi = selection_prob_closed(decision.pi_tilde, config.gamma, budget);
  decision.propensity = decision.pi[decision.chosen];
  return decision;
}

/// BLTS baseline: per-arm independent draws around the IPW-weighted ridge
/// estimate; no resampling. The recorded propensity is the gamma-truncated
/// single-draw win probability of the chosen arm.
inline PolicyDecision blts_decide(const Eigen::MatrixXd& weighted_gram,
                                  const Eigen::VectorXd& beta_ipw,
                                  const ContextSet& contexts, double v_scale,
                                  double gamma, const ProbConfig& config,
                                  RngStream& rng) {
  validate_context_set(contexts);
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("blts_decide: gamma must lie in (0,1]");
  PolicyDecision decision;
  decision.pi_tilde =
      selection_prob_tilde(contexts, beta_ipw, weighted_gram, v_scale, config);
  const Eigen::MatrixXd factor = gaussian_factor(weighted_gram, v_scale);
  decision.chosen = detail::draw_independent_argmax(contexts, beta_ipw, factor, rng);
  decision.candidate_trace.push_back(decision.chosen);
  decision.pi = decision.pi_tilde;
  decision.propensity = std::max(decision.pi_tilde[decision.chosen], gamma);
  return decision;
}

/// Stateful LinTS wrapper: complete-record Gram/ridge updated from the chosen
/// pair only.
class LinTsPolicy {
 public:
  LinTsPolicy(int dim, double lambda, double v_scale)
      : acc_(dim),
        lambda_(lambda),
        v_scale_(v_scale),
        gram_(lambda * Eigen::MatrixXd::Identity(dim, dim)),
        estimate_(Eigen::VectorXd::Zero(dim)) {
    if (!(lambda > 0.0)) throw std::invalid_argument("LinTsPolicy: lambda must be positive");
  }

  PolicyDecision decide(const ContextSet& contexts, int /*t*/, RngStream& rng) const {
    return lints_decide(gram_, estimate_, contexts, v_scale_, rng);
  }

  void update(const ContextSet& contexts, const PolicyDecision& decision, double reward) {
    acc_.add(contexts.vectors.row(decision.chosen).transpose(), reward);
    gram_ = acc_.gram();
    gram_.diagonal().array() += lambda_;
    estimate_ = acc_.solve(lambda_);
  }

  const Eigen::VectorXd& estimate() const { return estimate_; }

 private:
  RidgeAccumulator acc_;
  double lambda_;
  double v_scale_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd estimate_;
};

/// Stateful BLTS wrapper: IPW-weighted complete-record ridge.
class BltsPolicy {
 public:
  BltsPolicy(int dim, double lambda, double v_scale, double gamma, ProbConfig config)
      : acc_(dim),
        lambda_(lambda),
        v_scale_(v_scale),
        gamma_(gamma),
        config_(config),
        gram_(lambda * Eigen::MatrixXd::Identity(dim, dim)),
        estimate_(Eigen::VectorXd::Zero(dim)) {
    if (!(lambda > 0.0)) throw std::invalid_argument("BltsPolicy: lambda must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw std::invalid_argument("BltsPolicy: gamma must lie in (0,1]");
  }

  PolicyDecision decide(const ContextSet& contexts, int /*t*/, RngStream& rng) const {
    return blts_decide(gram_, estimate_, contexts, v_scale_, gamma_, config_, rng);
  }

  void update(const ContextSet& contexts, const PolicyDecision& decision, double reward) {
    const double weight = 1.0 / std::max(decision.propensity, gamma_);
    acc_.add(contexts.vectors.row(decision.chosen).transpose(), reward, weight);
    gram_ = acc_.gram();
    gram_.diagonal().array() += lambda_;
    estimate_ = acc_.solve(lambda_);
  }

  const Eigen::VectorXd& estimate() const { return estimate_; }

 private:
  RidgeAccumulator acc_;
  double lambda_;
  double v_scale_;
  double gamma_;
  ProbConfig config_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd estimate_;
};

/// Stateful DRTS wrapper: carries the DR sufficient statistics and the
/// imputation ridge on chosen pairs (lambda = 1, refreshed every round).
class DrtsPolicy {
 public:
  DrtsPolicy(int dim, LambdaSchedule schedule, double v_scale, ProbConfig config)
      : state_(dim, schedule),
        chosen_acc_(dim),
        v_scale_(v_scale),
        config_(config),
        beta_check_(Eigen::VectorXd::Zero(dim)) {}

  PolicyDecision decide(const ContextSet& contexts, int t, RngStream& rng) const {
    if (t != state_.rounds() + 1)
      throw std::logic_error("DrtsPolicy: round index out of step with state");
    return drts_decide(state_, contexts, v_scale_, config_, t, rng);
  }

  /// Absorbs the round: DR pseudo-rewards from the cached pi, then the
  /// sufficient-statistics update, then the imputation refresh for t+1.
  /// Returns the full round record.
  RoundOutcome update(const ContextSet& contexts, const PolicyDecision& decision,
                      double reward) {
    RoundOutcome outcome;
    outcome.chosen = decision.chosen;
    outcome.reward = reward;
    outcome.pi_tilde = decision.pi_tilde;
    outcome.pi = decision.pi;
    outcome.resamples = decision.resamples;
    outcome.resample_exhausted = decision.resample_exhausted;
    outcome.pseudo_rewards =
        dr_pseudo_rewards(contexts, decision.chosen, reward, decision.pi, beta_check_);
    state_ = state_.absorbed(contexts, outcome.pseudo_rewards);
    chosen_acc_.add(contexts.vectors.row(decision.chosen).transpose(), reward);
    beta_check_ = chosen_acc_.solve(1.0);
    return outcome;
  }

  const DrState& state() const { return state_; }
  const Eigen::VectorXd& estimate() const { return state_.beta_hat(); }
  const Eigen::VectorXd& imputation() const { return beta_check_; }

 private:
  DrState state_;
  RidgeAccumulator chosen_acc_;
  double v_scale_;
  ProbConfig config_;
  Eigen::VectorXd beta_check_;
};

}  // namespace drbandit
