#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "drbandit/core.hpp"

namespace drbandit {

/// One complete record: context, observed reward, and the selection
/// probability the record was observed under.
struct ChosenRecord {
  Eigen::VectorXd context;
  double reward = 0.0;
  double propensity = 1.0;
};

using ChosenHistory = std::vector<ChosenRecord>;

/// Incremental weighted ridge sufficient statistics (Gram and moment sums).
class RidgeAccumulator {
 public:
  explicit RidgeAccumulator(int dim)
      : gram_(Eigen::MatrixXd::Zero(dim, dim)), xty_(Eigen::VectorXd::Zero(dim)) {
    if (dim < 1) throw std::invalid_argument("RidgeAccumulator: dim must be >= 1");
  }

  void add(const Eigen::VectorXd& x, double y, double weight = 1.0) {
    if (x.size() != xty_.size())
      throw std::invalid_argument("RidgeAccumulator: dimension mismatch");
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(x, weight);
    xty_ += weight * y * x;
    ++count_;
  }

  int count() const { return count_; }
  int dim() const { return static_cast<int>(xty_.size()); }
  Eigen::MatrixXd gram() const {
    return gram_.selfadjointView<Eigen::Lower>();
  }
  const Eigen::VectorXd& moment() const { return xty_; }

  Eigen::VectorXd solve(double lambda) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("ridge: lambda must be positive");
    Eigen::MatrixXd v = gram();
    v.diagonal().array() += lambda;
    return DrState::solve_spd(v, xty_);
  }

 private:
  Eigen::MatrixXd gram_;  // lower triangle holds sum w x x^T
  Eigen::VectorXd xty_;
  int count_ = 0;
};

/// Plain ridge on the chosen records, ignoring propensities.
inline Eigen::VectorXd ridge_fit(const ChosenHistory& history, double lambda, int dim) {
  RidgeAccumulator acc(dim);
  for (const auto& record : history) acc.add(record.context, record.reward);
  return acc.solve(lambda);
}

/// Inverse-propensity-weighted ridge; each record weighs 1/max(propensity, gamma).
inline Eigen::VectorXd ipw_ridge_fit(const ChosenHistory& history, double lambda,
                                     double gamma, int dim) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("ipw_ridge_fit: gamma must lie in (0,1)");
  RidgeAccumulator acc(dim);
  for (const auto& record : history) {
    if (!(record.propensity > 0.0))
      throw std::invalid_argument("ipw_ridge_fit: propensity must be positive");
    acc.add(record.context, record.reward, 1.0 / std::max(record.propensity, gamma));
  }
  return acc.solve(lambda);
}

/// Doubly robust pseudo-rewards:
///   Y_i = (1 - 1{i = chosen}/pi_i) x_i^T beta_check + (1{i = chosen}/pi_i) reward.
/// Unchosen arms get the imputed value x_i^T beta_check.
inline Eigen::VectorXd dr_pseudo_rewards(const ContextSet& contexts, int chosen,
                                         double reward, const Eigen::VectorXd& pi,
                                         const Eigen::VectorXd& beta_check) {
  if (chosen < 0 || chosen >= contexts.arms())
    throw std::invalid_argument("dr_pseudo_rewards: chosen arm out of range");
  if (pi.size() != contexts.arms())
    throw std::invalid_argument("dr_pseudo_rewards: pi size mismatch");
  if (beta_check.size() != contexts.dim())
    throw std::invalid_argument("dr_pseudo_rewards: beta_check dimension mismatch");
  if (!beta_check.allFinite())
    throw std::invalid_argument("dr_pseudo_rewards: beta_check must be finite");
  const double p = pi[chosen];
  if (!(p > 0.0))
    throw std::invalid_argument("dr_pseudo_rewards: chosen-arm probability must be positive");
  Eigen::VectorXd pseudo = contexts.vectors * beta_check;
  pseudo[chosen] = (1.0 - 1.0 / p) * pseudo[chosen] + reward / p;
  return pseudo;
}

/// Pooled (contexts, pseudo-rewards) for one round; used by the batch solve.
struct RoundData {
  Eigen::MatrixXd contexts;        // N x d
  Eigen::VectorXd pseudo_rewards;  // N
};

/// Batch doubly robust ridge over all rounds, the one-shot reference for the
/// incremental DrState path.
inline Eigen::VectorXd dr_fit(const std::vector<RoundData>& pooled, double lambda_t) {
  if (!(lambda_t > 0.0)) throw std::invalid_argument("dr_fit: lambda must be positive");
  if (pooled.empty()) throw std::invalid_argument("dr_fit: no rounds provided");
  const int dim = static_cast<int>(pooled.front().contexts.cols());
  Eigen::MatrixXd gram = lambda_t * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(dim);
  for (const auto& round : pooled) {
    if (round.contexts.cols() != dim || round.pseudo_rewards.size() != round.contexts.rows())
      throw std::invalid_argument("dr_fit: inconsistent round data");
    gram += round.contexts.transpose() * round.contexts;
    moment += round.contexts.transpose() * round.pseudo_rewards;
  }
  return DrState::solve_spd(gram, moment);
}

}  // namespace drbandit
