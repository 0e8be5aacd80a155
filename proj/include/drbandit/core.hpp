#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drbandit {

/// Per-arm context vectors for one round, one row per arm.
struct ContextSet {
  int round = 1;
  Eigen::MatrixXd vectors;  // N x d

  int arms() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

/// Checks the structural invariants: N >= 2, d >= 1, finite entries, and
/// every row inside the unit ball.
inline void validate_context_set(const ContextSet& contexts) {
  if (contexts.round < 1) throw std::invalid_argument("context set: round must be >= 1");
  if (contexts.arms() < 2) throw std::invalid_argument("context set: need at least 2 arms");
  if (contexts.dim() < 1) throw std::invalid_argument("context set: need dimension >= 1");
  if (!contexts.vectors.allFinite())
    throw std::invalid_argument("context set: entries must be finite");
  for (int i = 0; i < contexts.arms(); ++i) {
    if (contexts.vectors.row(i).norm() > 1.0 + 1e-12)
      throw std::invalid_argument("context set: row " + std::to_string(i) +
                                  " exceeds unit norm");
  }
}

/// Ground-truth linear model, simulation only.
struct TrueModel {
  Eigen::VectorXd beta;
  double sigma = 1.0;
};

enum class LambdaMode { algorithmic, theoretical };

/// Ridge regularizer schedule. `algorithmic` grows as base * sqrt(t);
/// `theoretical` uses 4*sqrt(2)*N*sqrt(t*log(12 t^2 / delta)). At t = 0 both
/// fall back to `base` so the initial Gram stays positive definite.
struct LambdaSchedule {
  LambdaMode mode = LambdaMode::algorithmic;
  double base = 1.0;
  int arms = 0;        // theoretical mode only
  double delta = 0.1;  // theoretical mode only

  double at(int t) const {
    if (t < 0) throw std::invalid_argument("lambda schedule: t must be >= 0");
    if (t == 0) return base;
    if (mode == LambdaMode::algorithmic) return base * std::sqrt(static_cast<double>(t));
    if (arms < 1 || !(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("lambda schedule: theoretical mode needs arms and delta");
    const double td = static_cast<double>(t);
    return 4.0 * std::sqrt(2.0) * arms * std::sqrt(td * std::log(12.0 * td * td / delta));
  }
};

/// Sufficient statistics of the doubly robust ridge estimator. Value type:
/// absorbing a round produces a fresh snapshot, so concurrent readers of an
/// existing state are always safe.
class DrState {
 public:
  DrState(int dim, LambdaSchedule schedule)
      : schedule_(schedule),
        t_(0),
        f_(Eigen::VectorXd::Zero(dim)),
        w_(Eigen::MatrixXd::Zero(dim, dim)),
        beta_hat_(Eigen::VectorXd::Zero(dim)) {
    if (dim < 1 || dim > 64) throw std::invalid_argument("DrState: dim must be in [1,64]");
    lambda_ = schedule_.at(0);
    if (!(lambda_ > 0.0)) throw std::invalid_argument("DrState: lambda_0 must be positive");
    v_ = lambda_ * Eigen::MatrixXd::Identity(dim, dim);
  }

  int rounds() const { return t_; }
  int dim() const { return static_cast<int>(f_.size()); }
  double lambda() const { return lambda_; }
  const LambdaSchedule& schedule() const { return schedule_; }
  const Eigen::VectorXd& f() const { return f_; }
  const Eigen::MatrixXd& w() const { return w_; }
  const Eigen::MatrixXd& v() const { return v_; }
  const Eigen::VectorXd& beta_hat() const { return beta_hat_; }

  /// Returns the state after absorbing one round of contexts and pseudo-
  /// rewards: F += sum_i x_i y_i, W += sum_i x_i x_i^T, V = W + lambda_t I,
  /// beta_hat re-solved from V beta = F.
  [[nodiscard]] DrState absorbed(const ContextSet& contexts,
                                 const Eigen::VectorXd& pseudo_rewards) const {
    validate_context_set(contexts);
    if (contexts.dim() != dim())
      throw std::invalid_argument("absorb_round: context dimension mismatch");
    if (pseudo_rewards.size() != contexts.arms())
      throw std::invalid_argument("absorb_round: pseudo-reward count mismatch");
    if (!pseudo_rewards.allFinite())
      throw std::runtime_error("absorb_round: non-finite pseudo-reward");

    DrState next(*this);
    next.t_ = t_ + 1;
    next.f_ += contexts.vectors.transpose() * pseudo_rewards;
    next.w_ += contexts.vectors.transpose() * contexts.vectors;
    next.w_ = 0.5 * (next.w_ + next.w_.transpose().eval());  // keep exactly symmetric
    next.lambda_ = schedule_.at(next.t_);
    next.v_ = next.w_ + next.lambda_ * Eigen::MatrixXd::Identity(dim(), dim());
    next.beta_hat_ = solve_spd(next.v_, next.f_);
    return next;
  }

  /// Solves V x = f by Cholesky with one step of iterative refinement.
  /// Residual above 1e-10 (scaled by the data magnitude) is an error.
  static Eigen::VectorXd solve_spd(const Eigen::MatrixXd& v, const Eigen::VectorXd& f) {
    Eigen::LLT<Eigen::MatrixXd> llt(v);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("DrState: Cholesky factorization failed");
    Eigen::VectorXd x = llt.solve(f);
    x += llt.solve(f - v * x);
    const double residual = (v * x - f).lpNorm<Eigen::Infinity>();
    const double tol = 1e-10 * std::max(1.0, f.lpNorm<Eigen::Infinity>());
    if (!(residual <= tol))
      throw std::runtime_error("DrState: solve residual " + std::to_string(residual) +
                               " exceeds tolerance");
    return x;
  }

 private:
  LambdaSchedule schedule_;
  int t_;
  double lambda_;
  Eigen::VectorXd f_;
  Eigen::MatrixXd w_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd beta_hat_;
};

inline DrState absorb_round(const DrState& state, const ContextSet& contexts,
                            const Eigen::VectorXd& pseudo_rewards) {
  return state.absorbed(contexts, pseudo_rewards);
}

/// Lowest-index argmax, the tie-breaking rule used everywhere.
inline int argmax_lowest(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw std::invalid_argument("argmax_lowest: empty vector");
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

/// Lowest-index argmax of x_i^T beta.
inline int best_arm(const ContextSet& contexts, const Eigen::VectorXd& beta) {
  if (contexts.dim() != beta.size())
    throw std::invalid_argument("best_arm: dimension mismatch between contexts and beta");
  return argmax_lowest(contexts.vectors * beta);
}

/// Instantaneous regret max_i x_i^T beta - x_chosen^T beta (>= 0).
inline double compute_regret(const ContextSet& contexts, const Eigen::VectorXd& beta,
                             int chosen) {
  if (contexts.dim() != beta.size())
    throw std::invalid_argument("compute_regret: dimension mismatch");
  if (chosen < 0 || chosen >= contexts.arms())
    throw std::invalid_argument("compute_regret: chosen arm out of range");
  const Eigen::VectorXd values = contexts.vectors * beta;
  return values.maxCoeff() - values[chosen];
}

/// Everything one round of a policy produced, kept for estimation and
/// diagnostics.
struct RoundOutcome {
  int chosen = -1;
  double reward = 0.0;
  Eigen::VectorXd pi_tilde;        // single-draw argmax-win probabilities
  Eigen::VectorXd pi;              // post-resampling selection probabilities
  Eigen::VectorXd pseudo_rewards;  // Y^DR per arm
  int resamples = 1;
  bool resample_exhausted = false;
};

/// Per-round metric arrays for one episode.
class MetricsSeries {
 public:
  void push_round(double inst_regret, double est_error, int resamples,
                  bool exhausted) {
    if (inst_regret < 0.0 && inst_regret > -1e-12) inst_regret = 0.0;
    if (inst_regret < 0.0) throw std::invalid_argument("metrics: negative regret");
    const double prev = cum_regret_.empty() ? 0.0 : cum_regret_.back();
    inst_regret_.push_back(inst_regret);
    cum_regret_.push_back(prev + inst_regret);
    est_error_.push_back(est_error);
    resamples_.push_back(resamples);
    exhausted_.push_back(exhausted);
  }

  int rounds() const { return static_cast<int>(inst_regret_.size()); }
  const std::vector<double>& inst_regret() const { return inst_regret_; }
  const std::vector<double>& cum_regret() const { return cum_regret_; }
  const std::vector<double>& est_error() const { return est_error_; }
  const std::vector<int>& resamples() const { return resamples_; }
  const std::vector<bool>& exhausted() const { return exhausted_; }

  double final_cum_regret() const { return cum_regret_.empty() ? 0.0 : cum_regret_.back(); }
  double exhausted_fraction() const {
    if (exhausted_.empty()) return 0.0;
    double n = 0;
    for (bool e : exhausted_) n += e ? 1.0 : 0.0;
    return n / static_cast<double>(exhausted_.size());
  }

 private:
  std::vector<double> inst_regret_;
  std::vector<double> cum_regret_;
  std::vector<double> est_error_;
  std::vector<int> resamples_;
  std::vector<bool> exhausted_;
};

}  // namespace drbandit
