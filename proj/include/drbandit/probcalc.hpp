#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "drbandit/core.hpp"
#include "drbandit/math.hpp"

namespace drbandit {

/// Selection-probability machinery configuration.
struct ProbConfig {
  double gamma = 0.0;  // resampling acceptance threshold
  int qmc_points = 200;
  double delta = 0.1;  // per-round failure budget delta/t^2
  enum class PointSet { midpoint, sobol } points = PointSet::midpoint;
};

/// Enforces gamma in [1/(N+1), 1/N) plus the remaining field ranges.
inline void validate_prob_config(const ProbConfig& config, int arms) {
  if (arms < 2) throw std::invalid_argument("prob config: need at least 2 arms");
  const double lo = 1.0 / (arms + 1.0);
  const double hi = 1.0 / arms;
  if (!(config.gamma >= lo && config.gamma < hi))
    throw std::invalid_argument("prob config: gamma must lie in [1/(N+1), 1/N)");
  if (config.qmc_points < 16)
    throw std::invalid_argument("prob config: need at least 16 quasi-MC points");
  if (!(config.delta > 0.0 && config.delta < 1.0))
    throw std::invalid_argument("prob config: delta must lie in (0,1)");
}

/// Exploration scale v = (2 log(N / (1 - gamma N)))^{-1/2}.
inline double exploration_v(int arms, double gamma) {
  if (arms < 2) throw std::invalid_argument("exploration_v: need at least 2 arms");
  if (!(gamma > 0.0) || gamma * arms >= 1.0)
    throw std::invalid_argument("exploration_v: gamma*N must lie in (0,1)");
  return 1.0 / std::sqrt(2.0 * std::log(arms / (1.0 - gamma * arms)));
}

/// Resampling budget: smallest integer strictly greater than
/// log(t^2/delta) / log(1/(1-gamma)). Keeps the per-round failure probability
/// below delta/t^2.
inline int max_resamples(int t, double delta, double gamma) {
  if (t < 1) throw std::invalid_argument("max_resamples: t must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("max_resamples: delta must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("max_resamples: gamma must lie in (0,1)");
  const double td = static_cast<double>(t);
  const double ratio = std::log(td * td / delta) / std::log(1.0 / (1.0 - gamma));
  const int m = static_cast<int>(std::floor(ratio)) + 1;
  return m < 1 ? 1 : m;
}

namespace detail {

/// Van der Corput radical-inverse sequence in base 2 (the 1-D Sobol points).
inline double van_der_corput(std::uint32_t index) {
  double result = 0.0;
  double f = 0.5;
  while (index > 0) {
    result += f * (index & 1u);
    index >>= 1u;
    f *= 0.5;
  }
  return result;
}

}  // namespace detail

/// Deterministic low-discrepancy standard-normal nodes. The default midpoint
/// grid maps (m - 1/2)/M through the normal quantile; the sobol option uses
/// the base-2 radical inverse instead.
inline std::vector<double> qmc_normal_points(int count,
                                             ProbConfig::PointSet points =
                                                 ProbConfig::PointSet::midpoint) {
  if (count < 1) throw std::invalid_argument("qmc points: count must be >= 1");
  std::vector<double> z(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    const double u = points == ProbConfig::PointSet::midpoint
                         ? (m + 0.5) / count
                         : detail::van_der_corput(static_cast<std::uint32_t>(m + 1));
    z[static_cast<std::size_t>(m)] = u > 0.0 && u < 1.0 ? normal_quantile(u) : 0.0;
  }
  return z;
}

/// Single-draw argmax-win probabilities pi_tilde_i = P(x_i^T btilde_i wins),
/// with btilde_j independent N(beta_hat, v^2 V^{-1}), estimated by the 1-D
/// quasi-MC quadrature over products of normal CDFs. Arms whose score is a
/// point mass (zero context, or v = 0) are handled as the continuity limit;
/// exact ties among such arms split their mass equally. The output is
/// renormalized to sum to one. CDF tolerance: 7.5e-8 per factor.
inline Eigen::VectorXd selection_prob_tilde(const ContextSet& contexts,
                                            const Eigen::VectorXd& beta_hat,
                                            const Eigen::MatrixXd& v_matrix,
                                            double v_scale, const ProbConfig& config) {
  validate_context_set(contexts);
  const int n = contexts.arms();
  const int d = contexts.dim();
  if (beta_hat.size() != d)
    throw std::invalid_argument("selection_prob_tilde: beta_hat dimension mismatch");
  if (v_matrix.rows() != d || v_matrix.cols() != d)
    throw std::invalid_argument("selection_prob_tilde: V dimension mismatch");
  if (v_scale < 0.0)
    throw std::invalid_argument("selection_prob_tilde: v must be >= 0");

  Eigen::LLT<Eigen::MatrixXd> llt(v_matrix);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("selection_prob_tilde: V must be positive definite");

  const Eigen::VectorXd mean_scores = contexts.vectors * beta_hat;  // c_i
  Eigen::VectorXd spread(n);                                        // v * ||x_i||_{V^-1}
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd solved = llt.solve(contexts.vectors.row(i).transpose());
    const double s2 = contexts.vectors.row(i).dot(solved);
    spread[i] = v_scale * std::sqrt(std::max(s2, 0.0));
  }

  std::vector<int> continuous, degenerate;
  for (int i = 0; i < n; ++i) {
    (spread[i] > 0.0 ? continuous : degenerate).push_back(i);
  }

  constexpr double floor = 1e-300;
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, floor);

  if (continuous.empty()) {
    // All scores deterministic: the continuity limit splits mass equally
    // over the exactly-tied maxima.
    const double top = mean_scores.maxCoeff();
    int ties = 0;
    for (int i = 0; i < n; ++i) ties += mean_scores[i] == top ? 1 : 0;
    for (int i = 0; i < n; ++i) {
      if (mean_scores[i] == top) pi[i] = 1.0 / ties;
    }
    return pi / pi.sum();
  }

  const std::vector<double> nodes = qmc_normal_points(config.qmc_points, config.points);

  for (int i : continuous) {
    double total = 0.0;
    for (const double z : nodes) {
      const double score = mean_scores[i] + spread[i] * z;
      double product = 1.0;
      for (int j : continuous) {
        if (j == i) continue;
        product *= normal_cdf_fast((score - mean_scores[j]) / spread[j]);
        if (product == 0.0) break;
      }
      if (product > 0.0) {
        for (int j : degenerate) {
          if (score < mean_scores[j]) {
            product = 0.0;
            break;
          }
        }
      }
      total += product;
    }
    pi[i] = std::max(total / nodes.size(), floor);
  }

  if (!degenerate.empty()) {
    double top = mean_scores[degenerate.front()];
    for (int k : degenerate) top = std::max(top, mean_scores[k]);
    int ties = 0;
    for (int k : degenerate) ties += mean_scores[k] == top ? 1 : 0;
    for (int k : degenerate) {
      if (mean_scores[k] != top) continue;
      double product = 1.0;
      for (int j : continuous) {
        product *= normal_cdf_fast((mean_scores[k] - mean_scores[j]) / spread[j]);
        if (product == 0.0) break;
      }
      pi[k] = std::max(product / ties, floor);
    }
  }

  return pi / pi.sum();
}

/// Post-resampling selection probabilities in closed form. With
/// S = sum of pi_tilde over arms above gamma and budget M:
///   accepted arms:  pi_i = pi_tilde_i (1 - (1-S)^M) / S
///   remaining arms: pi_i = (1-S)^{M-1} pi_tilde_i
/// The result sums to one identically.
inline Eigen::VectorXd selection_prob_closed(const Eigen::VectorXd& pi_tilde,
                                             double gamma, int budget) {
  const int n = static_cast<int>(pi_tilde.size());
  if (n < 1) throw std::invalid_argument("selection_prob_closed: empty pi_tilde");
  if (budget < 1) throw std::invalid_argument("selection_prob_closed: budget must be >= 1");
  if (std::fabs(pi_tilde.sum() - 1.0) > 1e-6)
    throw std::invalid_argument("selection_prob_closed: pi_tilde must sum to one");

  double above_mass = 0.0;
  int above_count = 0;
  for (int i = 0; i < n; ++i) {
    if (pi_tilde[i] > gamma) {
      above_mass += pi_tilde[i];
      ++above_count;
    }
  }
  if (above_count == 0)
    throw std::logic_error(
        "selection_prob_closed: no arm above gamma (impossible for gamma < 1/N)");

  const double miss = std::max(0.0, 1.0 - above_mass);
  const double miss_pow = std::pow(miss, budget);
  const double accept_scale = above_mass > 0.0 ? (1.0 - miss_pow) / above_mass : 0.0;
  const double fail_scale = std::pow(miss, budget - 1);

  Eigen::VectorXd pi(n);
  for (int i = 0; i < n; ++i) {
    pi[i] = pi_tilde[i] > gamma ? pi_tilde[i] * accept_scale : pi_tilde[i] * fail_scale;
  }
  return pi;
}

}  // namespace drbandit
