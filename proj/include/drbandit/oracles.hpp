#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drbandit/core.hpp"
#include "drbandit/env.hpp"
#include "drbandit/rng.hpp"

namespace drbandit::oracles {

/// Crude Monte-Carlo estimate of the single-draw argmax-win probabilities:
/// draws btilde_j ~ N(beta_hat, v^2 V^{-1}) explicitly for every arm and
/// counts wins (lowest index on ties). Brute-force reference for the
/// quadrature path; shares no code with it.
inline Eigen::VectorXd mc_selection_prob(const ContextSet& contexts,
                                         const Eigen::VectorXd& beta_hat,
                                         const Eigen::MatrixXd& v_matrix, double v_scale,
                                         long n_samples, RngStream& rng) {
  validate_context_set(contexts);
  if (n_samples < 10000)
    throw std::invalid_argument("mc_selection_prob: need at least 1e4 samples");
  const int n = contexts.arms();
  const int d = contexts.dim();

  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(d, d);
  if (v_scale > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(v_matrix);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("mc_selection_prob: V must be positive definite");
    factor = v_scale * llt.matrixU().solve(Eigen::MatrixXd::Identity(d, d));
  }

  Eigen::VectorXd wins = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z(d);
  Eigen::VectorXd scores(n);
  for (long s = 0; s < n_samples; ++s) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) z[j] = rng.normal();
      const Eigen::VectorXd beta_tilde = beta_hat + factor * z;
      scores[i] = contexts.vectors.row(i).dot(beta_tilde);
    }
    wins[argmax_lowest(scores)] += 1.0;
  }
  return wins / static_cast<double>(n_samples);
}

/// Super-unsaturated arms: those whose true gap is at most twice the
/// estimation error plus the combined V^{-1}-norm term of the optimal and
/// candidate contexts. Straight inequality evaluation, simulation-side only.
inline std::vector<int> super_unsaturated_set(const ContextSet& contexts,
                                              const Eigen::VectorXd& beta_true,
                                              const Eigen::VectorXd& beta_hat,
                                              const Eigen::MatrixXd& v_matrix) {
  validate_context_set(contexts);
  const int n = contexts.arms();
  const Eigen::MatrixXd v_inv = v_matrix.inverse();
  const Eigen::VectorXd true_values = contexts.vectors * beta_true;
  const int star = argmax_lowest(true_values);
  const double est_error = (beta_hat - beta_true).norm();

  auto weighted_norm_sq = [&](int arm) {
    const Eigen::VectorXd x = contexts.vectors.row(arm).transpose();
    return x.dot(v_inv * x);
  };
  const double star_norm_sq = weighted_norm_sq(star);

  std::vector<int> members;
  for (int i = 0; i < n; ++i) {
    const double gap = true_values[star] - true_values[i];
    const double bound = 2.0 * est_error + std::sqrt(star_norm_sq + weighted_norm_sq(i));
    if (gap <= bound) members.push_back(i);
  }
  return members;
}

/// Direct simulation of the resampling stopping process: candidates are drawn
/// i.i.d. from pi_tilde, the first one above gamma is played, and after
/// `budget` failures the last candidate is played. Returns the empirical
/// frequency of the played arm.
inline Eigen::VectorXd simulate_resampling(const Eigen::VectorXd& pi_tilde, double gamma,
                                           int budget, long trials, RngStream& rng) {
  const int n = static_cast<int>(pi_tilde.size());
  if (budget < 1) throw std::invalid_argument("simulate_resampling: budget must be >= 1");
  if (trials < 1) throw std::invalid_argument("simulate_resampling: trials must be >= 1");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  std::span<const double> probs(pi_tilde.data(), static_cast<std::size_t>(n));
  for (long s = 0; s < trials; ++s) {
    int played = -1;
    for (int attempt = 1; attempt <= budget; ++attempt) {
      played = rng.categorical(probs);
      if (pi_tilde[played] > gamma) break;
    }
    counts[played] += 1.0;
  }
  return counts / static_cast<double>(trials);
}

struct MinEigenReport {
  std::vector<int> checkpoints;
  std::vector<double> violation_freq;  // fraction of reps violating the bound
  std::vector<double> allowed;         // delta/t^2 + 3 sqrt(delta/reps)
  double phi_squared = 0.0;
};

/// Generic empirical check of the minimum-eigenvalue concentration bound over
/// an arbitrary context stream: regularize with
/// lambda_t = 4 sqrt(2) N sqrt(t log(4t^2/delta)) (or zero to exercise the
/// negative control) and record how often lambda_min(V_t) < phi^2 N t.
template <class DrawFn>
MinEigenReport check_min_eigen_stream(DrawFn&& draw, int arms, double phi_squared,
                                      double delta, int reps,
                                      std::vector<int> checkpoints,
                                      bool zero_lambda = false) {
  if (reps < 100) throw std::invalid_argument("check_min_eigen: need at least 100 reps");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("check_min_eigen: delta must lie in (0,1)");
  std::sort(checkpoints.begin(), checkpoints.end());
  if (checkpoints.empty()) throw std::invalid_argument("check_min_eigen: no checkpoints");

  MinEigenReport report;
  report.checkpoints = checkpoints;
  report.phi_squared = phi_squared;
  report.violation_freq.assign(checkpoints.size(), 0.0);
  report.allowed.resize(checkpoints.size());
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const double t = checkpoints[k];
    report.allowed[k] = delta / (t * t) + 3.0 * std::sqrt(delta / reps);
  }

  for (int rep = 0; rep < reps; ++rep) {
    Eigen::MatrixXd gram;
    std::size_t next_checkpoint = 0;
    for (int t = 1; t <= checkpoints.back(); ++t) {
      const ContextSet contexts = draw(rep, t);
      if (gram.size() == 0) gram = Eigen::MatrixXd::Zero(contexts.dim(), contexts.dim());
      gram += contexts.vectors.transpose() * contexts.vectors;
      if (next_checkpoint < checkpoints.size() && t == checkpoints[next_checkpoint]) {
        const double td = static_cast<double>(t);
        const double lambda_t =
            zero_lambda ? 0.0
                        : 4.0 * std::sqrt(2.0) * arms *
                              std::sqrt(td * std::log(4.0 * td * td / delta));
        Eigen::MatrixXd v = gram;
        v.diagonal().array() += lambda_t;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
        if (eig.eigenvalues().minCoeff() < phi_squared * arms * td)
          report.violation_freq[next_checkpoint] += 1.0 / reps;
        ++next_checkpoint;
      }
    }
  }
  return report;
}

/// EnvSpec front end: phi^2 is estimated from the spec, checkpoints above the
/// horizon are dropped, and each replication gets its own stream.
inline MinEigenReport check_min_eigen(const EnvSpec& spec, double delta, int horizon,
                                      int reps,
                                      std::vector<int> checkpoints = {10, 100, 1000}) {
  std::sort(checkpoints.begin(), checkpoints.end());
  while (!checkpoints.empty() && checkpoints.back() > horizon) checkpoints.pop_back();
  if (checkpoints.empty())
    throw std::invalid_argument("check_min_eigen: no checkpoint <= horizon");
  const double phi_squared = estimate_phi_squared(spec, 20000);
  ContextSampler sampler(spec);
  struct RepStream {
    const ContextSampler* sampler;
    std::uint64_t seed;
    int current_rep = -1;
    std::optional<RngStream> rng;
  };
  RepStream state{&sampler, spec.seed};
  return check_min_eigen_stream(
      [&state](int rep, int t) {
        if (rep != state.current_rep) {
          state.current_rep = rep;
          state.rng.emplace(state.seed, static_cast<std::uint64_t>(rep) + 1,
                            StreamPurpose::oracle);
        }
        return state.sampler->draw(t, *state.rng);
      },
      spec.arms, phi_squared, delta, reps, checkpoints);
}

enum class MartingaleContexts { fixed, rotating, adversarial };

struct MartingaleReport {
  std::vector<int> checkpoints;
  std::vector<double> quantile_ratio;  // empirical (1 - delta/t^2) quantile / bound shape

  /// Max/min of the normalized quantiles; boundedness of the lemma constant
  /// shows up as a small spread.
  double spread() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double r : quantile_ratio) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (hi == 0.0) return 1.0;  // degenerate all-zero case (sigma = 0)
    return hi / lo;
  }
};

/// Simulates the vector-valued martingale sum_tau eta(tau) X(tau) with
/// adapted unit-norm directions and Gaussian noise, and reports the high
/// quantile of its norm divided by sigma sqrt(t log(4t^2/delta)).
inline MartingaleReport check_martingale_norm(double sigma, int horizon, int reps,
                                              MartingaleContexts mode, RngStream& rng,
                                              double delta = 0.1,
                                              std::vector<int> checkpoints = {100, 1000,
                                                                              10000}) {
  if (reps < 100) throw std::invalid_argument("check_martingale_norm: need >= 100 reps");
  std::sort(checkpoints.begin(), checkpoints.end());
  while (!checkpoints.empty() && checkpoints.back() > horizon) checkpoints.pop_back();
  if (checkpoints.empty())
    throw std::invalid_argument("check_martingale_norm: no checkpoint <= horizon");

  constexpr int dim = 8;
  std::vector<std::vector<double>> norms(checkpoints.size());

  for (int rep = 0; rep < reps; ++rep) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    std::size_t next_checkpoint = 0;
    for (int t = 1; t <= checkpoints.back(); ++t) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
      switch (mode) {
        case MartingaleContexts::fixed:
          x[0] = 1.0;
          break;
        case MartingaleContexts::rotating:
          x[(t - 1) % dim] = 1.0;
          break;
        case MartingaleContexts::adversarial: {
          const double norm = sum.norm();
          if (norm > 0.0) {
            x = sum / norm;  // push the sum further out; F_{t-1}-measurable
          } else {
            x[0] = 1.0;
          }
          break;
        }
      }
      sum += sigma * rng.normal() * x;
      if (next_checkpoint < checkpoints.size() && t == checkpoints[next_checkpoint]) {
        norms[next_checkpoint].push_back(sum.norm());
        ++next_checkpoint;
      }
    }
  }

  MartingaleReport report;
  report.checkpoints = checkpoints;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    auto& values = norms[k];
    std::sort(values.begin(), values.end());
    const double t = checkpoints[k];
    const double q = 1.0 - delta / (t * t);
    const std::size_t index = std::min(
        values.size() - 1, static_cast<std::size_t>(std::ceil(q * values.size())) - 1);
    const double bound_shape = sigma > 0.0
                                   ? sigma * std::sqrt(t * std::log(4.0 * t * t / delta))
                                   : 1.0;
    report.quantile_ratio.push_back(values[index] / bound_shape);
  }
  return report;
}

/// Monte-Carlo z-scores for the conditional unbiasedness of the DR
/// pseudo-reward: arms are sampled from pi (or sample_pi for a deliberate
/// violation), rewards from the true model, and the pseudo-reward mean per
/// arm is compared to x_i^T beta in standard-error units. The pseudo-reward
/// formula is evaluated inline, independent of the estimator module.
inline Eigen::VectorXd check_dr_unbiasedness(const ContextSet& contexts,
                                             const TrueModel& model,
                                             const Eigen::VectorXd& pi,
                                             const Eigen::VectorXd& beta_check,
                                             long n_samples, RngStream& rng,
                                             const Eigen::VectorXd* sample_pi = nullptr) {
  validate_context_set(contexts);
  if (n_samples < 100000)
    throw std::invalid_argument("check_dr_unbiasedness: need at least 1e5 samples");
  const int n = contexts.arms();
  if (pi.size() != n) throw std::invalid_argument("check_dr_unbiasedness: pi size mismatch");
  const Eigen::VectorXd& draw_from = sample_pi != nullptr ? *sample_pi : pi;
  std::span<const double> probs(draw_from.data(), static_cast<std::size_t>(n));

  const Eigen::VectorXd imputed = contexts.vectors * beta_check;
  const Eigen::VectorXd truth = contexts.vectors * model.beta;

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
  for (long s = 0; s < n_samples; ++s) {
    const int chosen = rng.categorical(probs);
    const double reward = truth[chosen] + model.sigma * rng.normal();
    for (int i = 0; i < n; ++i) {
      double value = imputed[i];
      if (i == chosen) value += (reward - imputed[i]) / pi[i];
      sum[i] += value;
      sum_sq[i] += value * value;
    }
  }

  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    const double mean = sum[i] / n_samples;
    const double var = std::max(0.0, sum_sq[i] / n_samples - mean * mean);
    const double se = std::sqrt(var / n_samples);
    const double gap = mean - truth[i];
    if (se == 0.0) {
      z[i] = std::fabs(gap) < 1e-12 ? 0.0
                                    : std::numeric_limits<double>::infinity() *
                                          (gap > 0 ? 1.0 : -1.0);
    } else {
      z[i] = gap / se;
    }
  }
  return z;
}

/// One line of a validation report, CSV-ready.
struct OracleRow {
  std::string check;
  double checkpoint = 0.0;
  double statistic = 0.0;
  double bound = 0.0;
  bool pass = false;
};

}  // namespace drbandit::oracles
