#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "drbandit/core.hpp"
#include "drbandit/rng.hpp"

namespace drbandit {

/// Synthetic environment parameters: N arms, d-dimensional contexts whose
/// coordinates are drawn per-coordinate from N(mu, V) with unit variances and
/// constant inter-arm correlation rho, rows rescaled into the unit ball.
struct EnvSpec {
  int arms = 10;
  int dim = 20;
  double rho = 0.5;
  Eigen::VectorXd mu;    // per-arm means, size N
  double sigma = 1.0;    // reward noise scale
  Eigen::VectorXd beta;  // ground truth, size d (may be empty until resolved)
  std::uint64_t seed = 0;
};

inline void validate_env_spec(const EnvSpec& spec) {
  if (spec.arms < 2 || spec.arms > 64)
    throw std::invalid_argument("env spec: arms must be in [2,64]");
  if (spec.dim < 1 || spec.dim > 64)
    throw std::invalid_argument("env spec: dim must be in [1,64]");
  if (!(spec.rho >= 0.0 && spec.rho < 1.0))
    throw std::invalid_argument("env spec: rho must be in [0,1)");
  if (spec.mu.size() != spec.arms)
    throw std::invalid_argument("env spec: mu must have one entry per arm");
  if (spec.sigma < 0.0) throw std::invalid_argument("env spec: sigma must be >= 0");
  if (spec.beta.size() > 0) {
    if (spec.beta.size() != spec.dim)
      throw std::invalid_argument("env spec: beta dimension mismatch");
    if (spec.beta.norm() > 1.0 + 1e-12)
      throw std::invalid_argument("env spec: beta must have norm <= 1");
  }
}

/// Symmetric per-arm means [-N,...,-4,-2,2,4,...,N] for even N.
inline Eigen::VectorXd default_mu(int arms) {
  if (arms < 2 || arms % 2 != 0)
    throw std::invalid_argument("default_mu: arm count must be even and >= 2");
  Eigen::VectorXd mu(arms);
  const int half = arms / 2;
  for (int k = 0; k < half; ++k) {
    mu[k] = -2.0 * (half - k);
    mu[arms - 1 - k] = 2.0 * (half - k);
  }
  return mu;
}

/// Draws context sets for an EnvSpec; the Cholesky factor of the inter-arm
/// covariance is computed once.
class ContextSampler {
 public:
  explicit ContextSampler(EnvSpec spec) : spec_(std::move(spec)) {
    validate_env_spec(spec_);
    const int n = spec_.arms;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(n, n, spec_.rho);
    cov.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("context sampler: inter-arm covariance not PD");
    chol_ = llt.matrixL();
  }

  const EnvSpec& spec() const { return spec_; }

  /// One round of contexts. Coordinates are independent; within a coordinate
  /// the N-vector across arms is mu + L z. Each row is rescaled by
  /// 1/max(1, ||row||) afterwards.
  ContextSet draw(int round, RngStream& rng) const {
    const int n = spec_.arms;
    const int d = spec_.dim;
    ContextSet out;
    out.round = round;
    out.vectors.resize(n, d);
    Eigen::VectorXd z(n);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < n; ++i) z[i] = rng.normal();
      out.vectors.col(j) = spec_.mu + chol_ * z;
    }
    for (int i = 0; i < n; ++i) {
      const double norm = out.vectors.row(i).norm();
      if (norm > 1.0) out.vectors.row(i) /= norm;
    }
    return out;
  }

 private:
  EnvSpec spec_;
  Eigen::MatrixXd chol_;
};

inline ContextSet gen_contexts(const EnvSpec& spec, int round, RngStream& rng) {
  return ContextSampler(spec).draw(round, rng);
}

/// Ground-truth coefficients with i.i.d. entries uniform on (-1/sqrt(d), 1/sqrt(d)).
inline Eigen::VectorXd gen_beta(int dim, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("gen_beta: dim must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  Eigen::VectorXd beta(dim);
  for (int j = 0; j < dim; ++j) beta[j] = rng.uniform(-bound, bound);
  return beta;
}

/// x^T beta + sigma * z with z standard normal.
inline double gen_reward(const Eigen::VectorXd& x, const TrueModel& model, RngStream& rng) {
  if (x.size() != model.beta.size())
    throw std::invalid_argument("gen_reward: dimension mismatch");
  return x.dot(model.beta) + model.sigma * rng.normal();
}

/// Monte-Carlo estimate of lambda_min(E[(1/N) sum_i x_i x_i^T]) for any
/// context source (callable returning a ContextSet).
template <class DrawFn>
double estimate_min_eigen_avg_cov(DrawFn&& draw, int samples) {
  if (samples < 1) throw std::invalid_argument("estimate: samples must be >= 1");
  Eigen::MatrixXd acc;
  for (int s = 0; s < samples; ++s) {
    const ContextSet contexts = draw(s + 1);
    const Eigen::MatrixXd cov =
        contexts.vectors.transpose() * contexts.vectors / contexts.arms();
    if (acc.size() == 0) {
      acc = cov;
    } else {
      acc += cov;
    }
  }
  acc /= static_cast<double>(samples);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(acc);
  return eig.eigenvalues().minCoeff();
}

/// Monte-Carlo estimate of phi^2 (Assumption on the average context
/// covariance) for an EnvSpec; the sampling stream is derived from the spec
/// seed so the estimate is reproducible.
inline double estimate_phi_squared(const EnvSpec& spec, int samples) {
  if (samples < 1000)
    throw std::invalid_argument("estimate_phi_squared: need at least 1000 samples");
  ContextSampler sampler(spec);
  RngStream rng(spec.seed, 0, StreamPurpose::oracle);
  return estimate_min_eigen_avg_cov(
      [&](int round) { return sampler.draw(round, rng); }, samples);
}

}  // namespace drbandit
