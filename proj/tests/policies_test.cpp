#include "drbandit/policies.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "drbandit/rng.hpp"

namespace drbandit {
namespace {

ContextSet two_arm_line() {
  ContextSet contexts;
  contexts.vectors.resize(2, 1);
  contexts.vectors << 1.0, -1.0;
  return contexts;
}

ContextSet identical_arms(int n, int d) {
  ContextSet contexts;
  contexts.vectors.resize(n, d);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Constant(d, 0.5 / std::sqrt(d));
  for (int i = 0; i < n; ++i) contexts.vectors.row(i) = row;
  return contexts;
}

TEST(LinTs, ZeroExplorationIsGreedy) {
  ContextSet contexts;
  contexts.vectors.resize(3, 2);
  contexts.vectors << 0.9, 0.0, 0.0, 0.9, 0.5, 0.5;
  Eigen::VectorXd estimate(2);
  estimate << 1.0, 0.2;
  RngStream rng(1);
  const PolicyDecision decision = lints_decide(
      Eigen::MatrixXd::Identity(2, 2), estimate, contexts, 0.0, rng);
  EXPECT_EQ(decision.chosen, 0);
}

TEST(LinTs, SignArgmaxInOneDimension) {
  RngStream rng(2);
  Eigen::VectorXd estimate(1);
  estimate << 0.7;
  const PolicyDecision decision = lints_decide(
      Eigen::MatrixXd::Identity(1, 1), estimate, two_arm_line(), 0.0, rng);
  EXPECT_EQ(decision.chosen, 0);
}

TEST(LinTs, ChoiceFrequenciesMatchSharedDrawOracle) {
  // Oracle: explicit shared-draw simulation of the argmax probability.
  RngStream rng(3);
  ContextSet contexts;
  contexts.vectors.resize(3, 2);
  contexts.vectors << 0.8, 0.1, 0.2, 0.7, -0.4, 0.5;
  Eigen::MatrixXd gram(2, 2);
  gram << 2.0, 0.4, 0.4, 1.5;
  Eigen::VectorXd estimate(2);
  estimate << 0.3, 0.2;
  const double v = 0.8;

  const int trials = 10000;
  Eigen::Vector3d decide_freq = Eigen::Vector3d::Zero();
  for (int s = 0; s < trials; ++s) {
    decide_freq[lints_decide(gram, estimate, contexts, v, rng).chosen] += 1.0;
  }
  decide_freq /= trials;

  RngStream oracle_rng(4);
  const Eigen::MatrixXd factor = gaussian_factor(gram, v);
  Eigen::Vector3d oracle_freq = Eigen::Vector3d::Zero();
  for (int s = 0; s < 200000; ++s) {
    Eigen::VectorXd z(2);
    z << oracle_rng.normal(), oracle_rng.normal();
    const Eigen::VectorXd draw = estimate + factor * z;
    oracle_freq[argmax_lowest(contexts.vectors * draw)] += 1.0;
  }
  oracle_freq /= 200000.0;

  EXPECT_LT((decide_freq - oracle_freq).lpNorm<Eigen::Infinity>(), 0.02);
}

TEST(Drts, SymmetricInstanceAcceptsFirstCandidate) {
  DrState state(1, LambdaSchedule{LambdaMode::algorithmic, 1.0});
  ProbConfig config;
  config.gamma = 0.4;  // in [1/3, 1/2) for N = 2
  RngStream rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const PolicyDecision decision =
        drts_decide(state, two_arm_line(), 1.0, config, 1, rng);
    ASSERT_EQ(decision.resamples, 1);
    ASSERT_FALSE(decision.resample_exhausted);
    ASSERT_NEAR(decision.pi_tilde[0], 0.5, 1e-12);
    ASSERT_NEAR(decision.pi[decision.chosen], 0.5, 1e-12);
  }
}

TEST(Drts, FirstRoundUsesUniformPiTilde) {
  DrState state(3, LambdaSchedule{LambdaMode::algorithmic, 1.0});
  ProbConfig config;
  config.gamma = 1.0 / 5.0;  // N = 4
  ContextSet contexts;
  contexts.vectors.resize(4, 3);
  contexts.vectors << 0.9, 0, 0, 0, 0.2, 0, 0, 0, 0.4, 0.1, 0.1, 0.1;
  RngStream rng(6);
  const PolicyDecision decision = drts_decide(state, contexts, 0.5, config, 1, rng);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(decision.pi_tilde[i], 0.25);
  EXPECT_EQ(decision.resamples, 1);
  EXPECT_DOUBLE_EQ(decision.pi[decision.chosen], 0.25);
}

TEST(Drts, ResampleCountsFollowTruncatedGeometricLaw) {
  // Build a state whose estimate strongly favors arm 1 so that the accepted
  // mass S is below one, then compare the empirical resample counts with the
  // geometric law implied by the reported pi_tilde.
  const int n = 10;
  const int d = 2;
  DrState state(d, LambdaSchedule{LambdaMode::algorithmic, 1.0});
  ContextSet fit_round;
  fit_round.vectors = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < n; ++i) fit_round.vectors(i, 0) = 1.0;
  Eigen::VectorXd pseudo = Eigen::VectorXd::Constant(n, 1.2);
  state = absorb_round(state, fit_round, pseudo);

  ContextSet contexts;
  contexts.vectors = Eigen::MatrixXd::Zero(n, d);
  contexts.vectors(0, 0) = 1.0;                       // aligned with the estimate
  for (int i = 1; i < n; ++i) contexts.vectors(i, 1) = 1.0;  // orthogonal pack

  ProbConfig config;
  config.gamma = 1.0 / (n + 1.0);
  const double v = 0.48;
  RngStream rng(7);

  const int t = 2;
  const PolicyDecision probe = drts_decide(state, contexts, v, config, t, rng);
  double accepted_mass = 0.0;
  for (int i = 0; i < n; ++i) {
    if (probe.pi_tilde[i] > config.gamma) accepted_mass += probe.pi_tilde[i];
  }
  ASSERT_GT(accepted_mass, 0.5);
  ASSERT_LT(accepted_mass, 0.995);  // resampling must actually trigger sometimes

  const int trials = 10000;
  double first_try = 0.0;
  double mean_resamples = 0.0;
  for (int s = 0; s < trials; ++s) {
    const PolicyDecision decision = drts_decide(state, contexts, v, config, t, rng);
    first_try += decision.resamples == 1 ? 1.0 : 0.0;
    mean_resamples += decision.resamples;
    if (!decision.resample_exhausted) {
      ASSERT_GT(decision.pi_tilde[decision.chosen], config.gamma);
      ASSERT_GT(decision.pi[decision.chosen], config.gamma);  // dominance
    }
  }
  first_try /= trials;
  mean_resamples /= trials;

  const double se = std::sqrt(accepted_mass * (1.0 - accepted_mass) / trials);
  EXPECT_NEAR(first_try, accepted_mass, 3.0 * se + 0.01);

  const int budget = max_resamples(t, config.delta, config.gamma);
  double expected_mean = 0.0;
  double tail = 1.0;  // P(resamples > m - 1)
  for (int m = 1; m <= budget; ++m) {
    const double p_stop_here =
        m < budget ? tail * accepted_mass : tail;  // budget exhausts the loop
    expected_mean += m * p_stop_here;
    tail *= 1.0 - accepted_mass;
  }
  EXPECT_NEAR(mean_resamples, expected_mean, 0.05 * expected_mean + 0.02);
}

TEST(Drts, VanishingExplorationConcentratesPiTilde) {
  const int n = 4;
  DrState state(2, LambdaSchedule{LambdaMode::algorithmic, 1.0});
  ContextSet fit_round;
  fit_round.vectors = Eigen::MatrixXd::Zero(n, 2);
  for (int i = 0; i < n; ++i) fit_round.vectors(i, 0) = 1.0;
  state = absorb_round(state, fit_round, Eigen::VectorXd::Constant(n, 1.0));

  ContextSet contexts;
  contexts.vectors.resize(n, 2);
  contexts.vectors << 1.0, 0.0, 0.5, 0.1, -0.2, 0.3, 0.1, -0.8;

  ProbConfig config;
  config.gamma = 1.0 / (n + 1.0);
  RngStream rng(8);
  const PolicyDecision decision = drts_decide(state, contexts, 0.0, config, 2, rng);
  EXPECT_EQ(decision.chosen, 0);
  EXPECT_GT(decision.pi_tilde[0], 1.0 - 1e-9);
  EXPECT_EQ(decision.resamples, 1);
}

TEST(Blts, IdenticalArmsChosenUniformly) {
  const int n = 5;
  ProbConfig config;
  BltsPolicy policy(3, 1.0, 0.5, 0.05, config);
  ContextSet contexts = identical_arms(n, 3);
  RngStream rng(9);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(n);
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    const PolicyDecision decision = policy.decide(contexts, 1, rng);
    freq[decision.chosen] += 1.0;
    ASSERT_GE(decision.propensity, 0.05);  // truncation postcondition
    ASSERT_NEAR(decision.pi_tilde[decision.chosen], 1.0 / n, 1e-9);
  }
  freq /= trials;
  for (int i = 0; i < n; ++i) EXPECT_NEAR(freq[i], 1.0 / n, 0.02);
}

TEST(Blts, GammaOneMakesWeightsUnit) {
  ProbConfig config;
  BltsPolicy blts(2, 1.0, 0.3, 1.0, config);
  LinTsPolicy lints(2, 1.0, 0.3);
  ContextSet contexts;
  contexts.vectors.resize(2, 2);
  contexts.vectors << 0.8, 0.1, 0.1, 0.8;

  RngStream rng(10);
  for (int t = 1; t <= 30; ++t) {
    PolicyDecision decision = blts.decide(contexts, t, rng);
    EXPECT_DOUBLE_EQ(decision.propensity, 1.0);
    blts.update(contexts, decision, 0.5);
    PolicyDecision mirror;
    mirror.chosen = decision.chosen;
    mirror.propensity = 1.0;
    lints.update(contexts, mirror, 0.5);
  }
  // With unit weights the weighted ridge collapses to the plain ridge.
  EXPECT_LT((blts.estimate() - lints.estimate()).norm(), 1e-10);
}

TEST(Policies, ScaleInvarianceOfArgmax) {
  RngStream rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd scores(5);
    for (int i = 0; i < 5; ++i) scores[i] = rng.normal();
    const double scale = 0.01 + 10.0 * rng.uniform01();
    EXPECT_EQ(argmax_lowest(scores), argmax_lowest((scale * scores).eval()));
  }
}

TEST(DrtsPolicy, RoundOutcomeInvariantsHold) {
  const int n = 5;
  const int d = 3;
  ProbConfig config;
  config.gamma = 1.0 / (n + 1.0);
  DrtsPolicy policy(d, LambdaSchedule{LambdaMode::algorithmic, 1.0}, 0.4, config);
  RngStream rng(14);
  RngStream env_rng(15);
  for (int t = 1; t <= 60; ++t) {
    ContextSet contexts;
    contexts.round = t;
    contexts.vectors.resize(n, d);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd z(d);
      for (int j = 0; j < d; ++j) z[j] = env_rng.normal();
      contexts.vectors.row(i) = (0.9 * z.normalized()).transpose();
    }
    const PolicyDecision decision = policy.decide(contexts, t, rng);
    const RoundOutcome outcome = policy.update(contexts, decision, env_rng.normal());

    ASSERT_EQ(outcome.pi_tilde.size(), n);
    ASSERT_NEAR(outcome.pi_tilde.sum(), 1.0, 1e-9);
    ASSERT_NEAR(outcome.pi.sum(), 1.0, 1e-9);
    for (int i = 0; i < n; ++i) {
      ASSERT_GT(outcome.pi_tilde[i], 0.0);
      ASSERT_LT(outcome.pi_tilde[i], 1.0);
      ASSERT_GE(outcome.pi[i], 0.0);
      ASSERT_LE(outcome.pi[i], 1.0 + 1e-12);
    }
    ASSERT_GE(outcome.resamples, 1);
    ASSERT_LE(outcome.resamples, max_resamples(t, config.delta, config.gamma));
    ASSERT_TRUE(outcome.pseudo_rewards.allFinite());
  }
}

TEST(DrtsPolicy, RoundIndexMustTrackState) {
  ProbConfig config;
  config.gamma = 1.0 / 3.0;
  DrtsPolicy policy(1, LambdaSchedule{}, 0.5, config);
  RngStream rng(12);
  EXPECT_THROW(policy.decide(two_arm_line(), 5, rng), std::logic_error);
  const PolicyDecision decision = policy.decide(two_arm_line(), 1, rng);
  policy.update(two_arm_line(), decision, 1.0);
  EXPECT_EQ(policy.state().rounds(), 1);
  EXPECT_NO_THROW(policy.decide(two_arm_line(), 2, rng));
}

}  // namespace
}  // namespace drbandit
