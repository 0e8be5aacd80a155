#include "drbandit/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "drbandit/config.hpp"
#include "drbandit/validate.hpp"

namespace drbandit {
namespace {

namespace fs = std::filesystem;

RunConfig tiny_config() {
  RunConfig config;
  config.policy = PolicyKind::drts;
  config.horizon = 25;
  config.reps = 3;
  config.arms = 4;
  config.dim = 3;
  config.seed = 11;
  config.workers = 1;
  return config;
}

TEST(ConfigTable, ParsesScalarsStringsAndArrays) {
  const std::string text =
      "# comment line\n"
      "policy = \"drts\"   # trailing comment\n"
      "T = 500\n"
      "rho = 0.25\n"
      "v = \"auto\"\n"
      "gamma = 0.05\n"
      "mu = [1, -2, 3.5, 4]\n";
  const ConfigTable table = ConfigTable::parse(text);
  EXPECT_EQ(table.get_string("policy"), "drts");
  EXPECT_EQ(table.get_int("T"), 500);
  EXPECT_DOUBLE_EQ(table.get_double("rho"), 0.25);
  EXPECT_FALSE(table.get_auto_double("v").has_value());
  EXPECT_DOUBLE_EQ(*table.get_auto_double("gamma"), 0.05);
  EXPECT_EQ(table.get_array("mu"), (std::vector<double>{1.0, -2.0, 3.5, 4.0}));
}

TEST(ConfigTable, RejectsMalformedLines) {
  EXPECT_THROW(ConfigTable::parse("just some words\n"), ConfigError);
  EXPECT_THROW(ConfigTable::parse("key = \n"), ConfigError);
  EXPECT_THROW(ConfigTable::parse("key = [1, 2\n"), ConfigError);
  EXPECT_THROW(ConfigTable::parse("key = notanumber\n"), ConfigError);
}

TEST(RunConfig, UnknownKeyRejected) {
  EXPECT_THROW(RunConfig::from_table(ConfigTable::parse("bogus_key = 1\n")), ConfigError);
}

TEST(RunConfig, TableRoundTripPreservesEverything) {
  RunConfig config = tiny_config();
  config.v = 0.125;
  config.beta = std::vector<double>{0.1, -0.2, 0.3};
  const RunConfig reloaded = RunConfig::from_table(
      ConfigTable::parse(config.to_table().serialize()));
  EXPECT_EQ(reloaded.policy, config.policy);
  EXPECT_EQ(reloaded.horizon, config.horizon);
  EXPECT_EQ(reloaded.reps, config.reps);
  EXPECT_EQ(reloaded.arms, config.arms);
  EXPECT_EQ(*reloaded.v, 0.125);
  EXPECT_EQ(*reloaded.beta, (std::vector<double>{0.1, -0.2, 0.3}));
  EXPECT_FALSE(reloaded.gamma.has_value());
  EXPECT_EQ(reloaded.seed, config.seed);
}

TEST(RunConfig, ValidationCatchesBadRanges) {
  RunConfig config = tiny_config();
  config.horizon = 0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = tiny_config();
  config.rho = 1.0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = tiny_config();
  config.gamma = 1.5;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(Resolve, AutoFieldsFollowTheDefaults) {
  RunConfig config = tiny_config();
  const harness::Resolved resolved = harness::resolve(config);
  EXPECT_DOUBLE_EQ(resolved.gamma, 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(resolved.v, exploration_v(4, 1.0 / 5.0));
  EXPECT_EQ(resolved.env.mu, default_mu(4));
  EXPECT_EQ(resolved.env.beta.size(), 0);
}

TEST(RunEpisode, DeterministicGivenConfigAndReplication) {
  const RunConfig config = tiny_config();
  const MetricsSeries a = harness::run_episode(config, 1);
  const MetricsSeries b = harness::run_episode(config, 1);
  EXPECT_EQ(a.inst_regret(), b.inst_regret());
  EXPECT_EQ(a.est_error(), b.est_error());
  EXPECT_EQ(a.resamples(), b.resamples());
  const MetricsSeries c = harness::run_episode(config, 2);
  EXPECT_NE(a.inst_regret(), c.inst_regret());
}

TEST(RunEpisode, SingleRoundCumulativeEqualsInstantaneous) {
  RunConfig config = tiny_config();
  config.horizon = 1;
  const MetricsSeries series = harness::run_episode(config, 0);
  ASSERT_EQ(series.rounds(), 1);
  EXPECT_DOUBLE_EQ(series.cum_regret()[0], series.inst_regret()[0]);
}

TEST(RunEpisode, NoiselessGreedySanityRun) {
  RunConfig config = tiny_config();
  config.policy = PolicyKind::drts;
  config.horizon = 400;
  config.sigma = 0.0;
  config.v = 0.0;
  config.arms = 6;
  config.dim = 4;
  const MetricsSeries series = harness::run_episode(config, 0);
  const auto& cum = series.cum_regret();
  // sublinear: the second half adds less than the first half
  const double first_half = cum[199];
  const double second_half = cum[399] - cum[199];
  EXPECT_LT(second_half, std::max(first_half, 1e-9));
}

TEST(RunExperiment, SingleRepMeansEqualEpisodeWithZeroSd) {
  RunConfig config = tiny_config();
  config.reps = 1;
  const harness::ExperimentResult result = harness::run_experiment(config);
  const MetricsSeries episode = harness::run_episode(config, 0);
  for (int t = 0; t < config.horizon; ++t) {
    ASSERT_DOUBLE_EQ(result.cum_regret.mean[t], episode.cum_regret()[t]);
    ASSERT_DOUBLE_EQ(result.cum_regret.sd[t], 0.0);
  }
}

TEST(RunExperiment, MeanBoundedByEpisodeExtremes) {
  const RunConfig config = tiny_config();
  const harness::ExperimentResult result = harness::run_experiment(config);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int rep = 0; rep < config.reps; ++rep) {
    const double final_regret = harness::run_episode(config, rep).final_cum_regret();
    lo = std::min(lo, final_regret);
    hi = std::max(hi, final_regret);
  }
  EXPECT_GE(result.final_regret_mean, lo - 1e-12);
  EXPECT_LE(result.final_regret_mean, hi + 1e-12);
}

TEST(RunExperiment, WorkerCountNeverChangesNumbers) {
  RunConfig serial = tiny_config();
  serial.workers = 1;
  RunConfig parallel = tiny_config();
  parallel.workers = 2;
  const auto a = harness::run_experiment(serial);
  const auto b = harness::run_experiment(parallel);
  EXPECT_EQ(harness::rounds_csv({a}), harness::rounds_csv({b}));
}

TEST(EmitOutputs, FilesExistWithExactSchema) {
  const RunConfig config = tiny_config();
  const harness::ExperimentResult result = harness::run_experiment(config);
  const fs::path dir = fs::temp_directory_path() / "drbandit_emit_test";
  fs::remove_all(dir);
  harness::emit_outputs(config, {result}, dir.string());

  const std::string rounds = read_text_file(dir / "rounds.csv");
  EXPECT_EQ(rounds.substr(0, rounds.find('\n')),
            "round,metric,mean,sd,policy,N,d,v,gamma,seed");
  EXPECT_NE(rounds.find("cum_regret"), std::string::npos);
  EXPECT_NE(rounds.find("est_error"), std::string::npos);

  const std::string summary = read_text_file(dir / "summary.csv");
  EXPECT_NE(summary.find("drts"), std::string::npos);

  for (const char* plot : {"cum_regret.svg", "est_error.svg"}) {
    const std::string svg = read_text_file(dir / plot);
    EXPECT_GT(svg.size(), 500u) << plot;
    EXPECT_NE(svg.find("<polyline"), std::string::npos) << plot;
  }
  fs::remove_all(dir);
}

TEST(EmitOutputs, ManifestReproducesTheRunBitForBit) {
  RunConfig config = tiny_config();
  config.gamma = 0.21;
  const harness::ExperimentResult result = harness::run_experiment(config);
  const fs::path dir = fs::temp_directory_path() / "drbandit_manifest_test";
  fs::remove_all(dir);
  harness::emit_outputs(config, {result}, dir.string());

  const RunConfig reloaded = load_run_config((dir / "manifest.toml").string());
  const harness::ExperimentResult again = harness::run_experiment(reloaded);
  EXPECT_EQ(harness::rounds_csv({result}), harness::rounds_csv({again}));
  fs::remove_all(dir);
}

TEST(RunSweep, EnumeratesGridAndPicksMinimumRegret) {
  RunConfig base = tiny_config();
  base.horizon = 20;
  base.reps = 2;
  base.v_grid = {0.01, 0.3};
  base.gamma_grid = {0.1};
  const harness::SweepOutcome outcome = harness::run_sweep(base);
  // lints: 2 cells, blts: 2 x 1, drts: 2
  EXPECT_EQ(outcome.cells.size(), 6u);
  for (PolicyKind kind : {PolicyKind::lints, PolicyKind::blts, PolicyKind::drts}) {
    const auto& best = outcome.best_result(kind);
    for (const auto& cell : outcome.cells) {
      if (cell.policy == kind) {
        EXPECT_LE(best.final_regret_mean, cell.result.final_regret_mean + 1e-12);
      }
    }
  }
  EXPECT_EQ(harness::figure_results(outcome).size(), 3u);
}

TEST(Validation, RowsSerializeToCsv) {
  const std::vector<validation::OracleRow> rows = {
      {"example_check", 10.0, 0.5, 1.0, true}};
  const std::string csv = validation::rows_to_csv(rows);
  EXPECT_EQ(csv,
            "check,checkpoint,statistic,bound,pass\n"
            "example_check,10,0.5,1,pass\n");
  EXPECT_TRUE(validation::all_pass(rows));
}

TEST(Validation, IncrementalRowPassesAtUnitScale) {
  const auto row = validation::incremental_row(5, 10, 30);
  EXPECT_TRUE(row.pass) << row.statistic;
}

}  // namespace
}  // namespace drbandit
