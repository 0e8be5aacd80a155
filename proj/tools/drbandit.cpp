// Command-line front end: single runs, hyperparameter sweeps, the validation
// suite, and side-by-side figure reproduction.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "drbandit/config.hpp"
#include "drbandit/harness.hpp"
#include "drbandit/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitValidation = 3;

struct CliOverrides {
  std::string config_path;
  std::string policy;
  int horizon = -1;
  int reps = -1;
  int arms = -1;
  int dim = -1;
  double rho = -1.0;
  double sigma = -1.0;
  std::string v;       // number or "auto"
  std::string gamma;   // number or "auto"
  std::string lambda_mode;
  double lambda_base = -1.0;
  double delta = -1.0;
  int qmc_points = -1;
  std::int64_t seed = -1;
  std::string output_dir;
  int workers = -1;
  std::vector<double> mu;
  std::vector<double> beta;
};

void add_common_options(CLI::App* cmd, CliOverrides* opt) {
  cmd->add_option("--config", opt->config_path, "TOML config file; flags override keys");
  cmd->add_option("--policy", opt->policy, "lints, blts, or drts");
  cmd->add_option("--T", opt->horizon, "horizon (rounds per episode)");
  cmd->add_option("--reps", opt->reps, "replication count");
  cmd->add_option("--N", opt->arms, "number of arms");
  cmd->add_option("--d", opt->dim, "context dimension");
  cmd->add_option("--rho", opt->rho, "inter-arm context correlation");
  cmd->add_option("--sigma", opt->sigma, "reward noise scale");
  cmd->add_option("--v", opt->v, "exploration scale, or \"auto\"");
  cmd->add_option("--gamma", opt->gamma, "selection threshold, or \"auto\"");
  cmd->add_option("--lambda-mode", opt->lambda_mode, "algorithmic or theoretical");
  cmd->add_option("--lambda-base", opt->lambda_base, "base ridge regularizer");
  cmd->add_option("--delta", opt->delta, "confidence parameter");
  cmd->add_option("--qmc-points", opt->qmc_points, "quasi-MC node count");
  cmd->add_option("--seed", opt->seed, "master seed");
  cmd->add_option("--out", opt->output_dir, "output directory");
  cmd->add_option("--workers", opt->workers, "worker threads (0 = hardware)");
  cmd->add_option("--mu", opt->mu, "per-arm means")->delimiter(',');
  cmd->add_option("--beta", opt->beta, "fixed ground-truth coefficients")->delimiter(',');
}

drbandit::RunConfig build_config(const CliOverrides& opt) {
  using drbandit::ConfigError;
  drbandit::RunConfig config;
  if (!opt.config_path.empty()) config = drbandit::load_run_config(opt.config_path);
  if (!opt.policy.empty()) config.policy = drbandit::policy_from_string(opt.policy);
  if (opt.horizon >= 0) config.horizon = opt.horizon;
  if (opt.reps >= 0) config.reps = opt.reps;
  if (opt.arms >= 0) config.arms = opt.arms;
  if (opt.dim >= 0) config.dim = opt.dim;
  if (opt.rho >= 0.0) config.rho = opt.rho;
  if (opt.sigma >= 0.0) config.sigma = opt.sigma;
  if (!opt.v.empty()) {
    config.v = opt.v == "auto" ? std::nullopt : std::optional<double>(std::stod(opt.v));
  }
  if (!opt.gamma.empty()) {
    config.gamma =
        opt.gamma == "auto" ? std::nullopt : std::optional<double>(std::stod(opt.gamma));
  }
  if (!opt.lambda_mode.empty()) {
    if (opt.lambda_mode == "algorithmic") {
      config.lambda_mode = drbandit::LambdaMode::algorithmic;
    } else if (opt.lambda_mode == "theoretical") {
      config.lambda_mode = drbandit::LambdaMode::theoretical;
    } else {
      throw ConfigError("--lambda-mode must be algorithmic or theoretical");
    }
  }
  if (opt.lambda_base >= 0.0) config.lambda_base = opt.lambda_base;
  if (opt.delta >= 0.0) config.delta = opt.delta;
  if (opt.qmc_points >= 0) config.qmc_points = opt.qmc_points;
  if (opt.seed >= 0) config.seed = static_cast<std::uint64_t>(opt.seed);
  if (!opt.output_dir.empty()) config.output_dir = opt.output_dir;
  if (opt.workers >= 0) config.workers = opt.workers;
  if (!opt.mu.empty()) config.mu = opt.mu;
  if (!opt.beta.empty()) config.beta = opt.beta;
  config.validate();
  return config;
}

void print_summary(const std::vector<drbandit::harness::ExperimentResult>& results) {
  std::fputs(drbandit::harness::summary_csv(results).c_str(), stdout);
}

int cmd_run(const CliOverrides& opt) {
  const drbandit::RunConfig config = build_config(opt);
  const auto result = drbandit::harness::run_experiment(config);
  drbandit::harness::emit_outputs(config, {result}, config.output_dir);
  print_summary({result});
  std::printf("outputs written to %s\n", config.output_dir.c_str());
  return kExitOk;
}

int cmd_sweep(const CliOverrides& opt) {
  const drbandit::RunConfig config = build_config(opt);
  const auto outcome = drbandit::harness::run_sweep(config);
  std::vector<drbandit::harness::ExperimentResult> all_cells;
  for (const auto& cell : outcome.cells) all_cells.push_back(cell.result);
  drbandit::write_text_file(
      std::filesystem::path(config.output_dir) / "sweep_summary.csv",
      drbandit::harness::summary_csv(all_cells));
  const auto best = drbandit::harness::figure_results(outcome);
  drbandit::harness::emit_outputs(config, best, config.output_dir);
  std::printf("sweep cells: %zu (best per policy below)\n", outcome.cells.size());
  print_summary(best);
  std::printf("outputs written to %s\n", config.output_dir.c_str());
  return kExitOk;
}

int cmd_figure(const CliOverrides& opt) {
  const drbandit::RunConfig config = build_config(opt);
  const auto outcome = drbandit::harness::run_sweep(config);
  const auto best = drbandit::harness::figure_results(outcome);
  drbandit::harness::emit_outputs(config, best, config.output_dir);
  print_summary(best);
  std::printf("figure panels written to %s\n", config.output_dir.c_str());
  return kExitOk;
}

int cmd_validate(const CliOverrides& opt, bool quick) {
  const int workers = opt.workers >= 0 ? opt.workers : 0;
  const auto rows = drbandit::validation::run_all(quick, workers);
  const std::string csv = drbandit::validation::rows_to_csv(rows);
  std::fputs(csv.c_str(), stdout);
  if (!opt.output_dir.empty()) {
    drbandit::write_text_file(
        std::filesystem::path(opt.output_dir) / "validation.csv", csv);
  }
  return drbandit::validation::all_pass(rows) ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual linear bandit simulations: doubly robust Thompson "
               "sampling with LinTS and BLTS baselines"};
  app.require_subcommand(1);

  CliOverrides run_opt, sweep_opt, figure_opt, validate_opt;
  bool quick = false;

  CLI::App* run = app.add_subcommand("run", "run one experiment configuration");
  add_common_options(run, &run_opt);
  CLI::App* sweep = app.add_subcommand("sweep", "grid-evaluate v (and gamma for BLTS)");
  add_common_options(sweep, &sweep_opt);
  CLI::App* figure =
      app.add_subcommand("figure", "best-v comparison panels for the three policies");
  add_common_options(figure, &figure_opt);
  CLI::App* validate = app.add_subcommand("validate", "run the validation suite");
  validate->add_option("--out", validate_opt.output_dir, "directory for validation.csv");
  validate->add_option("--workers", validate_opt.workers, "worker threads");
  validate->add_flag("--quick", quick, "reduced sample sizes (smoke test)");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_opt);
    if (sweep->parsed()) return cmd_sweep(sweep_opt);
    if (figure->parsed()) return cmd_figure(figure_opt);
    if (validate->parsed()) return cmd_validate(validate_opt, quick);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const drbandit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}
