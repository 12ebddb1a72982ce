// Command-line front end for the kernel goodness-of-fit test suite.
//
// Subcommands: test, calibrate, power-table, mcmc-student, austerity-sweep,
// bh-compare. Every run emits a JSON report (stdout or --output) that echoes
// the seed and configuration, so any report can be reproduced exactly.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgof/experiments.hpp"

namespace {

using kgof::experiments::ExperimentConfig;

double parse_dof_token(const std::string& token) {
  if (token == "inf" || token == "Inf" || token == "INF")
    return std::numeric_limits<double>::infinity();
  return std::stod(token);
}

std::vector<double> parse_dof_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    try {
      out.push_back(parse_dof_token(token));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--dof", "expected a comma-separated list of numbers or 'inf'");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--dof", "empty list");
  return out;
}

void add_common_flags(CLI::App* cmd, ExperimentConfig& cfg, bool* an_flagged) {
  cmd->add_option("--kernel", cfg.kernel, "Kernel family (rbf)")->capture_default_str();
  cmd->add_option("--bandwidth", cfg.bandwidth,
                  "Kernel bandwidth: 'median' or a positive number")
      ->capture_default_str();
  cmd->add_option("--an", cfg.a_n, "Wild bootstrap sign-flip probability in (0,1]")
      ->check(CLI::Range(1e-12, 1.0))
      ->each([an_flagged](const std::string&) { *an_flagged = true; });
  cmd->add_option("--replicates", cfg.replicates, "Bootstrap replicate count D")
      ->capture_default_str();
  cmd->add_option("--alpha", cfg.alpha, "Test level")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Master RNG seed")->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  cmd->add_option("--output", cfg.output, "Write the JSON report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel Stein goodness-of-fit testing"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  bool an_flagged = false;
  std::string dof_list_raw;

  auto* test = app.add_subcommand("test", "Test samples from a file against a target density");
  test->add_option("--input", cfg.input, "Sample file (one sample per row)")->required();
  test->add_option("--format", cfg.format, "Input format: csv or json")->capture_default_str();
  test->add_flag("--header", cfg.header, "Skip a single CSV header row");
  test->add_option("--target", cfg.target,
                   "Target: normal, student-t, or a .json target config path")
      ->capture_default_str();
  test->add_option("--dof", cfg.dof, "Degrees of freedom for --target student-t");
  test->add_option("--thin", cfg.thin, "Thinning: none, auto, or an integer factor")
      ->capture_default_str();
  test->add_option("--dump-stein-matrix", cfg.dump_stein_matrix,
                   "Write the Stein matrix to this CSV path");
  test->add_flag("--fail-on-reject", cfg.fail_on_reject, "Exit with code 1 when rejecting");
  add_common_flags(test, cfg, &an_flagged);

  auto* calibrate =
      app.add_subcommand("calibrate", "Null p-value distribution on i.i.d. target draws");
  calibrate->add_option("--target", cfg.target, "normal or student-t")->capture_default_str();
  calibrate->add_option("--dof", cfg.dof, "Degrees of freedom for student-t");
  calibrate->add_option("--d", cfg.d, "Sample dimension")->capture_default_str();
  calibrate->add_option("--n", cfg.n, "Samples per trial")->capture_default_str();
  calibrate->add_option("--trials", cfg.trials, "Number of trials")->capture_default_str();
  add_common_flags(calibrate, cfg, &an_flagged);

  auto* power = app.add_subcommand(
      "power-table", "Stein vs Baringhaus-Henze power across dimensions (shifted normal)");
  {
    static std::string dims_raw;
    power->add_option("--d", dims_raw, "Comma-separated dimension list")
        ->default_str("2,5,10,15,20,25");
    power->parse_complete_callback([&]() {
      if (dims_raw.empty()) return;
      cfg.dims.clear();
      std::stringstream ss(dims_raw);
      std::string token;
      while (std::getline(ss, token, ','))
        if (!token.empty()) cfg.dims.push_back(std::stoi(token));
    });
  }
  power->add_option("--n", cfg.n, "Samples per trial")->capture_default_str();
  power->add_option("--trials", cfg.trials, "Trials per dimension")->capture_default_str();
  power->add_option("--bh-replicates", cfg.bh_replicates,
                    "Null resamples for the Baringhaus-Henze test (0 = same as --replicates)");
  add_common_flags(power, cfg, &an_flagged);

  auto* mcmc = app.add_subcommand(
      "mcmc-student", "MH chains targeting Student's t, tested against the standard normal");
  mcmc->add_option("--dof", dof_list_raw, "Comma-separated dof list; 'inf' allowed")
      ->default_str("1,5,10,inf");
  mcmc->add_option("--n", cfg.n, "Tested samples per trial")->capture_default_str();
  mcmc->add_option("--trials", cfg.trials, "Trials per dof")->capture_default_str();
  mcmc->add_option("--thin", cfg.thin, "Thinning: none, auto, or an integer factor")
      ->capture_default_str();
  mcmc->add_option("--burn-in", cfg.burn_in, "Burn-in fraction")->capture_default_str();
  mcmc->add_option("--proposal-sd", cfg.proposal_sd,
                   "Random walk proposal std dev (0 = default sqrt(0.5))");
  mcmc->add_option("--chain-steps", cfg.chain_steps, "Raw chain length (0 = derived)");
  mcmc->add_option("--dump-chain", cfg.dump_chain, "Write the first chain to this CSV path");
  add_common_flags(mcmc, cfg, &an_flagged);

  auto* austerity = app.add_subcommand(
      "austerity-sweep", "Subsampled MH bias and cost across epsilon on a mixture posterior");
  {
    static std::string eps_raw;
    austerity->add_option("--eps", eps_raw, "Comma-separated epsilon list")
        ->default_str("0.001,0.01,0.05,0.1,0.2");
    austerity->parse_complete_callback([&]() {
      if (eps_raw.empty()) return;
      cfg.epsilons.clear();
      std::stringstream ss(eps_raw);
      std::string token;
      while (std::getline(ss, token, ','))
        if (!token.empty()) cfg.epsilons.push_back(std::stod(token));
    });
  }
  austerity->add_option("--n", cfg.n, "Tested posterior samples per trial")
      ->capture_default_str();
  austerity->add_option("--trials", cfg.trials, "Trials per epsilon")->capture_default_str();
  austerity->add_option("--data-points", cfg.mixture_data_n, "Observations in the dataset")
      ->capture_default_str();
  austerity->add_option("--burn-in", cfg.burn_in, "Burn-in fraction")->capture_default_str();
  austerity->add_option("--proposal-sd", cfg.proposal_sd,
                        "Random walk proposal std dev (0 = default 0.5)");
  austerity->add_option("--chain-steps", cfg.chain_steps, "Raw chain length (0 = 15000)");
  add_common_flags(austerity, cfg, &an_flagged);

  auto* bh = app.add_subcommand("bh-compare",
                                "Baringhaus-Henze normality test on samples from a file");
  bh->add_option("--input", cfg.input, "Sample file (one sample per row)")->required();
  bh->add_option("--format", cfg.format, "Input format: csv or json")->capture_default_str();
  bh->add_flag("--header", cfg.header, "Skip a single CSV header row");
  bh->add_option("--bh-replicates", cfg.bh_replicates, "Null resamples (0 = --replicates)");
  bh->add_flag("--fail-on-reject", cfg.fail_on_reject, "Exit with code 1 when rejecting");
  add_common_flags(bh, cfg, &an_flagged);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  cfg.a_n_set = an_flagged;
  for (auto* cmd : {test, calibrate, power, mcmc, austerity, bh})
    if (cmd->parsed()) cfg.experiment = cmd->get_name();

  try {
    if (cfg.experiment == "mcmc-student" && !dof_list_raw.empty())
      cfg.dofs = parse_dof_list(dof_list_raw);
    const nlohmann::json report = kgof::experiments::run_experiment(cfg);
    if (cfg.output.empty()) {
      std::cout << report.dump(2) << std::endl;
    } else {
      std::ofstream out(cfg.output);
      if (!out) throw std::runtime_error("cannot open output file: " + cfg.output);
      out << report.dump(2) << std::endl;
    }
    return kgof::experiments::exit_code_for(report, cfg.fail_on_reject);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
