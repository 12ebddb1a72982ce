#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace kgof::experiments {

/// Declarative description of one experiment run. Field applicability depends
/// on the experiment; run_experiment validates ranges and rejects unknown
/// experiment names, target families, and config keys.
struct ExperimentConfig {
  std::string experiment;  // test|calibrate|power-table|mcmc-student|austerity-sweep|bh-compare

  // Target and kernel.
  std::string target = "normal";  // family name or path to a JSON target config
  double dof = std::numeric_limits<double>::infinity();  // for --target student-t
  std::string kernel = "rbf";
  std::string bandwidth = "median";  // "median" or a positive number

  // Test parameters.
  double a_n = 0.5;
  bool a_n_set = false;  // true when the user pinned a_n explicitly
  int replicates = 1000;
  int bh_replicates = 0;  // 0: same as replicates
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int trials = 100;
  std::string thin = "none";  // "none" | "auto" | positive integer
  int n = 500;
  int d = 1;

  // Experiment-specific sweeps.
  std::vector<int> dims = {2, 5, 10, 15, 20, 25};               // power-table
  std::vector<double> dofs = {1.0, 5.0, 10.0,                   // mcmc-student
                              std::numeric_limits<double>::infinity()};
  std::vector<double> epsilons = {0.001, 0.01, 0.05, 0.1, 0.2};  // austerity-sweep

  // Chain generation.
  double burn_in = 0.1;
  double proposal_sd = 0.0;  // 0: per-experiment default
  int chain_steps = 0;       // 0: derived from n, thin and burn_in
  int mixture_data_n = 400;

  // Input / output.
  std::string input;
  std::string format = "csv";
  bool header = false;
  std::string output;
  std::string dump_stein_matrix;
  std::string dump_chain;
  bool fail_on_reject = false;

  unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs the configured experiment and returns a machine-readable report.
/// All randomness derives from config.seed, which is echoed in the report;
/// re-running with the same config reproduces the report's numbers exactly.
nlohmann::json run_experiment(const ExperimentConfig& config);

/// 0 on success, 1 when fail_on_reject is set and the report carries a
/// test-level rejection.
int exit_code_for(const nlohmann::json& report, bool fail_on_reject);

}  // namespace kgof::experiments
