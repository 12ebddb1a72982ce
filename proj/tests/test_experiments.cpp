#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "kgof/experiments.hpp"
#include "kgof/io.hpp"
#include "kgof/random.hpp"
#include "kgof/stein.hpp"
#include "kgof/targets.hpp"
#include "oracles.hpp"

using kgof::experiments::exit_code_for;
using kgof::experiments::ExperimentConfig;
using kgof::experiments::run_experiment;
using nlohmann::json;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& contents)
      : path("/tmp/kgof_exp_" + name) {
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string normal_csv(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::string out;
  char buf[64];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", normal(rng));
    out += buf;
  }
  return out;
}

}  // namespace

TEST_CASE("calibrate reports are reproducible from the echoed seed") {
  ExperimentConfig cfg;
  cfg.experiment = "calibrate";
  cfg.target = "normal";
  cfg.d = 1;
  cfg.n = 60;
  cfg.trials = 6;
  cfg.replicates = 50;
  cfg.seed = 20240809;
  const json a = run_experiment(cfg);
  const json b = run_experiment(cfg);
  CHECK(a.at("results").at("p_values") == b.at("results").at("p_values"));
  CHECK(a.at("config").at("seed") == 20240809);
  CHECK(a.at("results").at("p_values").size() == 6);
  const double rate = a.at("results").at("rejection_rate").get<double>();
  CHECK(rate >= 0.0);
  CHECK(rate <= 1.0);
  for (const auto& p : a.at("results").at("p_values")) {
    CHECK(p.get<double>() > 0.0);
    CHECK(p.get<double>() <= 1.0);
  }
}

TEST_CASE("test experiment runs on a csv file") {
  TempFile data("samples.csv", normal_csv(150, 5));
  ExperimentConfig cfg;
  cfg.experiment = "test";
  cfg.input = data.path;
  cfg.target = "normal";
  cfg.replicates = 80;
  cfg.seed = 99;
  const json report = run_experiment(cfg);
  const auto& result = report.at("results").at("result");
  CHECK(result.at("method") == "stein");
  CHECK(result.at("n") == 150);
  CHECK(result.at("d") == 1);
  CHECK(result.at("p_value").get<double>() > 0.0);
  const bool reject = result.at("reject").get<bool>();
  CHECK(reject ==
        (result.at("statistic").get<double>() > result.at("threshold").get<double>()));
  CHECK(exit_code_for(report, true) == (reject ? 1 : 0));
  CHECK(exit_code_for(report, false) == 0);

  // Identical rerun reproduces the p-value bitwise.
  const json again = run_experiment(cfg);
  CHECK(report.at("results").at("result").at("p_value") ==
        again.at("results").at("result").at("p_value"));
}

TEST_CASE("test experiment honors explicit thinning and bandwidth") {
  TempFile data("thinned.csv", normal_csv(200, 7));
  ExperimentConfig cfg;
  cfg.experiment = "test";
  cfg.input = data.path;
  cfg.replicates = 50;
  cfg.thin = "4";
  cfg.bandwidth = "1.25";
  const json report = run_experiment(cfg);
  const auto& result = report.at("results").at("result");
  CHECK(result.at("n") == 50);
  CHECK(result.at("thin_factor") == 4);
  CHECK(result.at("an").get<double>() == doctest::Approx(0.025));
  CHECK(result.at("bandwidth").get<double>() == 1.25);
}

TEST_CASE("stein matrix dump matches a direct computation") {
  TempFile data("dump.csv", normal_csv(40, 9));
  const std::string dump_path = "/tmp/kgof_exp_dump_h.csv";
  ExperimentConfig cfg;
  cfg.experiment = "test";
  cfg.input = data.path;
  cfg.replicates = 30;
  cfg.bandwidth = "1.0";
  cfg.dump_stein_matrix = dump_path;
  run_experiment(cfg);
  const kgof::Matd h = kgof::read_samples_csv(dump_path);
  REQUIRE(h.rows() == 40);
  REQUIRE(h.cols() == 40);
  const kgof::Matd samples = kgof::read_samples_csv(data.path);
  const kgof::RbfKernel<double> kernel(1.0);
  const auto target = kgof::standard_normal_target<double>(1);
  const kgof::Matd expected = kgof::stein_matrix<double>(target, kernel, samples);
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-12);
  std::remove(dump_path.c_str());
}

TEST_CASE("standardized residual configs match manual standardization bitwise") {
  // Raw observations with per-sample means/sds; the pipeline must equal
  // standardizing first and testing against the standard normal.
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 80;
  std::string raw_csv, standardized_csv, mu_json, sigma_json;
  {
    char buf[128];
    std::string mus = "[", sigmas = "[";
    for (int i = 0; i < n; ++i) {
      const double mu = 0.1 * i;
      const double sigma = 1.0 + 0.01 * i;
      const double z = normal(rng);
      const double y = mu + sigma * z;
      std::snprintf(buf, sizeof(buf), "%.17g\n", y);
      raw_csv += buf;
      std::snprintf(buf, sizeof(buf), "%.17g\n", (y - mu) / sigma);
      standardized_csv += buf;
      std::snprintf(buf, sizeof(buf), i ? ",%.17g" : "%.17g", mu);
      mus += buf;
      std::snprintf(buf, sizeof(buf), i ? ",%.17g" : "%.17g", sigma);
      sigmas += buf;
    }
    mu_json = mus + "]";
    sigma_json = sigmas + "]";
  }
  TempFile raw("raw.csv", raw_csv);
  TempFile standardized("standardized.csv", standardized_csv);
  TempFile target_cfg("residual.json", std::string("{\"family\":\"standardized-residual\",") +
                                           "\"mu\":" + mu_json + ",\"sigma\":" + sigma_json +
                                           "}");

  ExperimentConfig via_residual;
  via_residual.experiment = "test";
  via_residual.input = raw.path;
  via_residual.target = target_cfg.path;
  via_residual.replicates = 60;
  via_residual.bandwidth = "median";
  via_residual.seed = 4;

  ExperimentConfig via_manual = via_residual;
  via_manual.input = standardized.path;
  via_manual.target = "normal";

  const json a = run_experiment(via_residual);
  const json b = run_experiment(via_manual);
  CHECK(a.at("results").at("result").at("statistic") ==
        b.at("results").at("result").at("statistic"));
  CHECK(a.at("results").at("result").at("p_value") ==
        b.at("results").at("result").at("p_value"));
  CHECK(a.at("results").at("standardized") == true);
}

TEST_CASE("power table produces a grid with both methods") {
  ExperimentConfig cfg;
  cfg.experiment = "power-table";
  cfg.dims = {1, 2};
  cfg.n = 60;
  cfg.trials = 3;
  cfg.replicates = 40;
  cfg.bh_replicates = 40;
  cfg.seed = 11;
  const json report = run_experiment(cfg);
  CHECK(report.at("results").at("dims").size() == 2);
  CHECK(report.at("results").at("stein_power").size() == 2);
  CHECK(report.at("results").at("bh_power").size() == 2);
  for (const auto& cell : report.at("results").at("cells")) {
    CHECK(cell.at("stein_p_values").size() == 3);
    CHECK(cell.at("bh_p_values").size() == 3);
  }
}

TEST_CASE("mcmc-student sweeps dofs and reports rates") {
  ExperimentConfig cfg;
  cfg.experiment = "mcmc-student";
  cfg.dofs = {std::numeric_limits<double>::infinity()};
  cfg.n = 80;
  cfg.trials = 2;
  cfg.replicates = 40;
  cfg.thin = "2";
  cfg.a_n = 0.1;
  cfg.a_n_set = true;
  cfg.seed = 17;
  const json report = run_experiment(cfg);
  const auto& entry = report.at("results").at("per_dof").at(0);
  CHECK(entry.at("dof") == "inf");
  CHECK(entry.at("p_values").size() == 2);
  CHECK(entry.at("mean_acceptance_rate").get<double>() > 0.0);
}

TEST_CASE("austerity sweep reports evals and p-values per epsilon") {
  ExperimentConfig cfg;
  cfg.experiment = "austerity-sweep";
  cfg.epsilons = {0.01, 0.2};
  cfg.trials = 1;
  cfg.n = 60;
  cfg.replicates = 40;
  cfg.mixture_data_n = 80;
  cfg.chain_steps = 1500;
  cfg.seed = 23;
  const json report = run_experiment(cfg);
  const auto& per_eps = report.at("results").at("per_epsilon");
  REQUIRE(per_eps.size() == 2);
  const double evals_tight = per_eps.at(0).at("mean_likelihood_evals").get<double>();
  const double evals_loose = per_eps.at(1).at("mean_likelihood_evals").get<double>();
  CHECK(evals_loose < evals_tight);
  CHECK(per_eps.at(0).at("p_values").size() == 1);
}

TEST_CASE("bh-compare mirrors the test subcommand shape") {
  TempFile data("bh.csv", normal_csv(120, 41));
  ExperimentConfig cfg;
  cfg.experiment = "bh-compare";
  cfg.input = data.path;
  cfg.replicates = 60;
  cfg.seed = 5;
  const json report = run_experiment(cfg);
  const auto& result = report.at("results").at("result");
  CHECK(result.at("method") == "bh");
  CHECK(result.at("p_value").get<double>() > 0.0);
  CHECK(result.contains("threshold"));
}

TEST_CASE("test subcommand p-values look uniform under the null in aggregate") {
  std::vector<double> p_values;
  int rejections = 0;
  for (int t = 0; t < 50; ++t) {
    TempFile data("unif_" + std::to_string(t) + ".csv", normal_csv(150, 6000 + t));
    ExperimentConfig cfg;
    cfg.experiment = "test";
    cfg.input = data.path;
    cfg.replicates = 150;
    cfg.seed = kgof::derive_seed(606, t);
    const json report = run_experiment(cfg);
    p_values.push_back(report.at("results").at("result").at("p_value").get<double>());
    rejections += report.at("results").at("reject").get<bool>() ? 1 : 0;
  }
  CHECK(oracles::ks_uniform_pvalue(p_values) > 0.005);
  CHECK(rejections <= 8);
}

TEST_CASE("config validation rejects bad values and unknown names") {
  ExperimentConfig cfg;
  cfg.experiment = "does-not-exist";
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg.experiment = "calibrate";
  cfg.alpha = 0.9;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg.alpha = 0.05;
  cfg.target = "banana";
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg.target = "normal";
  cfg.trials = 0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("unknown keys in target configs are rejected") {
  TempFile bad("bad_target.json", "{\"family\":\"student-t\",\"dof\":5,\"scale\":2}");
  TempFile data("data.csv", normal_csv(50, 43));
  ExperimentConfig cfg;
  cfg.experiment = "test";
  cfg.input = data.path;
  cfg.target = bad.path;
  cfg.replicates = 30;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}
