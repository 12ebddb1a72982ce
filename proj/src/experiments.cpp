#include "kgof/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kgof/baselines.hpp"
#include "kgof/bootstrap.hpp"
#include "kgof/io.hpp"
#include "kgof/kernels.hpp"
#include "kgof/parallel.hpp"
#include "kgof/samplers.hpp"
#include "kgof/stein.hpp"
#include "kgof/targets.hpp"

namespace kgof::experiments {

namespace {

using nlohmann::json;

struct ResolvedTarget {
  TargetDensity<double> target;
  std::optional<StandardizedResidualTarget<double>> residual;
  std::optional<MixturePosterior<double>> mixture;
  std::string family;
  double dof = std::numeric_limits<double>::infinity();
};

Vecd json_to_vec(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("target config: '" + what + "' must be a nonempty array");
  Vecd v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& x : j) {
    if (!x.is_number())
      throw std::invalid_argument("target config: '" + what + "' must contain numbers");
    v[i++] = x.get<double>();
  }
  return v;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) known = true;
    if (!known) throw std::invalid_argument("target config: unknown key '" + it.key() + "'");
  }
}

ResolvedTarget load_target_file(const std::string& path, Index dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open target config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("target config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("family"))
    throw std::invalid_argument("target config: expected an object with a 'family' key");
  const std::string family = j.at("family").get<std::string>();
  ResolvedTarget out;
  out.family = family;
  if (family == "normal") {
    reject_unknown_keys(j, {"family", "dim"});
    const Index d = j.contains("dim") ? j.at("dim").get<Index>() : dim;
    out.target = standard_normal_target<double>(d);
  } else if (family == "student-t") {
    reject_unknown_keys(j, {"family", "dof", "dim"});
    if (!j.contains("dof")) throw std::invalid_argument("target config: student-t needs 'dof'");
    const double nu = j.at("dof").get<double>();
    const Index d = j.contains("dim") ? j.at("dim").get<Index>() : dim;
    out.dof = nu;
    out.target = student_t_target<double>(nu, d);
  } else if (family == "mixture-posterior") {
    reject_unknown_keys(j, {"family", "data"});
    if (!j.contains("data"))
      throw std::invalid_argument("target config: mixture-posterior needs 'data'");
    out.mixture.emplace(json_to_vec(j.at("data"), "data"));
    out.target = out.mixture->target();
  } else if (family == "standardized-residual") {
    reject_unknown_keys(j, {"family", "mu", "sigma"});
    if (!j.contains("mu") || !j.contains("sigma"))
      throw std::invalid_argument("target config: standardized-residual needs 'mu' and 'sigma'");
    out.residual.emplace(json_to_vec(j.at("mu"), "mu"), json_to_vec(j.at("sigma"), "sigma"));
    out.target = out.residual->target();
  } else {
    throw std::invalid_argument("target config: unknown family '" + family + "'");
  }
  return out;
}

ResolvedTarget resolve_target(const ExperimentConfig& cfg, Index dim) {
  ResolvedTarget out;
  if (cfg.target == "normal") {
    out.family = "normal";
    out.target = standard_normal_target<double>(dim);
  } else if (cfg.target == "student-t") {
    out.family = "student-t";
    out.dof = cfg.dof;
    out.target = student_t_target<double>(cfg.dof, dim);
  } else if (cfg.target.size() > 5 && cfg.target.substr(cfg.target.size() - 5) == ".json") {
    out = load_target_file(cfg.target, dim);
  } else {
    throw std::invalid_argument("unknown target '" + cfg.target +
                                "' (expected normal, student-t, or a .json config path)");
  }
  return out;
}

double resolve_bandwidth(const std::string& spec, const Matd& samples) {
  if (spec == "median") return median_heuristic<double>(samples);
  std::size_t pos = 0;
  double value = 0;
  try {
    value = std::stod(spec, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bandwidth must be 'median' or a positive number, got '" + spec +
                                "'");
  }
  if (pos != spec.size() || !(value > 0))
    throw std::invalid_argument("bandwidth must be 'median' or a positive number, got '" + spec +
                                "'");
  return value;
}

/// i.i.d. draws from a sampleable target family (normal or student-t).
Matd draw_iid_from_family(const ResolvedTarget& target, Index n, Index d, std::uint64_t seed) {
  auto rng = make_rng(seed);
  Matd out(n, d);
  if (target.family == "normal") {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) out(i, j) = normal(rng);
  } else if (target.family == "student-t") {
    if (std::isinf(target.dof)) {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) out(i, j) = normal(rng);
    } else {
      std::student_t_distribution<double> student(target.dof);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) out(i, j) = student(rng);
    }
  } else {
    throw std::invalid_argument("experiment requires a sampleable target family "
                                "(normal or student-t), got '" +
                                target.family + "'");
  }
  return out;
}

struct ThinDecision {
  Index factor = 1;
  double a_n = 0.5;
  bool from_auto = false;
  bool autocorr_ok = true;
  Index min_n = 0;
};

/// Applies the thin spec ("none", "auto", or an integer) to chain-ordered
/// samples. With "auto" the factor and a_n come from the autocorrelation rule;
/// an explicitly set a_n always wins. An integer thin factor implies
/// a_n = 0.1 / k unless a_n was pinned.
ThinDecision decide_thinning(const ExperimentConfig& cfg, const Matd& states) {
  ThinDecision out;
  if (cfg.thin == "none" || cfg.thin.empty()) {
    out.a_n = cfg.a_n;
    return out;
  }
  if (cfg.thin == "auto") {
    Chain<double> pseudo;
    pseudo.states = states;
    const ThinningAdvice advice = recommend_thinning(pseudo);
    out.factor = advice.thin_factor;
    out.a_n = cfg.a_n_set ? cfg.a_n : advice.a_n;
    out.from_auto = true;
    out.autocorr_ok = advice.autocorr_ok;
    out.min_n = advice.min_n;
    return out;
  }
  std::size_t pos = 0;
  long k = 0;
  try {
    k = std::stol(cfg.thin, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("--thin must be 'auto', 'none' or a positive integer");
  }
  if (pos != cfg.thin.size() || k < 1)
    throw std::invalid_argument("--thin must be 'auto', 'none' or a positive integer");
  out.factor = static_cast<Index>(k);
  out.a_n = cfg.a_n_set ? cfg.a_n : 0.1 / static_cast<double>(k);
  return out;
}

json test_result_to_json(const TestResult<double>& result, bool include_bootstrap = true) {
  json j;
  j["statistic"] = result.statistic;
  j["p_value"] = result.p_value;
  j["threshold"] = result.threshold;
  j["alpha"] = result.alpha;
  j["reject"] = result.reject;
  j["replicates"] = result.bootstrap_samples.size();
  if (include_bootstrap) j["bootstrap_samples"] = result.bootstrap_samples;
  return j;
}

void validate_common(const ExperimentConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5))
    throw std::invalid_argument("alpha must lie in (0, 0.5]");
  if (!(cfg.a_n > 0.0 && cfg.a_n <= 1.0)) throw std::invalid_argument("a_n must lie in (0, 1]");
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0))
    throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
  if (cfg.n < 2) throw std::invalid_argument("n must be >= 2");
  if (cfg.d < 1) throw std::invalid_argument("d must be >= 1");
  if (cfg.kernel != "rbf") throw std::invalid_argument("unknown kernel '" + cfg.kernel + "'");
  if (!(cfg.proposal_sd >= 0.0)) throw std::invalid_argument("proposal-sd must be >= 0");
}

json config_echo(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["target"] = cfg.target;
  if (cfg.target == "student-t") j["dof"] = cfg.dof;
  j["kernel"] = cfg.kernel;
  j["bandwidth"] = cfg.bandwidth;
  j["an"] = cfg.a_n;
  j["replicates"] = cfg.replicates;
  j["alpha"] = cfg.alpha;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["thin"] = cfg.thin;
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["burn_in"] = cfg.burn_in;
  return j;
}

// ---------------------------------------------------------------------------
// test / bh-compare: one test on ingested samples.

json run_single_test(const ExperimentConfig& cfg, bool baringhaus_henze) {
  if (cfg.input.empty()) throw std::invalid_argument("this experiment requires --input");
  Matd samples = read_samples(cfg.input, cfg.format, cfg.header);

  json report;
  ResolvedTarget resolved;
  if (!baringhaus_henze) {
    resolved = resolve_target(cfg, samples.cols());
    if (resolved.residual) {
      samples = resolved.residual->standardize(samples);
      report["standardized"] = true;
    }
    if (resolved.target.dim != samples.cols())
      throw std::invalid_argument("sample dimension " + std::to_string(samples.cols()) +
                                  " does not match target dimension " +
                                  std::to_string(resolved.target.dim));
  }

  const ThinDecision thin = decide_thinning(cfg, samples);
  if (thin.factor > 1) samples = thin_rows<double>(samples, thin.factor);
  const double sigma = resolve_bandwidth(cfg.bandwidth, samples);

  json result_json;
  bool reject = false;
  if (baringhaus_henze) {
    const int reps = cfg.bh_replicates > 0 ? cfg.bh_replicates : cfg.replicates;
    const TestResult<double> result =
        bh_test<double>(samples, sigma, reps, cfg.alpha, derive_seed(cfg.seed, 2));
    result_json = test_result_to_json(result);
    reject = result.reject;
    result_json["method"] = "bh";
  } else {
    const RbfKernel<double> kernel(sigma);
    const Matd h = stein_matrix<double>(resolved.target, kernel, samples, cfg.threads);
    if (!cfg.dump_stein_matrix.empty()) write_matrix_csv<double>(h, cfg.dump_stein_matrix);
    WildBootstrapConfig boot;
    boot.a_n = thin.a_n;
    boot.replicates = cfg.replicates;
    boot.seed = derive_seed(cfg.seed, 2);
    const TestResult<double> result = gof_test_from_matrix<double>(h, boot, cfg.alpha);
    result_json = test_result_to_json(result);
    reject = result.reject;
    result_json["method"] = "stein";
  }

  result_json["n"] = samples.rows();
  result_json["d"] = samples.cols();
  result_json["bandwidth"] = sigma;
  result_json["an"] = thin.a_n;
  result_json["thin_factor"] = thin.factor;
  if (thin.from_auto) {
    result_json["thin_autocorr_ok"] = thin.autocorr_ok;
    result_json["recommended_min_n"] = thin.min_n;
    if (samples.rows() < thin.min_n)
      result_json["warning"] = "fewer samples than the recommended minimum";
  }
  report["result"] = result_json;
  report["reject"] = reject;
  return report;
}

// ---------------------------------------------------------------------------
// calibrate: i.i.d. draws from the target, distribution of p-values.

json run_calibrate(const ExperimentConfig& cfg) {
  const ResolvedTarget resolved = resolve_target(cfg, cfg.d);
  if (resolved.target.dim != cfg.d)
    throw std::invalid_argument("target dimension does not match --d");

  std::vector<double> p_values(static_cast<std::size_t>(cfg.trials));
  std::vector<double> statistics(static_cast<std::size_t>(cfg.trials));
  std::vector<int> rejections(static_cast<std::size_t>(cfg.trials));

  parallel_for(
      cfg.trials,
      [&](std::ptrdiff_t t) {
        const std::uint64_t trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
        const Matd samples =
            draw_iid_from_family(resolved, cfg.n, cfg.d, derive_seed(trial_seed, 1));
        const double sigma = resolve_bandwidth(cfg.bandwidth, samples);
        const RbfKernel<double> kernel(sigma);
        WildBootstrapConfig boot;
        boot.a_n = cfg.a_n;
        boot.replicates = cfg.replicates;
        boot.seed = derive_seed(trial_seed, 2);
        const TestResult<double> result =
            gof_test<double>(samples, resolved.target, kernel, boot, cfg.alpha, 1);
        p_values[static_cast<std::size_t>(t)] = result.p_value;
        statistics[static_cast<std::size_t>(t)] = result.statistic;
        rejections[static_cast<std::size_t>(t)] = result.reject ? 1 : 0;
      },
      cfg.threads ? cfg.threads : std::thread::hardware_concurrency());

  double reject_sum = 0;
  for (int r : rejections) reject_sum += r;
  json report;
  report["p_values"] = p_values;
  report["statistics"] = statistics;
  report["rejections"] = rejections;
  report["rejection_rate"] = reject_sum / cfg.trials;
  return report;
}

// ---------------------------------------------------------------------------
// power-table: Stein vs Baringhaus-Henze power across dimensions for the
// shifted-first-coordinate alternative Z0 <- Z0 + U[0,1].

json run_power_table(const ExperimentConfig& cfg) {
  if (cfg.dims.empty()) throw std::invalid_argument("power-table: empty dimension list");
  const int bh_reps = cfg.bh_replicates > 0 ? cfg.bh_replicates : cfg.replicates;

  json per_d = json::array();
  std::vector<double> stein_power(cfg.dims.size());
  std::vector<double> bh_power(cfg.dims.size());

  for (std::size_t di = 0; di < cfg.dims.size(); ++di) {
    const Index d = cfg.dims[di];
    if (d < 1) throw std::invalid_argument("power-table: dimensions must be >= 1");
    const TargetDensity<double> target = standard_normal_target<double>(d);
    const std::uint64_t d_seed = derive_seed(cfg.seed, 1000 + di);

    std::vector<double> stein_p(static_cast<std::size_t>(cfg.trials));
    std::vector<double> bh_p(static_cast<std::size_t>(cfg.trials));
    std::vector<int> stein_rej(static_cast<std::size_t>(cfg.trials));
    std::vector<int> bh_rej(static_cast<std::size_t>(cfg.trials));

    parallel_for(
        cfg.trials,
        [&](std::ptrdiff_t t) {
          const std::uint64_t trial_seed = derive_seed(d_seed, static_cast<std::uint64_t>(t));
          auto rng = make_rng(derive_seed(trial_seed, 1));
          std::normal_distribution<double> normal(0.0, 1.0);
          std::uniform_real_distribution<double> unif(0.0, 1.0);
          Matd samples(cfg.n, d);
          for (Index i = 0; i < cfg.n; ++i)
            for (Index j = 0; j < d; ++j) samples(i, j) = normal(rng);
          for (Index i = 0; i < cfg.n; ++i) samples(i, 0) += unif(rng);

          const double sigma = resolve_bandwidth(cfg.bandwidth, samples);
          const RbfKernel<double> kernel(sigma);
          WildBootstrapConfig boot;
          boot.a_n = cfg.a_n;
          boot.replicates = cfg.replicates;
          boot.seed = derive_seed(trial_seed, 2);
          const TestResult<double> stein =
              gof_test<double>(samples, target, kernel, boot, cfg.alpha, 1);
          const TestResult<double> bh =
              bh_test<double>(samples, sigma, bh_reps, cfg.alpha, derive_seed(trial_seed, 3));
          stein_p[static_cast<std::size_t>(t)] = stein.p_value;
          bh_p[static_cast<std::size_t>(t)] = bh.p_value;
          stein_rej[static_cast<std::size_t>(t)] = stein.reject ? 1 : 0;
          bh_rej[static_cast<std::size_t>(t)] = bh.reject ? 1 : 0;
        },
        cfg.threads ? cfg.threads : std::thread::hardware_concurrency());

    double s_sum = 0, b_sum = 0;
    for (int r : stein_rej) s_sum += r;
    for (int r : bh_rej) b_sum += r;
    stein_power[di] = s_sum / cfg.trials;
    bh_power[di] = b_sum / cfg.trials;

    json cell;
    cell["d"] = d;
    cell["stein_power"] = stein_power[di];
    cell["bh_power"] = bh_power[di];
    cell["stein_p_values"] = stein_p;
    cell["bh_p_values"] = bh_p;
    per_d.push_back(cell);
  }

  json report;
  report["dims"] = cfg.dims;
  report["stein_power"] = stein_power;
  report["bh_power"] = bh_power;
  report["cells"] = per_d;
  return report;
}

// ---------------------------------------------------------------------------
// mcmc-student: random-walk MH chains targeting Student's t, tested against
// the standard normal after burn-in and thinning.

json run_mcmc_student(const ExperimentConfig& cfg) {
  if (cfg.dofs.empty()) throw std::invalid_argument("mcmc-student: empty dof list");
  const double proposal_sd = cfg.proposal_sd > 0 ? cfg.proposal_sd : std::sqrt(0.5);
  const TargetDensity<double> normal_target = standard_normal_target<double>(1);

  json per_dof = json::array();
  for (std::size_t fi = 0; fi < cfg.dofs.size(); ++fi) {
    const double dof = cfg.dofs[fi];
    const TargetDensity<double> chain_target = student_t_target<double>(dof, 1);
    const std::uint64_t dof_seed = derive_seed(cfg.seed, 2000 + fi);

    std::vector<double> p_values(static_cast<std::size_t>(cfg.trials));
    std::vector<int> rejections(static_cast<std::size_t>(cfg.trials));
    std::vector<double> acc_rates(static_cast<std::size_t>(cfg.trials));
    std::vector<double> thin_factors(static_cast<std::size_t>(cfg.trials));
    std::string dump_chain_path = (fi == 0) ? cfg.dump_chain : "";

    parallel_for(
        cfg.trials,
        [&](std::ptrdiff_t t) {
          const std::uint64_t trial_seed = derive_seed(dof_seed, static_cast<std::uint64_t>(t));
          // Provisional thin factor for sizing the raw chain; "auto" sizes
          // for the cap and re-decides from the realized chain.
          Index size_factor = 1;
          if (cfg.thin == "auto") {
            size_factor = 10;
          } else if (cfg.thin != "none" && !cfg.thin.empty()) {
            try {
              size_factor = static_cast<Index>(std::stol(cfg.thin));
            } catch (const std::exception&) {
              throw std::invalid_argument("--thin must be 'auto', 'none' or a positive integer");
            }
            if (size_factor < 1)
              throw std::invalid_argument("--thin must be 'auto', 'none' or a positive integer");
          }
          Index steps = cfg.chain_steps > 0
                            ? cfg.chain_steps
                            : static_cast<Index>(std::ceil(
                                  static_cast<double>(cfg.n) * static_cast<double>(size_factor) /
                                  (1.0 - cfg.burn_in))) +
                                  size_factor;
          Vecd x0 = Vecd::Zero(1);
          Chain<double> chain =
              mh_random_walk<double>(chain_target, x0, steps, proposal_sd,
                                     derive_seed(trial_seed, 1));
          if (t == 0 && !dump_chain_path.empty()) write_chain_csv(chain, dump_chain_path);
          const Index burn = static_cast<Index>(std::floor(cfg.burn_in * chain.states.rows()));
          Matd kept = chain.states.bottomRows(chain.states.rows() - burn);

          const ThinDecision thin = decide_thinning(cfg, kept);
          Matd thinned = thin.factor > 1 ? thin_rows<double>(kept, thin.factor) : kept;
          if (thinned.rows() < cfg.n)
            throw std::runtime_error("mcmc-student: chain too short after thinning; increase "
                                     "--chain-steps");
          const Matd samples = thinned.topRows(cfg.n);

          const double sigma = resolve_bandwidth(cfg.bandwidth, samples);
          const RbfKernel<double> kernel(sigma);
          WildBootstrapConfig boot;
          boot.a_n = thin.a_n;
          boot.replicates = cfg.replicates;
          boot.seed = derive_seed(trial_seed, 2);
          const TestResult<double> result =
              gof_test<double>(samples, normal_target, kernel, boot, cfg.alpha, 1);
          p_values[static_cast<std::size_t>(t)] = result.p_value;
          rejections[static_cast<std::size_t>(t)] = result.reject ? 1 : 0;
          acc_rates[static_cast<std::size_t>(t)] = chain.acceptance_rate;
          thin_factors[static_cast<std::size_t>(t)] = static_cast<double>(thin.factor);
        },
        cfg.threads ? cfg.threads : std::thread::hardware_concurrency());

    double rej_sum = 0;
    for (int r : rejections) rej_sum += r;
    json entry;
    entry["dof"] = std::isinf(dof) ? json("inf") : json(dof);
    entry["p_values"] = p_values;
    entry["rejections"] = rejections;
    entry["rejection_rate"] = rej_sum / cfg.trials;
    entry["mean_acceptance_rate"] =
        std::accumulate(acc_rates.begin(), acc_rates.end(), 0.0) / cfg.trials;
    entry["thin_factors"] = thin_factors;
    per_dof.push_back(entry);
  }

  json report;
  report["per_dof"] = per_dof;
  report["proposal_sd"] = proposal_sd;
  return report;
}

// ---------------------------------------------------------------------------
// austerity-sweep: subsampled MH bias vs computational cost across epsilon.

json run_austerity_sweep(const ExperimentConfig& cfg) {
  if (cfg.epsilons.empty()) throw std::invalid_argument("austerity-sweep: empty epsilon list");
  if (cfg.mixture_data_n < 2) throw std::invalid_argument("austerity-sweep: need >= 2 data");
  const double proposal_sd = cfg.proposal_sd > 0 ? cfg.proposal_sd : 0.5;
  const Index steps = cfg.chain_steps > 0 ? cfg.chain_steps : 15000;

  // One fixed dataset from the generative model at theta = (0, 1).
  Vecd data(cfg.mixture_data_n);
  {
    auto rng = make_rng(derive_seed(cfg.seed, 0xDA7A));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < data.size(); ++i) {
      const double mu = coin(rng) ? 1.0 : 0.0;  // theta1 = 0, theta1 + theta2 = 1
      data[i] = mu + 2.0 * normal(rng);
    }
  }
  const MixturePosterior<double> model(data);
  const TargetDensity<double> posterior = model.target();

  json per_eps = json::array();
  for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
    const double eps = cfg.epsilons[ei];
    const std::uint64_t eps_seed = derive_seed(cfg.seed, 3000 + ei);

    std::vector<double> p_values(static_cast<std::size_t>(cfg.trials));
    std::vector<int> rejections(static_cast<std::size_t>(cfg.trials));
    std::vector<double> evals(static_cast<std::size_t>(cfg.trials));
    std::vector<double> thin_factors(static_cast<std::size_t>(cfg.trials));

    parallel_for(
        cfg.trials,
        [&](std::ptrdiff_t t) {
          const std::uint64_t trial_seed = derive_seed(eps_seed, static_cast<std::uint64_t>(t));
          AusterityConfig aust;
          aust.epsilon = eps;
          Vecd x0(2);
          x0 << 0.0, 1.0;
          const Chain<double> chain = austerity_mh<double>(model, x0, steps, proposal_sd, aust,
                                                           derive_seed(trial_seed, 1));
          const Index burn = static_cast<Index>(std::floor(cfg.burn_in * chain.states.rows()));
          Chain<double> kept;
          kept.states = chain.states.bottomRows(chain.states.rows() - burn);
          const ThinningAdvice advice = recommend_thinning(kept);
          Matd thinned = thin_rows<double>(kept.states, advice.thin_factor);
          if (thinned.rows() < cfg.n)
            throw std::runtime_error("austerity-sweep: chain too short after thinning; increase "
                                     "--chain-steps");
          const Matd samples = thinned.topRows(cfg.n);

          const double sigma = resolve_bandwidth(cfg.bandwidth, samples);
          const RbfKernel<double> kernel(sigma);
          WildBootstrapConfig boot;
          boot.a_n = cfg.a_n_set ? cfg.a_n : advice.a_n;
          boot.replicates = cfg.replicates;
          boot.seed = derive_seed(trial_seed, 2);
          const TestResult<double> result =
              gof_test<double>(samples, posterior, kernel, boot, cfg.alpha, 1);
          p_values[static_cast<std::size_t>(t)] = result.p_value;
          rejections[static_cast<std::size_t>(t)] = result.reject ? 1 : 0;
          evals[static_cast<std::size_t>(t)] = static_cast<double>(chain.likelihood_evals);
          thin_factors[static_cast<std::size_t>(t)] = static_cast<double>(advice.thin_factor);
        },
        cfg.threads ? cfg.threads : std::thread::hardware_concurrency());

    double rej_sum = 0, eval_sum = 0;
    for (int r : rejections) rej_sum += r;
    for (double e : evals) eval_sum += e;
    json entry;
    entry["epsilon"] = eps;
    entry["p_values"] = p_values;
    entry["rejections"] = rejections;
    entry["rejection_rate"] = rej_sum / cfg.trials;
    entry["mean_likelihood_evals"] = eval_sum / cfg.trials;
    entry["mean_likelihood_evals_per_step"] = eval_sum / cfg.trials / static_cast<double>(steps);
    entry["thin_factors"] = thin_factors;
    per_eps.push_back(entry);
  }

  json report;
  report["epsilons"] = cfg.epsilons;
  report["per_epsilon"] = per_eps;
  report["data_size"] = cfg.mixture_data_n;
  report["chain_steps"] = steps;
  report["proposal_sd"] = proposal_sd;
  report["tested_samples"] = cfg.n;
  return report;
}

}  // namespace

json run_experiment(const ExperimentConfig& cfg) {
  validate_common(cfg);
  const auto start = std::chrono::steady_clock::now();
  json results;
  if (cfg.experiment == "test") {
    results = run_single_test(cfg, false);
  } else if (cfg.experiment == "bh-compare") {
    results = run_single_test(cfg, true);
  } else if (cfg.experiment == "calibrate") {
    results = run_calibrate(cfg);
  } else if (cfg.experiment == "power-table") {
    results = run_power_table(cfg);
  } else if (cfg.experiment == "mcmc-student") {
    results = run_mcmc_student(cfg);
  } else if (cfg.experiment == "austerity-sweep") {
    results = run_austerity_sweep(cfg);
  } else {
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
  }
  const auto end = std::chrono::steady_clock::now();

  json report;
  report["experiment"] = cfg.experiment;
  report["config"] = config_echo(cfg);
  report["results"] = results;
  report["timing_seconds"] = std::chrono::duration<double>(end - start).count();
  return report;
}

int exit_code_for(const json& report, bool fail_on_reject) {
  if (!fail_on_reject) return 0;
  const auto& results = report.at("results");
  if (results.contains("reject") && results.at("reject").get<bool>()) return 1;
  return 0;
}

}  // namespace kgof::experiments
