#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "kgof/mathutil.hpp"
#include "kgof/random.hpp"
#include "kgof/stein.hpp"
#include "kgof/types.hpp"

namespace kgof {

/// Wild bootstrap configuration: per-step sign flip probability a_n,
/// replicate count D, and the master RNG seed. Use a_n = 0.5 for i.i.d.
/// samples and smaller values for positively correlated chains.
struct WildBootstrapConfig {
  double a_n = 0.5;
  int replicates = 1000;
  std::uint64_t seed = 0;
};

/// Outcome of a bootstrapped goodness-of-fit test.
/// Invariants: reject <=> statistic > threshold (strict), and
/// p_value = (1 + #{d : B_d >= statistic}) / (D + 1), so p_value is in (0, 1].
template <typename S>
struct TestResult {
  S statistic = S(0);
  std::vector<S> bootstrap_samples;
  S p_value = S(1);
  S threshold = S(0);
  S alpha = S(0);
  bool reject = false;
};

/// Wild bootstrap sign process: a Markov chain on {-1, +1} with W_1 = +1 and
/// W_t = -W_{t-1} with probability a_n, else W_t = W_{t-1}. Its autocovariance
/// at lag l is (1 - 2 a_n)^l, which is what lets it mimic the sample's
/// temporal correlation.
template <typename S, typename Rng>
Vec<S> wild_signs(Index n, double a_n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("wild_signs: n must be >= 1");
  if (!(a_n > 0.0 && a_n <= 1.0))
    throw std::invalid_argument("wild_signs: a_n must lie in (0, 1]");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec<S> w(n);
  S current = S(1);
  w[0] = current;
  for (Index t = 1; t < n; ++t) {
    if (unif(rng) < a_n) current = -current;
    w[t] = current;
  }
  return w;
}

/// Bootstrapped V-statistic B_n = (1/n^2) s' H s for a sign vector s.
/// With all-ones signs this reproduces v_statistic(H) bitwise.
template <typename S>
S bootstrap_statistic(const MatCRef<S>& h, const VecCRef<S>& signs) {
  if (h.rows() != h.cols() || h.rows() < 1)
    throw std::invalid_argument("bootstrap_statistic: matrix must be square and nonempty");
  if (signs.size() != h.rows())
    throw std::invalid_argument("bootstrap_statistic: sign vector length does not match matrix");
  return signs.dot(h * signs) / (static_cast<S>(h.rows()) * static_cast<S>(h.rows()));
}

/// Add-one bootstrap p-value: (1 + #{B_d >= observed}) / (D + 1).
template <typename S>
S bootstrap_p_value(const std::vector<S>& bootstrap_samples, S observed) {
  if (bootstrap_samples.empty())
    throw std::invalid_argument("bootstrap_p_value: no bootstrap samples");
  const auto count = std::count_if(bootstrap_samples.begin(), bootstrap_samples.end(),
                                   [&](S b) { return b >= observed; });
  return static_cast<S>(1 + count) / static_cast<S>(bootstrap_samples.size() + 1);
}

/// Wild bootstrap test given a precomputed Stein matrix:
///  1. take the V-statistic V_n of H,
///  2. draw D wild bootstrap replicates B_n = (1/n^2) W' H W,
///  3. reject when V_n exceeds the empirical (1 - alpha) quantile of the B_n.
///
/// Replicate r draws its signs from an RNG stream derived from (seed, r), so
/// the result is reproducible for a fixed seed no matter how replicates are
/// scheduled or batched. Replicates are evaluated in column blocks through a
/// single matrix product per block.
template <typename S>
TestResult<S> gof_test_from_matrix(const MatCRef<S>& h, const WildBootstrapConfig& config,
                                   S alpha) {
  const Index n = h.rows();
  if (n < 2 || h.cols() != n)
    throw std::invalid_argument("gof_test_from_matrix: matrix must be square with n >= 2");
  if (!(alpha > S(0) && alpha <= S(0.5)))
    throw std::invalid_argument("gof_test: alpha must lie in (0, 0.5]");
  if (config.replicates < 1) throw std::invalid_argument("gof_test: replicates must be >= 1");
  if (!(config.a_n > 0.0 && config.a_n <= 1.0))
    throw std::invalid_argument("gof_test: a_n must lie in (0, 1]");
  const std::uint64_t work = static_cast<std::uint64_t>(config.replicates) *
                             static_cast<std::uint64_t>(n);
  if (work > (std::uint64_t(1) << 40))
    throw std::invalid_argument("gof_test: replicates * n too large");

  TestResult<S> result;
  result.alpha = alpha;
  result.statistic = v_statistic<S>(h);

  const int d_total = config.replicates;
  result.bootstrap_samples.resize(static_cast<std::size_t>(d_total));
  // Block size keeps the sign matrix around 64 MB of doubles at most.
  const int block = std::max<int>(1, static_cast<int>(std::min<std::uint64_t>(
                                         d_total, (std::uint64_t(1) << 23) / n + 1)));
  Mat<S> w(n, block);
  Mat<S> hw;
  for (int start = 0; start < d_total; start += block) {
    const int cols = std::min(block, d_total - start);
    for (int c = 0; c < cols; ++c) {
      auto rng = make_rng(derive_seed(config.seed, static_cast<std::uint64_t>(start + c)));
      w.col(c) = wild_signs<S>(n, config.a_n, rng);
    }
    hw.resize(n, cols);
    hw.noalias() = h * w.leftCols(cols);
    for (int c = 0; c < cols; ++c)
      result.bootstrap_samples[static_cast<std::size_t>(start + c)] =
          w.col(c).dot(hw.col(c)) / (static_cast<S>(n) * static_cast<S>(n));
  }

  result.p_value = bootstrap_p_value(result.bootstrap_samples, result.statistic);
  result.threshold = quantile_type7(result.bootstrap_samples, S(1) - alpha);
  result.reject = result.statistic > result.threshold;
  return result;
}

/// Goodness-of-fit test of `samples` against `target`: computes the Stein
/// matrix once, then runs the wild bootstrap on it. Deterministic given
/// config.seed; the thread count only affects how the matrix is filled.
template <typename S>
TestResult<S> gof_test(const MatCRef<S>& samples, const TargetDensity<S>& target,
                       const DifferentiableKernel<S>& kernel, const WildBootstrapConfig& config,
                       S alpha, unsigned n_threads = 0) {
  if (samples.rows() < 2) throw std::invalid_argument("gof_test: need at least 2 samples");
  const Mat<S> h = stein_matrix(target, kernel, samples, n_threads);
  return gof_test_from_matrix<S>(h, config, alpha);
}

}  // namespace kgof
