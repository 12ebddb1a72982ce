#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "kgof/bootstrap.hpp"
#include "kgof/mathutil.hpp"
#include "kgof/random.hpp"
#include "kgof/types.hpp"

namespace kgof {

/// Closed-form E_X k(X, y) for X ~ N(0, I_d) and the exponentiated quadratic
/// kernel with bandwidth sigma:
///   (sigma^2 / (sigma^2 + 1))^{d/2} exp(-|y|^2 / (2 (sigma^2 + 1))).
template <typename S>
S bh_expected_kernel_point(S sigma, const VecCRef<S>& y) {
  if (!(sigma > S(0))) throw std::invalid_argument("bh_expected_kernel_point: sigma must be > 0");
  const S s2 = sigma * sigma;
  const S d = static_cast<S>(y.size());
  return std::pow(s2 / (s2 + S(1)), d / S(2)) *
         std::exp(-y.squaredNorm() / (S(2) * (s2 + S(1))));
}

/// Closed-form E k(X, X') for independent X, X' ~ N(0, I_d):
///   (sigma^2 / (sigma^2 + 2))^{d/2}.
template <typename S>
S bh_expected_kernel_pair(S sigma, Index dim) {
  if (!(sigma > S(0))) throw std::invalid_argument("bh_expected_kernel_pair: sigma must be > 0");
  if (dim < 1) throw std::invalid_argument("bh_expected_kernel_pair: dim must be >= 1");
  const S s2 = sigma * sigma;
  return std::pow(s2 / (s2 + S(2)), static_cast<S>(dim) / S(2));
}

/// Smoothed-characteristic-function test statistic for normality, equal to a
/// biased MMD^2 estimate between the sample and N(0, I_d):
///   (1/n^2) sum_ij k(Z_i, Z_j) - (2/n) sum_i E k(X, Z_i) + E k(X, X').
/// Nonnegative up to roundoff.
template <typename S>
S bh_statistic(const MatCRef<S>& samples, S sigma) {
  const Index n = samples.rows();
  const Index d = samples.cols();
  if (n < 1) throw std::invalid_argument("bh_statistic: need at least one sample");
  if (!(sigma > S(0))) throw std::invalid_argument("bh_statistic: sigma must be > 0");

  const Vec<S> row_norms = samples.rowwise().squaredNorm();
  Mat<S> sq = (S(-2) * samples * samples.transpose()).eval();
  sq.colwise() += row_norms;
  sq.rowwise() += row_norms.transpose();
  const S gram_mean = (-sq / (S(2) * sigma * sigma)).array().exp().mean();

  S point_term = S(0);
  for (Index i = 0; i < n; ++i)
    point_term += bh_expected_kernel_point<S>(sigma, samples.row(i).transpose());
  point_term *= S(2) / static_cast<S>(n);

  return gram_mean - point_term + bh_expected_kernel_pair<S>(sigma, d);
}

/// Normality test calibrated by parametric resampling: the null distribution
/// of the statistic is estimated from `replicates` fresh draws of n points
/// from N(0, I_d), evaluated with the same bandwidth. Replicate r uses an RNG
/// stream derived from (seed, r); results do not depend on evaluation order.
template <typename S>
TestResult<S> bh_test(const MatCRef<S>& samples, S sigma, int replicates, S alpha,
                      std::uint64_t seed) {
  const Index n = samples.rows();
  const Index d = samples.cols();
  if (n < 2) throw std::invalid_argument("bh_test: need at least 2 samples");
  if (replicates < 1) throw std::invalid_argument("bh_test: replicates must be >= 1");
  if (!(alpha > S(0) && alpha <= S(0.5)))
    throw std::invalid_argument("bh_test: alpha must lie in (0, 0.5]");

  TestResult<S> result;
  result.alpha = alpha;
  result.statistic = bh_statistic(samples, sigma);
  result.bootstrap_samples.resize(static_cast<std::size_t>(replicates));
  Mat<S> draw(n, d);
  for (int r = 0; r < replicates; ++r) {
    auto rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) draw(i, j) = static_cast<S>(normal(rng));
    result.bootstrap_samples[static_cast<std::size_t>(r)] = bh_statistic<S>(draw, sigma);
  }
  result.p_value = bootstrap_p_value(result.bootstrap_samples, result.statistic);
  result.threshold = quantile_type7(result.bootstrap_samples, S(1) - alpha);
  result.reject = result.statistic > result.threshold;
  return result;
}

}  // namespace kgof
