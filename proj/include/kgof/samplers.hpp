#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "kgof/mathutil.hpp"
#include "kgof/random.hpp"
#include "kgof/targets.hpp"
#include "kgof/types.hpp"

namespace kgof {

/// A realized Markov chain: one state per row, in time order.
template <typename S>
struct Chain {
  Mat<S> states;                      // T x d
  S acceptance_rate = S(0);           // accepted / T
  std::uint64_t likelihood_evals = 0; // density or per-datum evaluations performed
};

/// Subsampled Metropolis-Hastings settings. epsilon is the tolerated
/// probability of a wrong accept/reject decision per step; the minibatch
/// starts at initial_batch points and grows geometrically by batch_growth
/// until the sequential test is significant or the data are exhausted.
struct AusterityConfig {
  double epsilon = 0.05;
  Index initial_batch = 30;
  double batch_growth = 2.0;
};

/// Random walk Metropolis-Hastings with isotropic Gaussian proposals of
/// standard deviation proposal_sd per coordinate. Exact MH: the chain leaves
/// the target invariant. Deterministic given the seed.
template <typename S>
Chain<S> mh_random_walk(const TargetDensity<S>& target, const Vec<S>& x0, Index steps,
                        S proposal_sd, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("mh_random_walk: steps must be >= 1");
  if (!(proposal_sd > S(0))) throw std::invalid_argument("mh_random_walk: proposal_sd must be > 0");
  if (x0.size() != target.dim)
    throw std::invalid_argument("mh_random_walk: x0 dimension does not match target");

  auto rng = make_rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Vec<S> current = x0;
  S current_logp = log_density_unnorm(target, current);
  if (!std::isfinite(static_cast<double>(current_logp)))
    throw std::invalid_argument("mh_random_walk: target density is zero at x0");

  const Index d = target.dim;
  Chain<S> chain;
  chain.states.resize(steps, d);
  Index accepted = 0;
  Vec<S> proposal(d);
  for (Index t = 0; t < steps; ++t) {
    for (Index k = 0; k < d; ++k)
      proposal[k] = current[k] + proposal_sd * static_cast<S>(normal(rng));
    const S proposal_logp = log_density_unnorm(target, proposal);
    ++chain.likelihood_evals;
    const double u = unif(rng);
    if (std::log(u) < static_cast<double>(proposal_logp - current_logp)) {
      current = proposal;
      current_logp = proposal_logp;
      ++accepted;
    }
    chain.states.row(t) = current.transpose();
  }
  chain.acceptance_rate = static_cast<S>(accepted) / static_cast<S>(steps);
  return chain;
}

/// Austerity Metropolis-Hastings on a mixture posterior: each accept/reject
/// decision looks at a growing uniformly subsampled minibatch of per-datum
/// log likelihood ratios and stops as soon as a two-sided t-test against the
/// threshold implied by the uniform draw is significant at level epsilon, or
/// the full dataset has been consumed (in which case the decision is exact).
///
/// The proposal/uniform stream and the subsampling stream are derived
/// separately from the seed, so a run whose batches always reach the full
/// dataset follows exactly the same trajectory as mh_random_walk(seed).
/// likelihood_evals counts every per-datum log-likelihood evaluation (each
/// datum in a batch is evaluated at the current and at the proposed point).
template <typename S>
Chain<S> austerity_mh(const MixturePosterior<S>& model, const Vec<S>& x0, Index steps,
                      S proposal_sd, const AusterityConfig& config, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("austerity_mh: steps must be >= 1");
  if (!(proposal_sd > S(0))) throw std::invalid_argument("austerity_mh: proposal_sd must be > 0");
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0))
    throw std::invalid_argument("austerity_mh: epsilon must lie in (0, 1)");
  if (config.initial_batch < 2)
    throw std::invalid_argument("austerity_mh: initial_batch must be >= 2");
  if (!(config.batch_growth > 1.0))
    throw std::invalid_argument("austerity_mh: batch_growth must be > 1");
  if (x0.size() != 2) throw std::invalid_argument("austerity_mh: x0 must have dimension 2");

  const Index data_n = model.data_size();
  auto rng = make_rng(derive_seed(seed, 0));        // proposals and uniforms
  auto batch_rng = make_rng(derive_seed(seed, 1));  // minibatch subsampling
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Vec<S> current = x0;
  Chain<S> chain;
  chain.states.resize(steps, 2);
  Index accepted = 0;

  std::vector<Index> order(static_cast<std::size_t>(data_n));
  std::iota(order.begin(), order.end(), Index(0));
  const bool full_from_start = config.initial_batch >= data_n;

  Vec<S> proposal(2);
  for (Index t = 0; t < steps; ++t) {
    proposal[0] = current[0] + proposal_sd * static_cast<S>(normal(rng));
    proposal[1] = current[1] + proposal_sd * static_cast<S>(normal(rng));
    const double u = unif(rng);
    const double log_u = std::log(u);
    const double prior_current = static_cast<double>(model.log_prior(current));
    const double prior_proposal = static_cast<double>(model.log_prior(proposal));
    const double mu0 = (log_u + prior_current - prior_proposal) / static_cast<double>(data_n);

    if (!full_from_start) std::shuffle(order.begin(), order.end(), batch_rng);

    bool accept = false;
    Index m = 0;
    double sum_prop = 0.0, sum_cur = 0.0, sum_diff = 0.0, sum_diff2 = 0.0;
    for (;;) {
      Index m_next = (m == 0) ? std::min(config.initial_batch, data_n)
                              : std::min<Index>(data_n,
                                                static_cast<Index>(std::ceil(
                                                    static_cast<double>(m) * config.batch_growth)));
      for (Index idx = m; idx < m_next; ++idx) {
        const Index i = order[static_cast<std::size_t>(idx)];
        const double lp = static_cast<double>(model.log_likelihood_point(proposal, i));
        const double lc = static_cast<double>(model.log_likelihood_point(current, i));
        sum_prop += lp;
        sum_cur += lc;
        const double diff = lp - lc;
        sum_diff += diff;
        sum_diff2 += diff * diff;
        chain.likelihood_evals += 2;
      }
      m = m_next;
      const double mean = sum_diff / static_cast<double>(m);
      if (m == data_n) {
        // Exact decision, expressed the same way plain MH computes it.
        accept = log_u < (prior_proposal + sum_prop) - (prior_current + sum_cur);
        break;
      }
      double var = (sum_diff2 - sum_diff * sum_diff / static_cast<double>(m)) /
                   static_cast<double>(m - 1);
      var = std::max(var, 0.0);
      const double fpc = 1.0 - static_cast<double>(m - 1) / static_cast<double>(data_n - 1);
      const double se = std::sqrt(var / static_cast<double>(m) * fpc);
      if (se == 0.0) {
        accept = mean > mu0;
        break;
      }
      const double tstat = (mean - mu0) / se;
      const double delta = 1.0 - student_t_cdf(std::abs(tstat), static_cast<double>(m - 1));
      if (delta < config.epsilon) {
        accept = mean > mu0;
        break;
      }
    }

    if (accept) {
      current = proposal;
      ++accepted;
    }
    chain.states.row(t) = current.transpose();
  }
  chain.acceptance_rate = static_cast<S>(accepted) / static_cast<S>(steps);
  return chain;
}

/// Biased sample autocorrelation at the given lag:
///   r_l = sum_{t<=T-l} (x_t - xbar)(x_{t+l} - xbar) / sum_t (x_t - xbar)^2.
/// Lies in [-1, 1] for covariance-stationary input. Throws on constant series.
template <typename S>
S lag_autocorrelation(const VecCRef<S>& series, Index lag) {
  const Index n = series.size();
  if (lag < 1) throw std::invalid_argument("lag_autocorrelation: lag must be >= 1");
  if (n <= lag) throw std::invalid_argument("lag_autocorrelation: series shorter than lag");
  if (series.maxCoeff() == series.minCoeff())
    throw std::runtime_error("lag_autocorrelation: zero variance series");
  const S mean = series.mean();
  const Vec<S> centered = series.array() - mean;
  const S denom = centered.squaredNorm();
  if (denom == S(0)) throw std::runtime_error("lag_autocorrelation: zero variance series");
  const S num = centered.head(n - lag).dot(centered.tail(n - lag));
  return num / denom;
}

/// Thinning recommendation for testing a correlated chain: the smallest
/// thinning factor k (capped at 10) for which the lag-1 autocorrelation of
/// every coordinate of the thinned chain drops below 0.5, together with the
/// matching flip probability a_n = 0.1 / k and the advised minimum sample
/// size max(500 k, 100 d). autocorr_ok is false when the cap was hit while
/// the autocorrelation was still at least 0.5.
struct ThinningAdvice {
  Index thin_factor = 1;
  double a_n = 0.1;
  Index min_n = 500;
  bool autocorr_ok = true;
};

/// Keeps every k-th row, starting with the first.
template <typename S>
Mat<S> thin_rows(const MatCRef<S>& states, Index k) {
  if (k < 1) throw std::invalid_argument("thin_rows: k must be >= 1");
  const Index kept = (states.rows() + k - 1) / k;
  Mat<S> out(kept, states.cols());
  for (Index i = 0; i < kept; ++i) out.row(i) = states.row(i * k);
  return out;
}

template <typename S>
ThinningAdvice recommend_thinning(const Chain<S>& chain) {
  constexpr Index kMaxThin = 10;
  const Index n = chain.states.rows();
  const Index d = chain.states.cols();
  if (n < 100) throw std::invalid_argument("recommend_thinning: need a chain of length >= 100");

  ThinningAdvice advice;
  advice.autocorr_ok = false;
  for (Index k = 1; k <= kMaxThin; ++k) {
    const Mat<S> thinned = thin_rows<S>(chain.states, k);
    if (thinned.rows() < 3) break;
    S worst = S(0);
    for (Index c = 0; c < d; ++c)
      worst = std::max(worst, lag_autocorrelation<S>(thinned.col(c), 1));
    advice.thin_factor = k;
    if (worst < S(0.5)) {
      advice.autocorr_ok = true;
      break;
    }
  }
  advice.a_n = 0.1 / static_cast<double>(advice.thin_factor);
  advice.min_n = std::max<Index>(500 * advice.thin_factor, 100 * d);
  return advice;
}

}  // namespace kgof
