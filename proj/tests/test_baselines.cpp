#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kgof/baselines.hpp"
#include "kgof/kernels.hpp"
#include "oracles.hpp"

using kgof::bh_expected_kernel_pair;
using kgof::bh_expected_kernel_point;
using kgof::bh_statistic;
using kgof::bh_test;
using kgof::derive_seed;
using kgof::Index;
using kgof::Matd;
using kgof::Vecd;

namespace {

Matd normal_draws(Index n, Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matd out(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) out(i, j) = normal(rng);
  return out;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

/// E_X k(X, y) by quadrature, one dimension at a time (the integrand
/// factorizes across coordinates).
double point_expectation_quadrature(double sigma, const Vecd& y) {
  double product = 1.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    product *= oracles::simpson(
        [&](double x) {
          return normal_pdf(x) * std::exp(-(x - yi) * (x - yi) / (2.0 * sigma * sigma));
        },
        -10.0 - std::abs(yi), 10.0 + std::abs(yi), 4000);
  }
  return product;
}

/// E k(X, X') by a two-dimensional quadrature per coordinate.
double pair_expectation_quadrature(double sigma, Index dim) {
  const double one_dim = oracles::simpson(
      [&](double x) {
        return normal_pdf(x) * oracles::simpson(
                                   [&](double xp) {
                                     return normal_pdf(xp) *
                                            std::exp(-(x - xp) * (x - xp) /
                                                     (2.0 * sigma * sigma));
                                   },
                                   -10.0, 10.0, 800);
      },
      -10.0, 10.0, 800);
  return std::pow(one_dim, static_cast<double>(dim));
}

}  // namespace

TEST_CASE("closed-form kernel expectations match numerical integration") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (double sigma : {0.7, 1.0, 2.1}) {
    for (Index d : {1, 2, 3}) {
      Vecd y(d);
      for (Index i = 0; i < d; ++i) y[i] = unif(rng);
      const double closed = bh_expected_kernel_point<double>(sigma, y);
      const double quad = point_expectation_quadrature(sigma, y);
      CHECK(oracles::rel_error(closed, quad) < 1e-4);

      const double closed_pair = bh_expected_kernel_pair<double>(sigma, d);
      const double quad_pair = pair_expectation_quadrature(sigma, d);
      CHECK(oracles::rel_error(closed_pair, quad_pair) < 1e-4);
    }
  }
}

TEST_CASE("statistic for a single sample at the origin") {
  // 1 - 2 (1/2)^{1/2} + (1/3)^{1/2}; the closed forms give 0.1631367...
  Matd one(1, 1);
  one << 0.0;
  const double expected = 1.0 - std::sqrt(2.0) + 1.0 / std::sqrt(3.0);
  CHECK(bh_statistic<double>(one, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.163137).epsilon(1e-5));
  // Against the quadrature route end to end.
  const double quad = 1.0 - 2.0 * point_expectation_quadrature(1.0, Vecd::Zero(1)) +
                      pair_expectation_quadrature(1.0, 1);
  CHECK(bh_statistic<double>(one, 1.0) == doctest::Approx(quad).epsilon(1e-4));
}

TEST_CASE("statistic is permutation invariant") {
  const Matd samples = normal_draws(40, 2, 63);
  Matd permuted = samples;
  std::vector<Index> perm(40);
  for (Index i = 0; i < 40; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(7));
  for (Index i = 0; i < 40; ++i) permuted.row(i) = samples.row(perm[static_cast<std::size_t>(i)]);

  const double a = bh_statistic<double>(samples, 1.3);
  const double b = bh_statistic<double>(permuted, 1.3);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));

  // The underlying kernel-value multisets agree bitwise after sorting.
  auto gram_values = [](const Matd& s) {
    std::vector<double> vals;
    for (Index i = 0; i < s.rows(); ++i)
      for (Index j = 0; j < s.rows(); ++j)
        vals.push_back(std::exp(-(s.row(i) - s.row(j)).squaredNorm() / (2.0 * 1.3 * 1.3)));
    std::sort(vals.begin(), vals.end());
    return vals;
  };
  CHECK(gram_values(samples) == gram_values(permuted));
}

TEST_CASE("statistic shrinks toward zero under the null") {
  const Matd samples = normal_draws(2000, 2, 67);
  const double stat = bh_statistic<double>(samples, 1.0);
  CHECK(stat < 0.005);
  CHECK(stat >= -1e-12);
}

TEST_CASE("statistic validates inputs") {
  const Matd samples = normal_draws(10, 1, 69);
  CHECK_THROWS_AS(bh_statistic<double>(samples, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bh_statistic<double>(samples, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(bh_test<double>(samples, 1.0, 0, 0.05, 1), std::invalid_argument);
  CHECK_THROWS_AS(bh_test<double>(samples, 1.0, 100, 0.9, 1), std::invalid_argument);
}

TEST_CASE("test calibrates near the level under the null") {
  int rejections = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    const Matd samples = normal_draws(150, 2, 800 + t);
    const double sigma = kgof::median_heuristic<double>(samples);
    rejections += bh_test<double>(samples, sigma, 150, 0.05, derive_seed(3, t)).reject ? 1 : 0;
  }
  CHECK(rejections <= 7);
}

TEST_CASE("test detects the shifted first coordinate in low dimension") {
  int rejections = 0;
  for (int t = 0; t < 20; ++t) {
    Matd samples = normal_draws(300, 2, 1200 + t);
    std::mt19937_64 rng(derive_seed(91, t));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < samples.rows(); ++i) samples(i, 0) += unif(rng);
    const double sigma = kgof::median_heuristic<double>(samples);
    rejections += bh_test<double>(samples, sigma, 150, 0.05, derive_seed(5, t)).reject ? 1 : 0;
  }
  CHECK(rejections >= 18);
}

TEST_CASE("power decays with dimension for the shifted alternative") {
  // Fixed unit bandwidth; an adaptive bandwidth would keep the power near 1
  // in every dimension and hide the decay.
  auto power_at = [&](Index d) {
    int rejections = 0;
    const int trials = 30;
    for (int t = 0; t < trials; ++t) {
      Matd samples = normal_draws(300, d, 2000 + 100 * static_cast<unsigned>(d) + t);
      std::mt19937_64 rng(derive_seed(13, 100 * d + t));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (Index i = 0; i < samples.rows(); ++i) samples(i, 0) += unif(rng);
      rejections +=
          bh_test<double>(samples, 1.0, 120, 0.05, derive_seed(17, 100 * d + t)).reject ? 1 : 0;
    }
    return static_cast<double>(rejections) / trials;
  };
  const double p2 = power_at(2);
  const double p25 = power_at(25);
  CHECK(p2 >= p25 + 0.3);
  CHECK(p2 >= 0.9);
}

TEST_CASE("test results are reproducible for a fixed seed") {
  const Matd samples = normal_draws(100, 3, 71);
  const auto a = bh_test<double>(samples, 1.0, 80, 0.05, 999);
  const auto b = bh_test<double>(samples, 1.0, 80, 0.05, 999);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
  CHECK(a.threshold == b.threshold);
}
