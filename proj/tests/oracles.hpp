// Independent numerical oracles used by the tests: finite differences,
// quadrature, feature-space inner products, closed-form reference processes.
// Nothing here reuses the analytic derivative or closed-form code paths it is
// meant to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "kgof/types.hpp"

namespace oracles {

using kgof::Index;
using kgof::Matd;
using kgof::Vecd;

/// Central finite-difference gradient with per-coordinate step scaled by the
/// coordinate magnitude.
inline Vecd fd_gradient(const std::function<double(const Vecd&)>& f, const Vecd& x,
                        double step = 1e-5) {
  Vecd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    Vecd hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

/// Mixed second derivative d^2 f / dx_i dy_j by nested central differences.
inline double fd_mixed_second(const std::function<double(const Vecd&, const Vecd&)>& f,
                              const Vecd& x, const Vecd& y, Index i, Index j,
                              double step = 1e-4) {
  const double hx = step * std::max(1.0, std::abs(x[i]));
  const double hy = step * std::max(1.0, std::abs(y[j]));
  Vecd xp = x, xm = x;
  xp[i] += hx;
  xm[i] -= hx;
  Vecd yp = y, ym = y;
  yp[j] += hy;
  ym[j] -= hy;
  return (f(xp, yp) - f(xp, ym) - f(xm, yp) + f(xm, ym)) / (4.0 * hx * hy);
}

inline double rel_error(double a, double b) {
  const double scale = std::max({1e-12, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

/// Largest componentwise relative error between two vectors, with an absolute
/// floor so near-zero components compare sanely.
inline double max_rel_error(const Vecd& a, const Vecd& b, double floor = 1e-7) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({floor, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

/// Composite Simpson quadrature on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      int intervals = 2000) {
  if (intervals % 2 == 1) ++intervals;
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int k = 1; k < intervals; ++k) acc += f(lo + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// Frequency-space oracle for the Stein kernel in one dimension with the
/// exponentiated quadratic kernel. The kernel's spectral density is
/// N(0, 1/sigma^2); with features psi_w(x) = sqrt(p(w)) e^{-iwx}, the section
/// x -> s(x) k(x,.) + d/dx k(x,.) has feature (s(x) - iw) psi_w(x), and the
/// RKHS inner product of two sections is the integral over w of
///   p(w) [ (s(x) s(y) + w^2) cos(w(x-y)) + (s(x) - s(y)) w sin(w(x-y)) ].
/// Evaluated by quadrature on a dense w grid; never touches the closed form.
inline double stein_kernel_feature_oracle(double x, double y, double sx, double sy,
                                          double sigma) {
  const double w_sd = 1.0 / sigma;
  const double lim = 12.0 * w_sd;
  auto integrand = [&](double w) {
    const double p = std::exp(-0.5 * w * w * sigma * sigma) * sigma /
                     std::sqrt(2.0 * M_PI);
    const double delta = x - y;
    return p * ((sx * sy + w * w) * std::cos(w * delta) + (sx - sy) * w * std::sin(w * delta));
  };
  return simpson(integrand, -lim, lim, 60000);
}

/// AR(1) series with unit stationary variance: x_{t+1} = phi x_t + sqrt(1-phi^2) e.
inline Vecd ar1_series(double phi, Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vecd x(n);
  x[0] = normal(rng);
  const double innovation_sd = std::sqrt(1.0 - phi * phi);
  for (Index t = 1; t < n; ++t) x[t] = phi * x[t - 1] + innovation_sd * normal(rng);
  return x;
}

/// One-sample Kolmogorov-Smirnov check against U(0,1): returns the asymptotic
/// p-value of the KS statistic (Kolmogorov distribution tail).
inline double ks_uniform_pvalue(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cdf = values[i];
    d = std::max(d, (i + 1) / n - cdf);
    d = std::max(d, cdf - i / n);
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double tail = 0.0;
  for (int k = 1; k <= 100; ++k)
    tail += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::min(1.0, std::max(0.0, tail));
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace oracles
