#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "kgof/types.hpp"

namespace kgof {

/// A target density known up to normalization: the log density (plus an
/// arbitrary constant) and its gradient, the score function. The score is all
/// the goodness-of-fit machinery ever needs, so the normalization constant
/// never enters. Instances are immutable and safe to evaluate concurrently.
///
/// Conventions: log_density_unnorm returns -inf where the density is zero;
/// grad_log_density is only required to be finite where the density is
/// positive.
template <typename S>
struct TargetDensity {
  Index dim = 0;
  std::function<S(const Vec<S>&)> log_density_unnorm;
  std::function<Vec<S>(const Vec<S>&)> grad_log_density;
};

namespace detail {

template <typename S>
void check_dim(const TargetDensity<S>& target, const Vec<S>& x, const char* what) {
  if (x.size() != target.dim)
    throw std::invalid_argument(std::string(what) + ": point has dimension " +
                                std::to_string(x.size()) + ", target expects " +
                                std::to_string(target.dim));
}

}  // namespace detail

/// Evaluates log p(x) + C for the fixed unknown constant C.
template <typename S>
S log_density_unnorm(const TargetDensity<S>& target, const Vec<S>& x) {
  detail::check_dim(target, x, "log_density_unnorm");
  return target.log_density_unnorm(x);
}

/// Evaluates the score function grad log p(x). Throws std::domain_error if
/// the result is non-finite (e.g. the point lies outside the support).
template <typename S>
Vec<S> grad_log_density(const TargetDensity<S>& target, const Vec<S>& x) {
  detail::check_dim(target, x, "grad_log_density");
  Vec<S> g = target.grad_log_density(x);
  if (!g.allFinite())
    throw std::domain_error("grad_log_density: non-finite score (point outside support?)");
  return g;
}

/// Standard normal N(0, I_d): log p = -|x|^2/2, score = -x.
template <typename S>
TargetDensity<S> standard_normal_target(Index dim) {
  if (dim < 1) throw std::invalid_argument("standard_normal_target: dim must be >= 1");
  TargetDensity<S> t;
  t.dim = dim;
  t.log_density_unnorm = [](const Vec<S>& x) -> S { return S(-0.5) * x.squaredNorm(); };
  t.grad_log_density = [](const Vec<S>& x) -> Vec<S> { return -x; };
  return t;
}

/// Product of independent Student's t marginals with `dof` degrees of freedom
/// per coordinate. dof = +inf degenerates to the standard normal. For d = 1:
/// log p = -(dof+1)/2 * log(1 + x^2/dof), score = -(dof+1) x / (dof + x^2).
template <typename S>
TargetDensity<S> student_t_target(S dof, Index dim = 1) {
  if (!(dof > S(0))) throw std::invalid_argument("student_t_target: dof must be > 0");
  if (dim < 1) throw std::invalid_argument("student_t_target: dim must be >= 1");
  if (std::isinf(static_cast<double>(dof))) return standard_normal_target<S>(dim);
  TargetDensity<S> t;
  t.dim = dim;
  t.log_density_unnorm = [dof](const Vec<S>& x) -> S {
    return (-(dof + S(1)) / S(2)) * (x.array().square() / dof).log1p().sum();
  };
  t.grad_log_density = [dof](const Vec<S>& x) -> Vec<S> {
    return (-(dof + S(1)) * x.array() / (dof + x.array().square())).matrix();
  };
  return t;
}

/// Two-component Gaussian mixture posterior over theta = (theta1, theta2):
///   theta1 ~ N(0, 10), theta2 ~ N(0, 1)
///   x_i | theta ~ 1/2 N(theta1, 4) + 1/2 N(theta1 + theta2, 4).
/// Exposes per-datum log likelihoods so subsampling samplers can consume the
/// data piecemeal; target() assembles the full posterior as a TargetDensity.
template <typename S>
class MixturePosterior {
 public:
  static constexpr double kPriorVar1 = 10.0;
  static constexpr double kPriorVar2 = 1.0;
  static constexpr double kComponentVar = 4.0;

  explicit MixturePosterior(Vec<S> data) : data_(std::move(data)) {
    if (data_.size() == 0) throw std::invalid_argument("MixturePosterior: empty dataset");
    if (!data_.allFinite()) throw std::invalid_argument("MixturePosterior: non-finite data");
  }

  Index data_size() const { return data_.size(); }
  const Vec<S>& data() const { return data_; }

  S log_prior(const Vec<S>& theta) const {
    check_theta(theta);
    const S half_log_2pi = S(0.5) * std::log(2.0 * M_PI);
    return -theta[0] * theta[0] / (S(2) * S(kPriorVar1)) - half_log_2pi -
           S(0.5) * std::log(S(kPriorVar1)) - theta[1] * theta[1] / (S(2) * S(kPriorVar2)) -
           half_log_2pi - S(0.5) * std::log(S(kPriorVar2));
  }

  /// log( 1/2 N(x; theta1, 4) + 1/2 N(x; theta1+theta2, 4) ), stabilized so
  /// neither component underflows for large |theta|.
  S log_likelihood_point(const Vec<S>& theta, Index i) const {
    check_theta(theta);
    const S x = data_[i];
    const S a = component_logpdf(x, theta[0]);
    const S b = component_logpdf(x, theta[0] + theta[1]);
    const S m = std::max(a, b);
    return std::log(S(0.5)) + m + std::log1p(std::exp(std::min(a, b) - m));
  }

  /// Sum of per-datum log likelihoods in data order.
  S log_likelihood(const Vec<S>& theta) const {
    S total = S(0);
    for (Index i = 0; i < data_.size(); ++i) total += log_likelihood_point(theta, i);
    return total;
  }

  /// Posterior as a TargetDensity; the gradient uses responsibility weights
  /// computed in log space.
  TargetDensity<S> target() const {
    TargetDensity<S> t;
    t.dim = 2;
    auto self = *this;
    t.log_density_unnorm = [self](const Vec<S>& theta) -> S {
      return self.log_prior(theta) + self.log_likelihood(theta);
    };
    t.grad_log_density = [self](const Vec<S>& theta) -> Vec<S> {
      return self.grad_log_posterior(theta);
    };
    return t;
  }

  Vec<S> grad_log_posterior(const Vec<S>& theta) const {
    check_theta(theta);
    const auto& x = data_.array();
    const S mu_a = theta[0];
    const S mu_b = theta[0] + theta[1];
    auto a = -(x - mu_a).square() / (S(2) * S(kComponentVar));
    auto b = -(x - mu_b).square() / (S(2) * S(kComponentVar));
    auto m = a.max(b);
    auto ea = (a - m).exp();
    auto eb = (b - m).exp();
    auto wb = (eb / (ea + eb)).eval();
    const S d1 = ((x - mu_a) * (S(1) - wb) + (x - mu_b) * wb).sum() / S(kComponentVar) -
                 theta[0] / S(kPriorVar1);
    const S d2 = ((x - mu_b) * wb).sum() / S(kComponentVar) - theta[1] / S(kPriorVar2);
    Vec<S> g(2);
    g << d1, d2;
    return g;
  }

 private:
  static S component_logpdf(S x, S mu) {
    const S r = x - mu;
    return -r * r / (S(2) * S(kComponentVar)) -
           S(0.5) * std::log(S(2.0 * M_PI) * S(kComponentVar));
  }

  static void check_theta(const Vec<S>& theta) {
    if (theta.size() != 2)
      throw std::invalid_argument("MixturePosterior: theta must have dimension 2");
  }

  Vec<S> data_;
};

/// Per-sample standardization against heterogeneous univariate Gaussians:
/// each observation y_i with its own (mu_i, sigma_i) is mapped to
/// z_i = (y_i - mu_i) / sigma_i, and the z_i are tested against N(0, 1).
template <typename S>
class StandardizedResidualTarget {
 public:
  StandardizedResidualTarget(Vec<S> mu, Vec<S> sigma)
      : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    if (mu_.size() != sigma_.size())
      throw std::invalid_argument("StandardizedResidualTarget: mu/sigma size mismatch");
    if (mu_.size() == 0) throw std::invalid_argument("StandardizedResidualTarget: empty");
    if (!(sigma_.array() > S(0)).all())
      throw std::invalid_argument("StandardizedResidualTarget: sigma must be > 0");
  }

  Index size() const { return mu_.size(); }

  /// Maps raw observations (one per row, d = 1) to standardized residuals.
  Mat<S> standardize(const MatCRef<S>& y) const {
    if (y.cols() != 1)
      throw std::invalid_argument("StandardizedResidualTarget: observations must be n x 1");
    if (y.rows() != mu_.size())
      throw std::invalid_argument("StandardizedResidualTarget: sample count mismatch");
    Mat<S> z(y.rows(), 1);
    z.col(0) = (y.col(0) - mu_).cwiseQuotient(sigma_);
    return z;
  }

  /// The target the standardized residuals are tested against.
  TargetDensity<S> target() const { return standard_normal_target<S>(1); }

 private:
  Vec<S> mu_;
  Vec<S> sigma_;
};

}  // namespace kgof
