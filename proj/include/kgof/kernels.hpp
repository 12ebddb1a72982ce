#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgof/mathutil.hpp"
#include "kgof/random.hpp"
#include "kgof/types.hpp"

namespace kgof {

/// Value and first/second derivatives of a kernel at a point pair.
/// mixed_trace is sum_i d^2 k / dx_i dy_i.
template <typename S>
struct KernelDerivatives {
  S value = S(0);
  Vec<S> grad_x;
  Vec<S> grad_y;
  S mixed_trace = S(0);
};

/// A symmetric positive definite kernel with analytic first derivatives in
/// both arguments and the mixed second-derivative trace. Implementations are
/// immutable; all evaluations are pure and safe to call concurrently.
template <typename S>
class DifferentiableKernel {
 public:
  virtual ~DifferentiableKernel() = default;

  virtual S eval(const VecCRef<S>& x, const VecCRef<S>& y) const = 0;
  virtual Vec<S> grad_x(const VecCRef<S>& x, const VecCRef<S>& y) const = 0;
  virtual Vec<S> grad_y(const VecCRef<S>& x, const VecCRef<S>& y) const = 0;
  virtual S mixed_trace(const VecCRef<S>& x, const VecCRef<S>& y) const = 0;

  /// All four quantities in one call; out's vectors are resized as needed so
  /// tight loops can reuse the buffers.
  virtual void derivatives_into(const VecCRef<S>& x, const VecCRef<S>& y,
                                KernelDerivatives<S>& out) const {
    out.value = eval(x, y);
    out.grad_x = grad_x(x, y);
    out.grad_y = grad_y(x, y);
    out.mixed_trace = mixed_trace(x, y);
  }
};

/// Exponentiated quadratic kernel k(x, y) = exp(-|x-y|^2 / (2 sigma^2)).
/// The family is C0-universal, so the induced discrepancy separates
/// distributions. Derivatives:
///   grad_x k = -((x - y) / sigma^2) k,   grad_y k = ((x - y) / sigma^2) k,
///   sum_i d^2 k / dx_i dy_i = k (d / sigma^2 - |x-y|^2 / sigma^4).
template <typename S>
class RbfKernel final : public DifferentiableKernel<S> {
 public:
  explicit RbfKernel(S bandwidth) : sigma_(bandwidth) {
    if (!(bandwidth > S(0)) || !std::isfinite(static_cast<double>(bandwidth)))
      throw std::invalid_argument("RbfKernel: bandwidth must be positive and finite");
  }

  S bandwidth() const { return sigma_; }

  S eval(const VecCRef<S>& x, const VecCRef<S>& y) const override {
    check_dims(x, y);
    return std::exp(-(x - y).squaredNorm() / (S(2) * sigma_ * sigma_));
  }

  Vec<S> grad_x(const VecCRef<S>& x, const VecCRef<S>& y) const override {
    return -grad_y(x, y);
  }

  Vec<S> grad_y(const VecCRef<S>& x, const VecCRef<S>& y) const override {
    check_dims(x, y);
    const S k = std::exp(-(x - y).squaredNorm() / (S(2) * sigma_ * sigma_));
    return (x - y) * (k / (sigma_ * sigma_));
  }

  S mixed_trace(const VecCRef<S>& x, const VecCRef<S>& y) const override {
    check_dims(x, y);
    const S sq = (x - y).squaredNorm();
    const S s2 = sigma_ * sigma_;
    const S k = std::exp(-sq / (S(2) * s2));
    return k * (static_cast<S>(x.size()) / s2 - sq / (s2 * s2));
  }

  void derivatives_into(const VecCRef<S>& x, const VecCRef<S>& y,
                        KernelDerivatives<S>& out) const override {
    check_dims(x, y);
    const S s2 = sigma_ * sigma_;
    out.grad_y = x - y;
    const S sq = out.grad_y.squaredNorm();
    const S k = std::exp(-sq / (S(2) * s2));
    out.value = k;
    out.grad_y *= k / s2;
    out.grad_x = -out.grad_y;
    out.mixed_trace = k * (static_cast<S>(x.size()) / s2 - sq / (s2 * s2));
  }

 private:
  static void check_dims(const VecCRef<S>& x, const VecCRef<S>& y) {
    if (x.size() != y.size())
      throw std::invalid_argument("RbfKernel: x and y dimensions differ (" +
                                  std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                                  ")");
  }

  S sigma_;
};

/// Evaluates value, both gradients and the mixed trace at (x, y) in one call.
template <typename S>
KernelDerivatives<S> kernel_derivatives(const DifferentiableKernel<S>& kernel,
                                        const std::type_identity_t<VecCRef<S>>& x,
                                        const std::type_identity_t<VecCRef<S>>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernel_derivatives: x and y dimensions differ");
  KernelDerivatives<S> out;
  kernel.derivatives_into(x, y, out);
  return out;
}

/// Median of the pairwise Euclidean distances of the sample rows. When the
/// number of pairs exceeds `max_pairs`, a uniform subsample of pairs is used;
/// the subsample is drawn from `seed`, so the result is deterministic.
/// Throws if all rows coincide ("degenerate sample").
template <typename S>
S median_heuristic(const MatCRef<S>& samples, std::uint64_t seed = 0x6d656469616eULL,
                   std::uint64_t max_pairs = 1000000) {
  const Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("median_heuristic: need at least 2 samples");
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::vector<S> dists;
  if (total <= max_pairs) {
    dists.reserve(static_cast<std::size_t>(total));
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        dists.push_back((samples.row(i) - samples.row(j)).norm());
  } else {
    auto rng = make_rng(derive_seed(seed, 0));
    std::uniform_int_distribution<Index> pick(0, n - 1);
    dists.reserve(static_cast<std::size_t>(max_pairs));
    while (dists.size() < max_pairs) {
      const Index i = pick(rng);
      const Index j = pick(rng);
      if (i == j) continue;
      dists.push_back((samples.row(i) - samples.row(j)).norm());
    }
  }
  const S med = median(std::move(dists));
  if (!(med > S(0))) throw std::runtime_error("median_heuristic: degenerate sample");
  return med;
}

}  // namespace kgof
