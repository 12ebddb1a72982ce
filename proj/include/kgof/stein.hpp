#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "kgof/kernels.hpp"
#include "kgof/parallel.hpp"
#include "kgof/targets.hpp"
#include "kgof/types.hpp"

namespace kgof {

/// n x n matrix H with H(i, j) = stein_kernel(Z_i, Z_j). H is an inner-product
/// (Gram) matrix, hence symmetric and positive semidefinite up to roundoff.
template <typename S>
using SteinMatrix = Mat<S>;

/// The Stein-modified kernel
///   h_p(x, y) = s(x)'s(y) k(x,y) + s(y)'grad_x k + s(x)'grad_y k
///             + sum_i d^2 k / dx_i dy_i,
/// where s = grad log p. Its expectation under the target is zero in each
/// argument, which is what makes the discrepancy computable without
/// normalizing constants.
template <typename S>
S stein_kernel(const TargetDensity<S>& target, const DifferentiableKernel<S>& kernel,
               const VecCRef<S>& x, const VecCRef<S>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("stein_kernel: x and y dimensions differ");
  const Vec<S> sx = grad_log_density<S>(target, x);
  const Vec<S> sy = grad_log_density<S>(target, y);
  const KernelDerivatives<S> kd = kernel_derivatives(kernel, x, y);
  return sx.dot(sy) * kd.value + sy.dot(kd.grad_x) + sx.dot(kd.grad_y) + kd.mixed_trace;
}

/// Dense Stein matrix over the sample rows. Entries are computed for i <= j
/// and mirrored, so the result is symmetric bitwise. Entries are pure
/// functions of (Z_i, Z_j); row blocks may be computed on several threads
/// without changing the result.
template <typename S>
SteinMatrix<S> stein_matrix(const TargetDensity<S>& target, const DifferentiableKernel<S>& kernel,
                            const MatCRef<S>& samples, unsigned n_threads = 0) {
  const Index n = samples.rows();
  const Index d = samples.cols();
  if (n < 1) throw std::invalid_argument("stein_matrix: need at least one sample");
  if (d != target.dim)
    throw std::invalid_argument("stein_matrix: sample dimension " + std::to_string(d) +
                                " does not match target dimension " + std::to_string(target.dim));

  // Column-major copies so each sample and score is a contiguous column.
  Mat<S> points = samples.transpose();
  Mat<S> scores(d, n);
  for (Index i = 0; i < n; ++i) {
    Vec<S> s = target.grad_log_density(points.col(i));
    if (s.size() != d)
      throw std::invalid_argument("stein_matrix: target gradient has wrong dimension");
    if (!s.allFinite())
      throw std::runtime_error("stein_matrix: non-finite score at sample index " +
                               std::to_string(i));
    scores.col(i) = s;
  }

  Mat<S> h(n, n);
  if (n_threads == 0) n_threads = std::thread::hardware_concurrency();
  parallel_for(
      n,
      [&](std::ptrdiff_t i) {
        KernelDerivatives<S> kd;
        for (Index j = i; j < n; ++j) {
          kernel.derivatives_into(points.col(i), points.col(j), kd);
          const S value = scores.col(i).dot(scores.col(j)) * kd.value +
                          scores.col(j).dot(kd.grad_x) + scores.col(i).dot(kd.grad_y) +
                          kd.mixed_trace;
          if (!std::isfinite(static_cast<double>(value)))
            throw std::runtime_error("stein_matrix: non-finite entry at sample indices (" +
                                     std::to_string(i) + ", " + std::to_string(j) + ")");
          h(i, j) = value;
          h(j, i) = value;
        }
      },
      n_threads);
  return h;
}

/// V-statistic V_n = (1/n^2) sum_{i,j} H(i,j), the plug-in estimate of the
/// squared discrepancy. Computed as the quadratic form with unit signs so it
/// is bitwise-identical to the wild bootstrap statistic at signs == +1.
template <typename S>
S v_statistic(const MatCRef<S>& h) {
  if (h.rows() != h.cols() || h.rows() < 1)
    throw std::invalid_argument("v_statistic: matrix must be square and nonempty");
  const Vec<S> ones = Vec<S>::Ones(h.rows());
  return ones.dot(h * ones) / (static_cast<S>(h.rows()) * static_cast<S>(h.rows()));
}

}  // namespace kgof
