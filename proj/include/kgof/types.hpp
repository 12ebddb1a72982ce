#pragma once

#include <Eigen/Dense>

namespace kgof {

template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

using Vecd = Vec<double>;
using Matd = Mat<double>;

template <typename S>
using VecCRef = Eigen::Ref<const Vec<S>>;

template <typename S>
using MatCRef = Eigen::Ref<const Mat<S>>;

}  // namespace kgof
