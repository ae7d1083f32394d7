#pragma once

#include <Eigen/Dense>

namespace rsp {

using Real = double;
using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<Real>;
using Vector = DenseVector<Real>;

// Instances up to this many nodes use dense factorizations; larger ones go
// through the sparse iterative path.
inline constexpr Index kDenseNodeLimit = 4096;

} // namespace rsp
