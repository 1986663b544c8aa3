#pragma once

#include <Eigen/Dense>

namespace sdl {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// The library-wide dense container. Storage is Eigen's column-major layout;
// files on disk are row-major (see matrix_io.hpp).
using DenseMatrix = Mat<double>;
using Vector = Vec<double>;

using Index = Eigen::Index;

}  // namespace sdl
