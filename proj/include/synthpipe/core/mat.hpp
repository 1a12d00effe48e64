#pragma once

#include <Eigen/Core>

namespace synthpipe {

/// Row-major dense image/feature matrix. Row-major matches the NCHW tensor
/// layout used by the networks, so image rows map to contiguous memory.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using MatF = Mat<float>;
using MatD = Mat<double>;
using VecF = Vec<float>;
using VecD = Vec<double>;

}  // namespace synthpipe
