#pragma once

#include <Eigen/Dense>

namespace lube {

// All arithmetic is 64-bit; gradient-check tolerances depend on it.
using Real = double;
using Index = Eigen::Index;

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using ArrayX = Eigen::Array<T, Eigen::Dynamic, 1>;

using Matrix = MatrixX<Real>;
using Vector = VectorX<Real>;
using Array = ArrayX<Real>;

} // namespace lube
