#pragma once

#include <complex>

#include <Eigen/Dense>

namespace spatinv {

using Complex = std::complex<double>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = MatrixX<Complex>;
using CVector = VectorX<Complex>;
using RMatrix = MatrixX<double>;
using RVector = VectorX<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spatinv
