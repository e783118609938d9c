// Scalar, vector and matrix aliases used throughout the library.
#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace twistlab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using CSparse = Eigen::SparseMatrix<Complex>;
using RSparse = Eigen::SparseMatrix<double>;

// Complex grid function stored as one value per cell in global DOF order.
using GridField = CVector;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr Complex kI{0.0, 1.0};

}  // namespace twistlab
