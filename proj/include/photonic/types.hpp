#pragma once

#include <complex>

#include <Eigen/Dense>

namespace photonic {

using complex = std::complex<double>;
using cmatrix = Eigen::MatrixXcd;
using cvector = Eigen::VectorXcd;
using rmatrix = Eigen::MatrixXd;
using rvector = Eigen::VectorXd;
using index_t = Eigen::Index;

inline constexpr double pi = 3.14159265358979323846;

} // namespace photonic
