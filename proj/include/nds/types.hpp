#pragma once

#include <complex>

#include <Eigen/Dense>

namespace nds {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace nds
