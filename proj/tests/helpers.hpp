#pragma once

#include <initializer_list>
#include <random>

#include "nds/system.hpp"

namespace testing {

using nds::Complex;
using nds::Matrix;

inline Matrix mat(std::initializer_list<std::initializer_list<Complex>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (const auto& v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline nds::NeutralSystem scalar(Complex a, Complex a2 = 0.0, Complex a3 = 0.0) {
  return nds::make_system(mat({{a}}), mat({{a2}}), mat({{a3}}));
}

inline nds::NeutralSystem pure(const Matrix& a) {
  const auto n = a.rows();
  return nds::make_system(a, Matrix::Zero(n, n), Matrix::Zero(n, n));
}

inline Matrix random_matrix(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng)) * scale;
  return m;
}

// Random piecewise cubic kernel with one interior breakpoint off the grid.
inline nds::PiecewisePolyKernel random_kernel(int n, std::mt19937_64& rng, double scale, double split = -0.37) {
  nds::PiecewisePolyKernel k;
  k.breakpoints = {-1.0, split, 0.0};
  for (int p = 0; p < 2; ++p) {
    std::vector<Matrix> coeffs;
    for (int d = 0; d < 4; ++d) coeffs.push_back(random_matrix(n, rng, scale / (d + 1)));
    k.pieces.push_back(coeffs);
  }
  return k;
}

}  // namespace testing
