#pragma once

#include <span>
#include <vector>

#include "nds/system.hpp"
#include "nds/types.hpp"

namespace nds {

/// Finite-difference weights for derivatives 0..max_deriv of a function
/// sampled at `nodes`, evaluated at x0 (Fornberg's recursion). Row d holds
/// the weights of the d-th derivative.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes, int max_deriv);

inline constexpr int kDifferenceStencil = 9;    // 8th order
inline constexpr int kInterpolationStencil = 8; // degree-7 local interpolation

/// d/dtheta of the columns of z (uniform grid, spacing h), using centered
/// stencils of `stencil` points in the interior and shifted one-sided
/// stencils of the same width near the ends.
Matrix differentiate(const Matrix& z, double h, int stencil = kDifferenceStencil);

/// Product-integration weights for int_{-1}^0 K(theta) z(theta) dtheta on the
/// grid theta_i = -1 + i/m. Returned as an n x n(m+1) block row
/// [W_0 W_1 ... W_m] so that the integral is W * vec(z). z is interpolated
/// locally by polynomials through `stencil` neighbouring nodes; the kernel is
/// integrated exactly piece by piece, so breakpoints need not lie on the grid.
Matrix product_weights(const PiecewisePolyKernel& kernel, int m, int stencil = kInterpolationStencil);

/// Linear-interpolation (trapezoid-order) product weights split by cell side:
/// `lower` holds each node's weight as the left end of its cell, `upper` as the
/// right end. lower + upper equals product_weights(kernel, m, 2).
struct SplitTrapezoidWeights {
  Matrix lower;
  Matrix upper;
};
SplitTrapezoidWeights trapezoid_weights(const PiecewisePolyKernel& kernel, int m);

/// W * vec(columns [first, first + m]) for a block-row weight matrix W.
Vector apply_block_row(const Matrix& w, const Matrix& samples, Eigen::Index first = 0);

/// Block i (n x n) of a block-row weight matrix.
inline auto weight_block(const Matrix& w, Eigen::Index i) {
  return w.block(0, i * w.rows(), w.rows(), w.rows());
}
inline auto weight_block(Matrix& w, Eigen::Index i) {
  return w.block(0, i * w.rows(), w.rows(), w.rows());
}

}  // namespace nds
