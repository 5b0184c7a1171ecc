#include "nds/grid_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "nds/errors.hpp"

namespace nds {

namespace {

// 8-point Gauss-Legendre on [-1, 1]; exact through degree 15, enough for a
// cubic kernel times a degree-7 interpolant.
constexpr std::array<double, 8> kGaussX = {
    -0.9602898564975362316835609, -0.7966664774136267395915539, -0.5255324099163289858177390,
    -0.1834346424956498049394761, 0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
constexpr std::array<double, 8> kGaussW = {
    0.1012285362903762591525314, 0.2223810344533744705443560, 0.3137066458778872873379622,
    0.3626837833783619829651504, 0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

Eigen::Index stencil_start(Eigen::Index i, Eigen::Index left, Eigen::Index points, Eigen::Index total) {
  return std::clamp<Eigen::Index>(i - left, 0, total - points);
}

// Accumulate weights of cell [i, i+1] into w using nodes [start, start+points).
template <typename Sink>
void integrate_cell(const PiecewisePolyKernel& kernel, int m, Eigen::Index i, Eigen::Index start,
                    Eigen::Index points, Sink&& sink) {
  const double h = 1.0 / m;
  const double lo = -1.0 + static_cast<double>(i) * h;
  const double hi = -1.0 + static_cast<double>(i + 1) * h;
  std::vector<double> nodes(static_cast<std::size_t>(points));
  for (Eigen::Index k = 0; k < points; ++k) nodes[static_cast<std::size_t>(k)] = static_cast<double>(start + k);

  for (std::size_t p = 0; p < kernel.pieces.size(); ++p) {
    const double a = std::max(lo, kernel.breakpoints[p]);
    const double b = std::min(hi, kernel.breakpoints[p + 1]);
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t g = 0; g < kGaussX.size(); ++g) {
      const double theta = mid + half * kGaussX[g];
      const double wg = half * kGaussW[g];
      const Matrix kv = kernel.eval_piece(p, theta);
      // Position in grid-index units.
      const double x = (theta + 1.0) * m;
      const auto lw = fornberg_weights(x, nodes, 0);
      for (Eigen::Index k = 0; k < points; ++k) {
        sink(start + k, wg * lw[0][static_cast<std::size_t>(k)], kv);
      }
    }
  }
}

}  // namespace

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes, int max_deriv) {
  const auto np = nodes.size();
  std::vector<std::vector<double>> c(static_cast<std::size_t>(max_deriv) + 1, std::vector<double>(np, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < np; ++i) {
    const auto mn = std::min<std::size_t>(i, static_cast<std::size_t>(max_deriv));
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

Matrix differentiate(const Matrix& z, double h, int stencil) {
  const Eigen::Index total = z.cols();
  if (total < 2) throw RangeError("differentiate: need at least two samples");
  const Eigen::Index points = std::min<Eigen::Index>(stencil, total);
  const Eigen::Index left = points / 2;
  std::vector<double> nodes(static_cast<std::size_t>(points));
  for (Eigen::Index k = 0; k < points; ++k) nodes[static_cast<std::size_t>(k)] = static_cast<double>(k);

  std::map<Eigen::Index, std::vector<double>> cache;
  Matrix dz(z.rows(), total);
  for (Eigen::Index i = 0; i < total; ++i) {
    const Eigen::Index s = stencil_start(i, left, points, total);
    const Eigen::Index off = i - s;
    auto it = cache.find(off);
    if (it == cache.end()) {
      it = cache.emplace(off, fornberg_weights(static_cast<double>(off), nodes, 1)[1]).first;
    }
    const auto& w = it->second;
    // Differences against z_i make constants differentiate to exactly zero.
    Vector acc = Vector::Zero(z.rows());
    for (Eigen::Index k = 0; k < points; ++k) {
      if (s + k == i) continue;
      acc += w[static_cast<std::size_t>(k)] * (z.col(s + k) - z.col(i));
    }
    dz.col(i) = acc / h;
  }
  return dz;
}

Matrix product_weights(const PiecewisePolyKernel& kernel, int m, int stencil) {
  const int n = kernel.dim();
  const Eigen::Index total = m + 1;
  const Eigen::Index points = std::min<Eigen::Index>(stencil, total);
  const Eigen::Index left = points / 2 - 1;
  Matrix w = Matrix::Zero(n, n * total);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index s = stencil_start(i, left, points, total);
    integrate_cell(kernel, m, i, s, points, [&](Eigen::Index node, double lw, const Matrix& kv) {
      weight_block(w, node) += lw * kv;
    });
  }
  return w;
}

SplitTrapezoidWeights trapezoid_weights(const PiecewisePolyKernel& kernel, int m) {
  const int n = kernel.dim();
  const Eigen::Index total = m + 1;
  SplitTrapezoidWeights out{Matrix::Zero(n, n * total), Matrix::Zero(n, n * total)};
  for (Eigen::Index i = 0; i < m; ++i) {
    integrate_cell(kernel, m, i, i, 2, [&](Eigen::Index node, double lw, const Matrix& kv) {
      if (node == i) {
        weight_block(out.lower, node) += lw * kv;
      } else {
        weight_block(out.upper, node) += lw * kv;
      }
    });
  }
  return out;
}

Vector apply_block_row(const Matrix& w, const Matrix& samples, Eigen::Index first) {
  const Eigen::Index n = w.rows();
  const Eigen::Index len = w.cols();
  Eigen::Map<const Vector> flat(samples.data() + first * n, len);
  return w * flat;
}

}  // namespace nds
