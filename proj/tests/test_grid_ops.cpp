#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "nds/grid_ops.hpp"

using namespace nds;

namespace {

Matrix sample(int n, int m, const std::function<Vector(double)>& f) {
  Matrix z(n, m + 1);
  for (int i = 0; i <= m; ++i) z.col(i) = f(-1.0 + static_cast<double>(i) / m);
  return z;
}

// Reference int_{-1}^0 K(t) z(t) dt piece by piece with adaptive Gauss-Kronrod.
Vector reference_integral(const PiecewisePolyKernel& k, const std::function<Vector(double)>& z) {
  const int n = k.dim();
  Vector acc = Vector::Zero(n);
  for (std::size_t p = 0; p < k.pieces.size(); ++p) {
    for (int r = 0; r < n; ++r) {
      for (int part = 0; part < 2; ++part) {
        auto f = [&](double t) {
          const Complex v = (k.eval_piece(p, t) * z(t))(r);
          return part == 0 ? v.real() : v.imag();
        };
        const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            f, k.breakpoints[p], k.breakpoints[p + 1], 15, 1e-14);
        acc(r) += part == 0 ? Complex(val, 0.0) : Complex(0.0, val);
      }
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("Fornberg weights reproduce textbook stencils") {
  const double nodes[] = {-1.0, 0.0, 1.0};
  const auto w = fornberg_weights(0.0, nodes, 2);
  CHECK(w[0][1] == doctest::Approx(1.0));
  CHECK(w[1][0] == doctest::Approx(-0.5));
  CHECK(w[1][2] == doctest::Approx(0.5));
  CHECK(w[2][0] == doctest::Approx(1.0));
  CHECK(w[2][1] == doctest::Approx(-2.0));
}

TEST_CASE("differentiate is exact on degree-8 polynomials and 8th order on smooth data") {
  const int m = 24;
  auto poly = [](double t) {
    Vector v(2);
    v(0) = std::pow(t, 8) - 3.0 * std::pow(t, 5) + t;
    v(1) = Complex(0.0, 2.0) * std::pow(t + 0.3, 7);
    return v;
  };
  auto dpoly = [](double t) {
    Vector v(2);
    v(0) = 8.0 * std::pow(t, 7) - 15.0 * std::pow(t, 4) + 1.0;
    v(1) = Complex(0.0, 14.0) * std::pow(t + 0.3, 6);
    return v;
  };
  const Matrix dz = differentiate(sample(2, m, poly), 1.0 / m);
  CHECK((dz - sample(2, m, dpoly)).cwiseAbs().maxCoeff() < 1e-9);

  // Constants differentiate to exactly zero.
  const Matrix c = Matrix::Constant(3, 41, Complex(1.7, -0.2));
  CHECK(differentiate(c, 1.0 / 40).cwiseAbs().maxCoeff() == 0.0);

  auto f = [](double t) { return Vector::Constant(1, std::exp(Complex(0.3, 6.0) * t)); };
  auto df = [](double t) { return Vector::Constant(1, Complex(0.3, 6.0) * std::exp(Complex(0.3, 6.0) * t)); };
  std::vector<double> errs;
  for (int mm : {40, 80}) {
    const Matrix d = differentiate(sample(1, mm, f), 1.0 / mm);
    errs.push_back((d - sample(1, mm, df)).cwiseAbs().maxCoeff());
  }
  CHECK(std::log2(errs[0] / errs[1]) > 7.0);
}

TEST_CASE("product weights integrate polynomials against off-grid piecewise kernels") {
  std::mt19937_64 rng(3);
  const auto k = testing::random_kernel(2, rng, 1.0, -0.4321);
  auto z = [](double t) {
    Vector v(2);
    v(0) = 1.0 + 2.0 * t - std::pow(t, 7);
    v(1) = Complex(0.5, 1.0) * std::pow(t, 4);
    return v;
  };
  const int m = 13;
  const Matrix w = product_weights(k, m);
  const Vector got = apply_block_row(w, sample(2, m, z));
  const Vector ref = reference_integral(k, z);
  CHECK((got - ref).norm() < 1e-12 * (1.0 + ref.norm()));

  // Smooth non-polynomial data: high order.
  auto g = [](double t) { return Vector::Constant(2, std::exp(Complex(0.0, 5.0) * t)); };
  const Vector gref = reference_integral(k, g);
  std::vector<double> errs;
  for (int mm : {32, 64}) errs.push_back((apply_block_row(product_weights(k, mm), sample(2, mm, g)) - gref).norm());
  CHECK(std::log2(errs[0] / errs[1]) > 7.0);
}

TEST_CASE("trapezoid weights split into lower and upper parts") {
  std::mt19937_64 rng(4);
  const auto k = testing::random_kernel(2, rng, 1.0);
  const int m = 17;
  const auto tw = trapezoid_weights(k, m);
  const Matrix full = product_weights(k, m, 2);
  CHECK((tw.lower + tw.upper - full).norm() < 1e-13 * full.norm());
  CHECK(weight_block(tw.lower, m).norm() == 0.0);
  CHECK(weight_block(tw.upper, 0).norm() == 0.0);

  auto lin = [](double t) { return Vector::Constant(2, Complex(1.0 - 3.0 * t, t)); };
  const Vector ref = reference_integral(k, lin);
  CHECK((apply_block_row(full, sample(2, m, lin)) - ref).norm() < 1e-12);
}
