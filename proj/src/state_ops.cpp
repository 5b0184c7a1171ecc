#include "nds/state_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "nds/characteristic.hpp"
#include "nds/errors.hpp"
#include "nds/grid_ops.hpp"

namespace nds {

namespace {

constexpr double kDomainTol = 1e-8;
constexpr double kInvertTol = 1e-10;

void require_grid(const M2State& x, int n) {
  if (x.y.size() != n || x.z.rows() != n) throw DimensionError("state dimension does not match the system");
  if (x.z.cols() < 3) throw RangeError("state grid needs m >= 2");
}

}  // namespace

double m2_norm(const M2State& x) {
  double integral = 0.0;
  const Eigen::Index cols = x.z.cols();
  if (cols >= 2) {
    const double h = 1.0 / static_cast<double>(cols - 1);
    for (Eigen::Index i = 0; i < cols; ++i) {
      const double w = (i == 0 || i == cols - 1) ? 0.5 * h : h;
      integral += w * x.z.col(i).squaredNorm();
    }
  }
  return std::sqrt(x.y.squaredNorm() + integral);
}

double domain_defect(const NeutralSystem& sys, const M2State& x) {
  return (x.y - (x.z.col(x.z.cols() - 1) - sys.a_minus1 * x.z.col(0))).norm();
}

M2State make_valid_state(const NeutralSystem& sys, Matrix z) {
  Vector y = z.col(z.cols() - 1) - sys.a_minus1 * z.col(0);
  return {std::move(y), std::move(z)};
}

M2State random_smooth_state(const NeutralSystem& sys, int m, std::uint64_t seed) {
  if (m < 2) throw RangeError("random_smooth_state: m must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int n = sys.n;
  std::vector<Vector> coeffs;
  double fact = 1.0;
  for (int d = 0; d <= 3; ++d) {
    if (d > 0) fact *= d;
    Vector c(n);
    for (int i = 0; i < n; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      c(i) = Complex(re, im) / fact;
    }
    coeffs.push_back(std::move(c));
  }
  Matrix z(n, m + 1);
  for (int i = 0; i <= m; ++i) {
    const double t = -1.0 + static_cast<double>(i) / m;
    Vector v = coeffs[3];
    for (int d = 2; d >= 0; --d) v = (v * t + coeffs[static_cast<std::size_t>(d)]).eval();
    z.col(i) = v;
  }
  return make_valid_state(sys, std::move(z));
}

M2State resample(const M2State& x, int m) {
  if (m < 2) throw RangeError("resample: m must be at least 2");
  const int src_m = x.m();
  if (src_m == m) return x;
  const Eigen::Index total = src_m + 1;
  const Eigen::Index points = std::min<Eigen::Index>(kInterpolationStencil, total);
  std::vector<double> nodes(static_cast<std::size_t>(points));
  Matrix z(x.z.rows(), m + 1);
  for (int i = 0; i <= m; ++i) {
    const double pos = static_cast<double>(i) * src_m / m;  // in source index units
    const auto cell = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), src_m - 1);
    const Eigen::Index s = std::clamp<Eigen::Index>(cell - (points / 2 - 1), 0, total - points);
    for (Eigen::Index k = 0; k < points; ++k) nodes[static_cast<std::size_t>(k)] = static_cast<double>(s + k);
    const auto w = fornberg_weights(pos, nodes, 0)[0];
    Vector acc = Vector::Zero(x.z.rows());
    for (Eigen::Index k = 0; k < points; ++k) acc += w[static_cast<std::size_t>(k)] * x.z.col(s + k);
    z.col(i) = acc;
  }
  return {x.y, std::move(z)};
}

M2State apply_generator(const NeutralSystem& sys, const M2State& x) {
  require_grid(x, sys.n);
  const double defect = domain_defect(sys, x);
  if (defect > kDomainTol * m2_norm(x)) {
    throw DomainViolationError("state violates y = z(0) - A_-1 z(-1) by " + std::to_string(defect));
  }
  const int m = x.m();
  Matrix dz = differentiate(x.z, x.h());
  Vector y = Vector::Zero(sys.n);
  if (!sys.a2.is_zero()) y += apply_block_row(product_weights(sys.a2, m), dz);
  if (!sys.a3.is_zero()) y += apply_block_row(product_weights(sys.a3, m), x.z);
  return {std::move(y), std::move(dz)};
}

M2State solve_generator(const NeutralSystem& sys, const M2State& b) {
  require_grid(b, sys.n);
  const Matrix int_a3 = sys.a3.integral();
  {
    Eigen::JacobiSVD<Matrix> svd(int_a3);
    const auto& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(s.size() - 1) <= kInvertTol * s(0)) {
      throw ZeroInSpectrumError("0 is in the spectrum: Delta(0) = -int A3 is singular, so A^-1 does not exist");
    }
  }
  const int m = b.m();
  const double h = b.h();
  // V(theta) = int_0^theta b_z, cumulative trapezoid from the right end.
  Matrix v(sys.n, m + 1);
  v.col(m).setZero();
  for (int i = m - 1; i >= 0; --i) v.col(i) = v.col(i + 1) - 0.5 * h * (b.z.col(i) + b.z.col(i + 1));

  const Matrix w3 = product_weights(sys.a3, m);
  Matrix sum_w3 = Matrix::Zero(sys.n, sys.n);
  for (int i = 0; i <= m; ++i) sum_w3 += weight_block(w3, i);
  Vector rhs = b.y - apply_block_row(w3, v);
  if (!sys.a2.is_zero()) rhs -= apply_block_row(product_weights(sys.a2, m), b.z);
  const Vector v0 = sum_w3.fullPivLu().solve(rhs);
  v.colwise() += v0;
  Vector w = v0 - sys.a_minus1 * v.col(0);
  return {std::move(w), std::move(v)};
}

M2State smooth(const NeutralSystem& sys, const M2State& x, int n_times) {
  if (n_times < 0) throw RangeError("smooth: n_times must be non-negative");
  M2State out = x;
  for (int i = 0; i < n_times; ++i) out = solve_generator(sys, out);
  return out;
}

EigenFunction eigenfunction(const NeutralSystem& sys, Complex lambda, int m) {
  if (m < 2) throw RangeError("eigenfunction: m must be at least 2");
  const Matrix d = char_matrix(sys, lambda);
  Eigen::JacobiSVD<Matrix> svd(d, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double scale = char_scale(sys, lambda) + char_matrix_derivative(sys, lambda).norm();
  const auto n = s.size();
  if (s(n - 1) > 1e-8 * scale) {
    throw NotAnEigenvalueError("Delta(lambda) is not singular at lambda = (" + std::to_string(lambda.real()) + "," +
                               std::to_string(lambda.imag()) + ")");
  }
  if (n >= 2 && s(n - 2) <= 1e-8 * scale) {
    throw MultipleKernelError("Delta(lambda) has a kernel of dimension > 1; root vectors are not constructed");
  }
  Vector c = svd.matrixV().col(n - 1);
  // Fix the phase: largest component real and positive.
  Eigen::Index big = 0;
  c.cwiseAbs().maxCoeff(&big);
  c *= std::abs(c(big)) / c(big);
  c.normalize();

  Matrix z(sys.n, m + 1);
  for (int i = 0; i <= m; ++i) z.col(i) = std::exp(lambda * (-1.0 + static_cast<double>(i) / m)) * c;
  Vector y = (Matrix::Identity(sys.n, sys.n) - std::exp(-lambda) * sys.a_minus1) * c;
  return {lambda, c, M2State(std::move(y), std::move(z))};
}

namespace {

void write_row(const Vector& v, std::ostream& out) {
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", i == 0 ? "" : ",", v(i).real(), v(i).imag());
    out << buf;
  }
  out << '\n';
}

Vector parse_row(const std::string& line, int n, int lineno) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ParseError("state CSV line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
  }
  if (static_cast<int>(vals.size()) != 2 * n) {
    throw DimensionError("state CSV line " + std::to_string(lineno) + ": expected " + std::to_string(2 * n) +
                         " values, found " + std::to_string(vals.size()));
  }
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(vals[2 * static_cast<std::size_t>(i)], vals[2 * static_cast<std::size_t>(i) + 1]);
  return v;
}

}  // namespace

void write_state_csv(const M2State& x, std::ostream& out) {
  write_row(x.y, out);
  for (Eigen::Index i = 0; i < x.z.cols(); ++i) write_row(x.z.col(i), out);
}

M2State read_state_csv(std::istream& in, int n) {
  std::string line;
  std::vector<Vector> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_row(line, n, lineno));
  }
  if (rows.size() < 4) throw ParseError("state CSV needs a y row and at least 3 z rows");
  Matrix z(n, static_cast<Eigen::Index>(rows.size()) - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) z.col(static_cast<Eigen::Index>(i) - 1) = rows[i];
  return {rows[0], std::move(z)};
}

}  // namespace nds
