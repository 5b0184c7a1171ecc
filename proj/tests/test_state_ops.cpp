#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "nds/characteristic.hpp"
#include "nds/errors.hpp"
#include "nds/state_ops.hpp"

using namespace nds;
using testing::mat;

namespace {

const double kLn2 = std::log(2.0);

M2State diff(const M2State& a, const M2State& b) { return {a.y - b.y, a.z - b.z}; }

NeutralSystem random_system(std::mt19937_64& rng, int n) {
  NeutralSystem sys;
  sys.n = n;
  sys.a_minus1 = testing::random_matrix(n, rng, 0.6) + Matrix::Identity(n, n);
  sys.a2 = testing::random_kernel(n, rng, 0.3);
  sys.a3 = testing::random_kernel(n, rng, 0.8);
  return sys;
}

}  // namespace

TEST_CASE("m2_norm examples") {
  M2State x(Vector::Constant(1, 3.0), Matrix::Zero(1, 11));
  CHECK(m2_norm(x) == doctest::Approx(3.0));
  x = M2State(Vector::Zero(1), Matrix::Ones(1, 11));
  CHECK(m2_norm(x) == doctest::Approx(1.0));
  Matrix z(1, 1001);
  for (int i = 0; i <= 1000; ++i) z(0, i) = -1.0 + i / 1000.0;
  x = M2State(Vector::Zero(1), z);
  CHECK(std::abs(m2_norm(x) - std::sqrt(1.0 / 3.0)) < 1e-5);

  std::mt19937_64 rng(1);
  const auto s = random_smooth_state(testing::scalar(2.0), 50, 4);
  const Complex alpha(-1.5, 0.7);
  CHECK(m2_norm(M2State(alpha * s.y, alpha * s.z)) == doctest::Approx(std::abs(alpha) * m2_norm(s)).epsilon(1e-14));
}

TEST_CASE("apply_generator examples") {
  const Complex a = 0.5;
  const Complex c = 1.3;
  const Complex z0(0.4, -2.0);
  const auto sys = testing::scalar(a, 0.0, c);
  const M2State x(Vector::Constant(1, z0 - a * z0), Matrix::Constant(1, 41, z0));
  const auto ax = apply_generator(sys, x);
  CHECK(std::abs(ax.y(0) - c * z0) < 1e-13);
  CHECK(ax.z.cwiseAbs().maxCoeff() == 0.0);

  const auto pure = testing::scalar(2.0);
  const auto ef = eigenfunction(pure, kLn2, 200);
  const auto r = apply_generator(pure, ef.as_state);
  CHECK(m2_norm(diff(r, M2State(kLn2 * ef.as_state.y, kLn2 * ef.as_state.z))) < 1e-12);

  M2State bad = x;
  bad.y(0) += 1.0;
  CHECK_THROWS_AS(apply_generator(sys, bad), DomainViolationError);
}

TEST_CASE("solve_generator examples") {
  const auto sys = testing::scalar(0.5, 0.0, 2.0);
  const M2State b(Vector::Constant(1, 4.0), Matrix::Zero(1, 21));
  const auto x = solve_generator(sys, b);
  CHECK(std::abs(x.y(0) - 1.0) < 1e-14);
  CHECK((x.z.array() - 2.0).abs().maxCoeff() < 1e-14);
  CHECK(m2_norm(diff(apply_generator(sys, x), b)) < 1e-13);

  CHECK_THROWS_AS(solve_generator(testing::scalar(2.0), b), ZeroInSpectrumError);
}

TEST_CASE("generator round trips on random systems") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 3; ++t) {
    const auto sys = random_system(rng, 2);
    const auto x0 = random_smooth_state(sys, 300, 100 + t);
    // solve(apply(x0)) recovers x0.
    const auto back = solve_generator(sys, apply_generator(sys, x0));
    CHECK(m2_norm(diff(back, x0)) < 1e-5 * m2_norm(x0));
    // smooth twice then apply twice. The intermediate A(A^-2 x0) meets the
    // domain condition only up to discretization error, so its y is re-derived
    // from the history before the second application.
    const auto s2 = smooth(sys, x0, 2);
    const auto a1 = apply_generator(sys, s2);
    CHECK(m2_norm(diff(a1, smooth(sys, x0, 1))) < 1e-5 * m2_norm(x0));
    CHECK(domain_defect(sys, a1) < 1e-5 * m2_norm(a1));
    const auto a2 = apply_generator(sys, make_valid_state(sys, a1.z));
    CHECK(m2_norm(diff(a2, x0)) < 1e-5 * m2_norm(x0));
  }
  const auto sys = random_system(rng, 2);
  const auto x0 = random_smooth_state(sys, 30, 5);
  CHECK(m2_norm(diff(smooth(sys, x0, 0), x0)) == 0.0);
  CHECK(m2_norm(diff(smooth(sys, x0, 1), solve_generator(sys, x0))) == 0.0);
}

TEST_CASE("round-trip error is second order in the grid") {
  std::mt19937_64 rng(13);
  const auto sys = random_system(rng, 2);
  std::vector<double> errs;
  for (int m : {100, 200, 400}) {
    const auto b = random_smooth_state(sys, m, 9);
    errs.push_back(m2_norm(diff(apply_generator(sys, solve_generator(sys, b)), b)) / m2_norm(b));
  }
  CHECK(std::log2(errs[0] / errs[1]) > 1.9);
  CHECK(std::log2(errs[1] / errs[2]) > 1.9);
}

TEST_CASE("eigenfunctions") {
  const auto ef = eigenfunction(testing::scalar(2.0), kLn2, 100);
  CHECK(std::abs(ef.c(0) - 1.0) < 1e-14);
  CHECK(std::abs(ef.as_state.y(0)) < 1e-14);
  CHECK(std::abs(ef.as_state.z(0, 100) - 1.0) < 1e-14);
  CHECK(std::abs(ef.as_state.z(0, 0) - 0.5) < 1e-14);
  CHECK_THROWS_AS(eigenfunction(testing::scalar(2.0), 1.0, 100), NotAnEigenvalueError);
  CHECK_THROWS_AS(eigenfunction(testing::pure(Matrix::Identity(2, 2) * 2.0), Complex(kLn2, 2 * kPi), 100),
                  MultipleKernelError);

  const auto sys = testing::scalar(2.0, 0.0, 1.0);
  const auto rep = scan_spectrum(sys, 10);
  for (const auto& rec : rep.discs) {
    for (const auto& r : rec.roots) {
      if (r.multiplicity != 1) continue;
      const auto e = eigenfunction(sys, r.lambda, 500);
      const auto ax = apply_generator(sys, e.as_state);
      const double res = m2_norm(diff(ax, M2State(r.lambda * e.as_state.y, r.lambda * e.as_state.z)));
      CHECK(res <= 1e-5 * m2_norm(e.as_state));
    }
  }
}

TEST_CASE("pure-neutral eigenfunctions for distinct k are far from parallel (exact value 0.216 for neighbours)") {
  const auto sys = testing::scalar(2.0);
  std::vector<M2State> fs;
  for (int k = -3; k <= 3; ++k) fs.push_back(eigenfunction(sys, Complex(kLn2, 2 * kPi * k), 400).as_state);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      Complex ip = fs[i].y.dot(fs[j].y);
      const int m = fs[i].m();
      for (int q = 0; q <= m; ++q) ip += ((q == 0 || q == m) ? 0.5 : 1.0) / m * fs[i].z.col(q).dot(fs[j].z.col(q));
      CHECK(std::abs(ip) / (m2_norm(fs[i]) * m2_norm(fs[j])) < 0.3);
    }
  }
}

TEST_CASE("state CSV round trip and resampling") {
  const auto sys = testing::pure(mat({{2.0, 1.0}, {0.0, 2.0}}));
  const auto x = random_smooth_state(sys, 20, 3);
  std::stringstream ss;
  write_state_csv(x, ss);
  const auto back = read_state_csv(ss, 2);
  CHECK(back.y == x.y);
  CHECK(back.z == x.z);

  std::stringstream bad("1,2\n3,4,5,6\n");
  CHECK_THROWS_AS(read_state_csv(bad, 2), DimensionError);

  // Cubic histories are reproduced exactly by degree-7 interpolation.
  const auto fine = random_smooth_state(sys, 160, 3);
  const auto r = resample(x, 160);
  CHECK((r.z - fine.z).cwiseAbs().maxCoeff() < 1e-13);
}
