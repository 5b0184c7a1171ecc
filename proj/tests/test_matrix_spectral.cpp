#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "nds/errors.hpp"
#include "nds/matrix_spectral.hpp"

using namespace nds;
using testing::mat;

TEST_CASE("diagonal, Jordan and identity structures") {
  auto ms = analyze(mat({{2.0, 0.0}, {0.0, 0.5}}));
  REQUIRE(ms.groups.size() == 2);
  CHECK(ms.groups[0].mu.real() == doctest::Approx(2.0));
  CHECK(ms.groups[0].block_sizes == std::vector<int>{1});
  CHECK(ms.groups[1].mu.real() == doctest::Approx(0.5));
  CHECK(ms.omega_tilde == doctest::Approx(std::log(2.0)));
  CHECK(ms.p == 1);
  CHECK(ms.ell == 2);

  ms = analyze(mat({{2.0, 1.0}, {0.0, 2.0}}));
  REQUIRE(ms.groups.size() == 1);
  CHECK(ms.groups[0].multiplicity == 2);
  CHECK(ms.groups[0].block_sizes == std::vector<int>{2});
  CHECK(ms.p == 2);
  CHECK(ms.p1 == 2);

  ms = analyze(Matrix::Identity(3, 3));
  REQUIRE(ms.groups.size() == 1);
  CHECK(ms.groups[0].block_sizes == std::vector<int>{1, 1, 1});
  CHECK(ms.omega_tilde == doctest::Approx(0.0));
  CHECK(ms.p == 3);
  CHECK(ms.p1 == 1);
}

TEST_CASE("equal moduli order by multiplicity, p sums them") {
  // eigenvalues 2 (simple) and -2 (Jordan block of size 2)
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = -2.0;
  a(2, 2) = -2.0;
  a(1, 2) = 1.0;
  const auto ms = analyze(a);
  REQUIRE(ms.groups.size() == 2);
  CHECK(ms.groups[0].mu.real() == doctest::Approx(-2.0));
  CHECK(ms.groups[0].multiplicity == 2);
  CHECK(ms.p == 3);
  CHECK(ms.p1 == 2);
}

TEST_CASE("similarity recovers block sizes of a known Jordan form") {
  std::mt19937_64 rng(5);
  DeclaredStructure ds;
  ds.blocks = {{Complex(3.0, 1.0), 3}, {Complex(3.0, 1.0), 1}, {Complex(-1.5, 0.0), 2}};
  int tried = 0;
  while (tried < 10) {
    Matrix s = testing::random_matrix(6, rng);
    Eigen::JacobiSVD<Matrix> svd(s);
    const double cond = svd.singularValues()(0) / svd.singularValues()(5);
    if (cond > 1e3) continue;
    ++tried;
    ds.similarity = s;
    const auto ms = analyze(ds.assemble(), 1e-6);
    const auto ref = from_declared(ds);
    REQUIRE(ms.groups.size() == ref.groups.size());
    for (std::size_t g = 0; g < ms.groups.size(); ++g) {
      CHECK(ms.groups[g].block_sizes == ref.groups[g].block_sizes);
      CHECK(std::abs(ms.groups[g].mu - ref.groups[g].mu) < 1e-4);
    }
  }
}

TEST_CASE("multiplicities add up to n under permutation similarity") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = testing::random_matrix(5, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 5, rng);
    const Matrix b = perm * a * perm.transpose();
    const auto ma = analyze(a);
    const auto mb = analyze(b);
    int total = 0;
    for (const auto& g : ma.groups) total += g.multiplicity;
    CHECK(total == 5);
    REQUIRE(ma.groups.size() == mb.groups.size());
    for (std::size_t g = 0; g < ma.groups.size(); ++g) {
      CHECK(std::abs(ma.groups[g].mu) == doctest::Approx(std::abs(mb.groups[g].mu)).epsilon(1e-9));
    }
  }
}

TEST_CASE("ambiguous rank is reported") {
  // Two eigenvalues merged by the clustering whose split is comparable to the
  // rank threshold: the structure is not decidable at this tolerance.
  Matrix a = mat({{2.0, 0.0}, {0.0, 2.0 + 1.5e-8}});
  CHECK_THROWS_AS(analyze(a, 1e-8), RankAmbiguityError);
}
