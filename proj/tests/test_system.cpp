#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "nds/errors.hpp"
#include "nds/system.hpp"

using namespace nds;
using testing::mat;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("nds_test_" + name);
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("validate accepts the scalar system and reports violations") {
  CHECK(validate(testing::scalar(2.0)).empty());
  CHECK(mentions(validate(testing::scalar(0.0)), "A_-1 singular"));

  auto sys = testing::scalar(2.0);
  sys.a2.breakpoints = {-1.0, -0.5, -0.7, 0.0};
  sys.a2.pieces = {{mat({{1.0}})}, {mat({{1.0}})}, {mat({{1.0}})}};
  CHECK(mentions(validate(sys), "breakpoints not increasing"));

  sys = testing::scalar(2.0);
  sys.a3.pieces[0] = {mat({{1.0}}), mat({{1.0}}), mat({{1.0}}), mat({{1.0}}), mat({{1.0}})};
  CHECK(mentions(validate(sys), "1..4 coefficients"));
  CHECK_THROWS_AS(require_valid(sys), PreconditionError);
}

TEST_CASE("kernel evaluation and integral") {
  PiecewisePolyKernel k;
  k.breakpoints = {-1.0, -0.5, 0.0};
  k.pieces = {{mat({{1.0}}), mat({{2.0}})}, {mat({{3.0}})}};
  CHECK(k.eval(-0.75)(0, 0).real() == doctest::Approx(1.0 - 1.5));
  CHECK(k.eval(-0.5)(0, 0).real() == doctest::Approx(3.0));
  CHECK(k.eval(0.0)(0, 0).real() == doctest::Approx(3.0));
  // int_{-1}^{-0.5} (1 + 2t) + int_{-0.5}^0 3 = (0.5 - 0.75) + 1.5
  CHECK(k.integral()(0, 0).real() == doctest::Approx(1.25));
  CHECK(k.max_degree() == 1);
}

TEST_CASE("save/load round trip is exact") {
  std::mt19937_64 rng(11);
  NeutralSystem sys;
  sys.n = 2;
  sys.a_minus1 = testing::random_matrix(2, rng);
  sys.a2 = testing::random_kernel(2, rng, 0.3);
  sys.a3 = testing::random_kernel(2, rng, 0.7, -0.123456789012345);
  const auto path = temp_file("roundtrip.json");
  save_system(sys, path);
  CHECK(load_system(path) == sys);

  const auto s1 = testing::scalar(2.0);
  save_system(s1, path);
  CHECK(load_system(path) == s1);
  std::filesystem::remove(path);
}

TEST_CASE("declared Jordan structure assembles A_-1") {
  const auto j = nlohmann::json::parse(R"({
    "n": 2,
    "jordan": {"blocks": [{"mu": {"re": 2, "im": 0}, "size": 2}],
               "similarity": [[{"re":1,"im":0},{"re":0,"im":0}],[{"re":0,"im":0},{"re":1,"im":0}]]},
    "a2": {"breakpoints": [-1, 0], "pieces": [[[[{"re":0,"im":0},{"re":0,"im":0}],[{"re":0,"im":0},{"re":0,"im":0}]]]]},
    "a3": {"breakpoints": [-1, 0], "pieces": [[[[{"re":0,"im":0},{"re":0,"im":0}],[{"re":0,"im":0},{"re":0,"im":0}]]]]}
  })");
  const auto sys = system_from_json(j);
  CHECK(sys.a_minus1.isApprox(mat({{2.0, 1.0}, {0.0, 2.0}})));
  CHECK(validate(sys).empty());
  CHECK(system_from_json(system_to_json(sys)) == sys);
}

TEST_CASE("schema errors name the field and dimension errors are typed") {
  const auto path = temp_file("broken.json");
  {
    std::ofstream out(path);
    out << R"({"n": 1, "a2": {"breakpoints": [-1, 0], "pieces": [[[[{"re":0,"im":0}]]]]},
              "a3": {"breakpoints": [-1, 0], "pieces": [[[[{"re":0,"im":0}]]]]}})";
  }
  try {
    load_system(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("a_minus1") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << R"({"n": 1, "a_minus1": [[{"re":2,"im":0}]],
              "a2": {"breakpoints": [-1, 0], "pieces": [[[[{"re":0,"im":0},{"re":0,"im":0}],[{"re":0,"im":0},{"re":0,"im":0}]]]]},
              "a3": {"breakpoints": [-1, 0], "pieces": [[[[{"re":0,"im":0}]]]]}})";
  }
  CHECK_THROWS_AS(load_system(path), DimensionError);

  {
    std::ofstream out(path);
    out << "{\"n\": 1,\n  \"a_minus1\": [[{\"re\": 2 \"im\": 0}]]}";
  }
  try {
    load_system(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("kernel equality is shape-safe") {
  const auto a = PiecewisePolyKernel::constant(mat({{1.0}}));
  const auto b = PiecewisePolyKernel::constant(Matrix::Zero(2, 2));
  CHECK_FALSE(a == b);
  CHECK(a == PiecewisePolyKernel::constant(mat({{1.0}})));
}
