#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <sstream>

#include "helpers.hpp"
#include "nds/cli.hpp"
#include "nds/system.hpp"

using namespace nds;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "nds_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const fs::path& p) {
  const auto text = slurp(p);
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("spectrum command writes one row per disc") {
  const auto dir = scratch("spectrum");
  save_system(testing::scalar(2.0), dir / "sys.json");
  RunConfig cfg;
  cfg.command = "spectrum";
  cfg.system_path = dir / "sys.json";
  cfg.k_max = 10;
  cfg.out_dir = dir / "out";
  std::ostringstream err;
  REQUIRE(run(cfg, err) == 0);
  // header, origin disc, 21 branch discs
  CHECK(count_lines(dir / "out" / "spectrum.csv") == 23);
  CHECK(count_lines(dir / "out" / "leftover.csv") == 1);
  CHECK(err.str().empty());
}

TEST_CASE("error paths exit nonzero without leaving outputs") {
  const auto dir = scratch("errors");
  std::ostringstream err;
  RunConfig cfg;
  cfg.out_dir = dir / "out";

  cfg.command = "spectrum";
  cfg.system_path = dir / "missing.json";
  CHECK(run(cfg, err) == 2);

  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"n\": 2, \"a_minus1\": [[1]]";
  }
  cfg.system_path = dir / "bad.json";
  CHECK(run(cfg, err) == 2);

  cfg.command = "frobnicate";
  CHECK(run(cfg, err) == 2);

  // zero in the spectrum: A3 vanishes, so the generator is not invertible
  save_system(testing::scalar(2.0), dir / "sys.json");
  cfg.command = "smooth";
  cfg.system_path = dir / "sys.json";
  cfg.n_smooth = 1;
  CHECK(run(cfg, err) == 1);

  cfg.command = "simulate";
  cfg.m = 10;
  CHECK(run(cfg, err) == 2);

  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK(err.str().find("error:") != std::string::npos);
}

TEST_CASE("state file round trip through smooth and simulate") {
  const auto dir = scratch("state");
  save_system(testing::scalar(0.5, 0.0, -0.5), dir / "sys.json");
  std::ostringstream err;
  RunConfig cfg;
  cfg.command = "smooth";
  cfg.system_path = dir / "sys.json";
  cfg.n_smooth = 1;
  cfg.seed = 5;
  cfg.out_dir = dir / "smoothed";
  REQUIRE(run(cfg, err) == 0);
  CHECK(count_lines(dir / "smoothed" / "state.csv") == 102);

  cfg.command = "simulate";
  cfg.state_path = dir / "smoothed" / "state.csv";
  cfg.horizon = 4.0;
  cfg.dump_z = true;
  cfg.out_dir = dir / "traj";
  REQUIRE(run(cfg, err) == 0);
  const auto text = slurp(dir / "traj" / "trajectory.csv");
  CHECK(text.rfind("t,norm,z0_re,z0_im\n", 0) == 0);
  CHECK(count_lines(dir / "traj" / "trajectory.csv") == 6);

  std::ofstream(dir / "short.csv") << "1,2\n";
  cfg.state_path = dir / "short.csv";
  cfg.out_dir = dir / "never";
  CHECK(run(cfg, err) == 2);
  CHECK_FALSE(fs::exists(dir / "never"));
}

TEST_CASE("certify writes the certificate schema") {
  const auto dir = scratch("certify");
  save_system(testing::scalar(0.5, 0.0, -0.5), dir / "sys.json");
  std::ostringstream err;
  RunConfig cfg;
  cfg.command = "certify";
  cfg.system_path = dir / "sys.json";
  cfg.k_max = 10;
  cfg.horizon = 10.0;
  cfg.out_dir = dir / "out";
  REQUIRE(run(cfg, err) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "certificate.json"));
  for (const char* key : {"omega", "s_fit", "r2", "p", "p1", "n_smooth", "beta_pred", "beta_emp", "slack", "verdict",
                          "k_max", "horizon", "m"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.size() == 13);
  CHECK(fs::exists(dir / "out" / "certificate.txt"));
}

TEST_CASE("appendix output is byte-identical across runs") {
  const auto dir = scratch("appendix");
  std::ostringstream err;
  RunConfig cfg;
  cfg.command = "appendix";
  cfg.n = 2;
  cfg.trials = 5000;
  cfg.seed = 7;
  cfg.out_dir = dir / "a";
  REQUIRE(run(cfg, err) == 0);
  cfg.out_dir = dir / "b";
  REQUIRE(run(cfg, err) == 0);
  CHECK(slurp(dir / "a" / "appendix.csv") == slurp(dir / "b" / "appendix.csv"));
  CHECK(slurp(dir / "a" / "appendix_scaling.csv") == slurp(dir / "b" / "appendix_scaling.csv"));
  CHECK(count_lines(dir / "a" / "appendix.csv") == 4);

  cfg.trials = 10;
  cfg.out_dir = dir / "c";
  CHECK(run(cfg, err) == 2);
}
