#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace nds {

struct RunConfig {
  std::string command;  // spectrum, simulate, smooth, certify or appendix
  std::filesystem::path system_path;
  std::optional<std::filesystem::path> state_path;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  int k_max = 40;
  int m = 100;
  double horizon = 30.0;
  int n_smooth = 0;
  double slack = 0.3;
  std::optional<int> n;  // appendix: block size, all of 1..5 when absent
  int trials = 100000;
  bool dump_z = false;
  std::optional<int> stride;  // simulate: grid steps between rows, default one row per unit time
};

/// Exit codes: 0 success, 1 domain failure, 2 usage or input error.
int run(const RunConfig& config, std::ostream& err);

}  // namespace nds
