#include "nds/cli.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "nds/characteristic.hpp"
#include "nds/dde_solver.hpp"
#include "nds/errors.hpp"
#include "nds/growth.hpp"
#include "nds/jordan_perturb.hpp"
#include "nds/state_ops.hpp"
#include "nds/system.hpp"

namespace nds {

namespace {

// Outputs are rendered in memory and only touch the filesystem once the whole
// command has succeeded.
using Outputs = std::map<std::string, std::string>;

void commit(const std::filesystem::path& dir, const Outputs& files) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged;
  try {
    for (const auto& [name, body] : files) {
      const auto tmp = dir / ("." + name + ".tmp");
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      f << body;
      f.close();
      if (!f) throw Error("cannot write " + tmp.string());
      staged.emplace_back(tmp, dir / name);
    }
  } catch (...) {
    for (const auto& s : staged) std::filesystem::remove(s.first);
    throw;
  }
  for (const auto& [tmp, final_path] : staged) std::filesystem::rename(tmp, final_path);
}

void check_config(const RunConfig& c) {
  if (c.k_max < 0) throw UsageError("--k-max must be non-negative");
  if (c.m < 50) throw UsageError("--m must be at least 50");
  if (!(c.horizon >= 1.0)) throw UsageError("--horizon must be at least 1");
  if (c.n_smooth < 0) throw UsageError("--n-smooth must be non-negative");
  if (!(c.slack >= 0.0)) throw UsageError("--slack must be non-negative");
  if (c.trials < 1000) throw UsageError("--trials must be at least 1000");
  if (c.n && (*c.n < 1 || *c.n > 6)) throw UsageError("--n must be in 1..6");
  if (c.stride && *c.stride < 1) throw UsageError("--stride must be positive");
}

M2State initial_state(const RunConfig& c, const NeutralSystem& sys) {
  if (!c.state_path) return random_smooth_state(sys, c.m, c.seed);
  std::ifstream in(*c.state_path);
  if (!in) throw ParseError("cannot open state file " + c.state_path->string());
  return read_state_csv(in, sys.n);
}

Outputs run_spectrum(const RunConfig& c) {
  const auto sys = load_system(c.system_path);
  const auto report = scan_spectrum(sys, c.k_max);
  std::ostringstream spec, left;
  write_spectrum_csv(report, spec);
  write_leftover_csv(report, left);
  return {{"spectrum.csv", spec.str()}, {"leftover.csv", left.str()}};
}

Outputs run_simulate(const RunConfig& c) {
  const auto sys = load_system(c.system_path);
  const auto traj = simulate(sys, initial_state(c, sys), c.horizon, c.m);
  std::ostringstream out;
  write_trajectory_csv(traj, out, c.stride.value_or(c.m), c.dump_z);
  return {{"trajectory.csv", out.str()}};
}

Outputs run_smooth(const RunConfig& c) {
  const auto sys = load_system(c.system_path);
  const auto y = smooth(sys, initial_state(c, sys), c.n_smooth);
  std::ostringstream out;
  write_state_csv(y, out);
  return {{"state.csv", out.str()}};
}

Outputs run_certify(const RunConfig& c) {
  const auto sys = load_system(c.system_path);
  CertifyOptions opts;
  opts.n_smooth = c.n_smooth;
  opts.k_max = c.k_max;
  opts.horizon = c.horizon;
  opts.slack = c.slack;
  opts.m = c.m;
  const auto cert = certify(sys, initial_state(c, sys), opts);
  return {{"certificate.json", certificate_to_json(cert).dump(2) + "\n"},
          {"certificate.txt", certificate_text(cert)}};
}

Outputs run_appendix_cmd(const RunConfig& c) {
  std::ostringstream rows, scaling;
  bool first = true;
  const int lo = c.n.value_or(1);
  const int hi = c.n.value_or(5);
  for (int n = lo; n <= hi; ++n) {
    const auto rep = run_appendix(n, c.trials, c.seed);
    std::ostringstream r, s;
    write_appendix_csv(rep, r);
    write_scaling_csv(rep, s);
    // Keep a single header when several block sizes are concatenated.
    auto body = [&](const std::string& text) { return first ? text : text.substr(text.find('\n') + 1); };
    rows << body(r.str());
    scaling << body(s.str());
    first = false;
  }
  return {{"appendix.csv", rows.str()}, {"appendix_scaling.csv", scaling.str()}};
}

}  // namespace

int run(const RunConfig& config, std::ostream& err) {
  try {
    check_config(config);
    Outputs files;
    if (config.command == "spectrum") {
      files = run_spectrum(config);
    } else if (config.command == "simulate") {
      files = run_simulate(config);
    } else if (config.command == "smooth") {
      files = run_smooth(config);
    } else if (config.command == "certify") {
      files = run_certify(config);
    } else if (config.command == "appendix") {
      files = run_appendix_cmd(config);
    } else {
      throw UsageError("unknown command '" + config.command + "'");
    }
    commit(config.out_dir, files);
    return 0;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nds
