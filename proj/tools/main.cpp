#include <CLI11.hpp>

#include <iostream>

#include "nds/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral and growth analysis for linear neutral delay systems"};
  app.require_subcommand(1);
  nds::RunConfig cfg;
  std::string state;
  int n = 0;
  int stride = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-o,--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  };
  auto with_system = [&](CLI::App* sub) {
    sub->add_option("system", cfg.system_path, "System description (JSON)")->required();
  };
  auto with_state = [&](CLI::App* sub) {
    sub->add_option("--state", state, "Initial state CSV; a seeded random smooth state otherwise");
    sub->add_option("--m", cfg.m, "Grid resolution on [-1, 0]")->capture_default_str();
  };

  auto* spectrum = app.add_subcommand("spectrum", "Locate characteristic roots disc by disc");
  with_system(spectrum);
  spectrum->add_option("--k-max", cfg.k_max, "Largest branch index |k|")->capture_default_str();
  common(spectrum);

  auto* simulate = app.add_subcommand("simulate", "Integrate the system from an initial state");
  with_system(simulate);
  with_state(simulate);
  simulate->add_option("--horizon", cfg.horizon, "Final time")->capture_default_str();
  simulate->add_option("--stride", stride, "Grid steps between output rows (default: one per unit time)");
  simulate->add_flag("--dump-z", cfg.dump_z, "Also write z(t) in every row");
  common(simulate);

  auto* smooth = app.add_subcommand("smooth", "Apply the inverse generator repeatedly");
  with_system(smooth);
  with_state(smooth);
  smooth->add_option("--n-smooth", cfg.n_smooth, "Number of applications")->capture_default_str();
  common(smooth);

  auto* certify = app.add_subcommand("certify", "Compare predicted and observed polynomial growth");
  with_system(certify);
  with_state(certify);
  certify->add_option("--k-max", cfg.k_max, "Largest branch index |k|")->capture_default_str();
  certify->add_option("--horizon", cfg.horizon, "Final time")->capture_default_str();
  certify->add_option("--n-smooth", cfg.n_smooth, "Smoothing order of the initial state")->capture_default_str();
  certify->add_option("--slack", cfg.slack, "Allowed excess of the observed exponent")->capture_default_str();
  common(certify);

  auto* appendix = app.add_subcommand("appendix", "Randomized checks of the Jordan block perturbation bounds");
  appendix->add_option("--n", n, "Block size (default: 1 to 5)");
  appendix->add_option("--trials", cfg.trials, "Trials per block size")->capture_default_str();
  common(appendix);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  if (!state.empty()) cfg.state_path = state;
  if (appendix->count("--n") > 0) cfg.n = n;
  if (simulate->count("--stride") > 0) cfg.stride = stride;
  return nds::run(cfg, std::cerr);
}
