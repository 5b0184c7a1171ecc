#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "nds/system.hpp"
#include "nds/types.hpp"

namespace nds {

/// Solution of the neutral system on the grid t_j = j h, h = 1/m, including the
/// initial history (j = -m..0). Column j + m of the matrices belongs to t_j.
/// Derivative jumps happen at integer times, so both one-sided derivatives are
/// kept.
struct Trajectory {
  int m = 0;
  int steps = 0;
  double h = 0.0;
  Matrix a_minus1;
  Matrix z;
  Matrix zdot_minus;
  Matrix zdot_plus;
  std::vector<double> norms;  // M2 norm of (y(t_j), z_{t_j}) for j = 0..steps

  double time(int j) const { return j * h; }
  M2State state_at(int j) const;
};

/// Method of steps with product-trapezoid quadrature and a P(EC)^2 E step.
/// x0 is re-sampled when its grid differs from m.
Trajectory simulate(const NeutralSystem& sys, const M2State& x0, double horizon, int m);

/// (t, |x(t)|) at grid times in [t_min, t_max] every `stride` steps.
std::vector<std::pair<double, double>> norm_samples(const Trajectory& traj, double t_min, double t_max, int stride);

/// t,norm every `stride` steps; with dump_z the history value z(t) follows.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out, int stride, bool dump_z);

}  // namespace nds
