#include "nds/dde_solver.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "nds/errors.hpp"
#include "nds/grid_ops.hpp"
#include "nds/state_ops.hpp"

namespace nds {

M2State Trajectory::state_at(int j) const {
  const Eigen::Index c = j + m;
  Matrix window = z.middleCols(c - m, m + 1);
  Vector y = z.col(c) - a_minus1 * z.col(c - m);
  return {std::move(y), std::move(window)};
}

Trajectory simulate(const NeutralSystem& sys, const M2State& x0_in, double horizon, int m) {
  if (!(horizon >= 1.0)) throw RangeError("simulate: horizon must be at least 1");
  if (m < 50) throw RangeError("simulate: m must be at least 50");
  if (x0_in.n() != sys.n || x0_in.z.rows() != sys.n) throw DimensionError("simulate: state dimension mismatch");
  const M2State x0 = resample(x0_in, m);
  const double defect = domain_defect(sys, x0);
  if (defect > 1e-8 * std::max(1.0, m2_norm(x0))) {
    throw DomainViolationError("simulate: initial state violates y = z(0) - A_-1 z(-1) by " + std::to_string(defect));
  }

  const int n = sys.n;
  const int steps = static_cast<int>(std::llround(horizon * m));
  const double h = 1.0 / m;
  Trajectory tr;
  tr.m = m;
  tr.steps = steps;
  tr.h = h;
  tr.a_minus1 = sys.a_minus1;
  const Eigen::Index total = m + steps + 1;
  tr.z = Matrix::Zero(n, total);
  tr.zdot_minus = Matrix::Zero(n, total);
  tr.zdot_plus = Matrix::Zero(n, total);
  tr.z.leftCols(m + 1) = x0.z;
  const Matrix hist_dot = differentiate(x0.z, h);
  tr.zdot_minus.leftCols(m + 1) = hist_dot;
  tr.zdot_plus.leftCols(m + 1) = hist_dot;

  const bool has_a2 = !sys.a2.is_zero();
  const bool has_a3 = !sys.a3.is_zero();
  SplitTrapezoidWeights w2{Matrix::Zero(n, n * (m + 1)), Matrix::Zero(n, n * (m + 1))};
  Matrix w3 = Matrix::Zero(n, n * (m + 1));
  if (has_a2) w2 = trapezoid_weights(sys.a2, m);
  if (has_a3) w3 = product_weights(sys.a3, m, 2);
  const Matrix u_last = weight_block(w2.upper, m);
  const Matrix w3_last = weight_block(w3, m);

  const Matrix implicit = Matrix::Identity(n, n) - u_last;
  {
    Eigen::JacobiSVD<Matrix> svd(implicit);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) <= 1e-12 * (1.0 + u_last.norm())) {
      throw SingularImplicitError("simulate: I - (h/2) A2(0) is singular at m = " + std::to_string(m) +
                                  "; refine the grid");
    }
  }
  const auto solver = implicit.partialPivLu();

  // Right limit at t = 0 from the history alone.
  {
    Vector rhs = sys.a_minus1 * hist_dot.col(0);
    if (has_a2) rhs += apply_block_row(w2.lower + w2.upper, hist_dot);
    if (has_a3) rhs += apply_block_row(w3, x0.z);
    tr.zdot_plus.col(m) = rhs;
  }

  tr.norms.reserve(static_cast<std::size_t>(steps) + 1);
  tr.norms.push_back(m2_norm(x0));
  for (int j = 0; j < steps; ++j) {
    const Eigen::Index first = j + 1;  // window for t_{j+1} starts at t_{j+1-m}
    const Eigen::Index cur = j + m;
    const Eigen::Index next = cur + 1;
    // Everything in the quadrature except the unknowns at the new node.
    tr.z.col(next).setZero();
    tr.zdot_minus.col(next).setZero();
    tr.zdot_plus.col(next).setZero();
    Vector known = sys.a_minus1 * tr.zdot_minus.col(first);
    if (has_a2) {
      known += apply_block_row(w2.lower, tr.zdot_plus, first);
      known += apply_block_row(w2.upper, tr.zdot_minus, first);
    }
    if (has_a3) known += apply_block_row(w3, tr.z, first);

    auto evaluate = [&](const Vector& z_next) -> Vector {
      if (!has_a3) return solver.solve(known);
      return solver.solve(known + w3_last * z_next);
    };
    Vector z_next = tr.z.col(cur) + h * tr.zdot_plus.col(cur);
    Vector zd_next;
    for (int pass = 0; pass < 2; ++pass) {
      zd_next = evaluate(z_next);
      z_next = tr.z.col(cur) + 0.5 * h * (tr.zdot_plus.col(cur) + zd_next);
    }
    zd_next = evaluate(z_next);
    tr.z.col(next) = z_next;
    tr.zdot_minus.col(next) = zd_next;
    tr.zdot_plus.col(next) = zd_next + sys.a_minus1 * (tr.zdot_plus.col(first) - tr.zdot_minus.col(first));
    tr.norms.push_back(m2_norm(tr.state_at(j + 1)));
  }
  return tr;
}

std::vector<std::pair<double, double>> norm_samples(const Trajectory& traj, double t_min, double t_max, int stride) {
  if (t_min < 1.0) throw RangeError("norm_samples: t_min must be at least 1");
  if (stride < 1) throw RangeError("norm_samples: stride must be positive");
  const auto j0 = static_cast<long long>(std::ceil(t_min * traj.m - 1e-9));
  const auto j1 = std::min<long long>(static_cast<long long>(std::floor(t_max * traj.m + 1e-9)), traj.steps);
  const long long count = j1 - j0 + 1;
  if (count <= 0) throw RangeError("norm_samples: empty time range");
  if (count > 1 && stride > count) throw RangeError("norm_samples: stride exceeds the number of grid points in range");
  std::vector<std::pair<double, double>> out;
  for (long long j = j0; j <= j1; j += stride) {
    out.emplace_back(traj.time(static_cast<int>(j)), traj.norms[static_cast<std::size_t>(j)]);
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out, int stride, bool dump_z) {
  if (stride < 1) throw RangeError("trajectory CSV: stride must be positive");
  const auto n = traj.z.rows();
  out << "t,norm";
  if (dump_z) {
    for (Eigen::Index i = 0; i < n; ++i) out << ",z" << i << "_re,z" << i << "_im";
  }
  out << '\n';
  char buf[64];
  for (int j = 0; j <= traj.steps; j += stride) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", traj.time(j), traj.norms[static_cast<std::size_t>(j)]);
    out << buf;
    if (dump_z) {
      const auto col = traj.z.col(j + traj.m);
      for (Eigen::Index i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", col(i).real(), col(i).imag());
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace nds
