#pragma once

#include <cstdint>
#include <iosfwd>

#include "nds/system.hpp"
#include "nds/types.hpp"

namespace nds {

/// sqrt(|y|^2 + int |z|^2), the integral by the trapezoid rule on the grid.
double m2_norm(const M2State& x);

/// |y - (z(0) - A_{-1} z(-1))|, the defect in the domain condition.
double domain_defect(const NeutralSystem& sys, const M2State& x);

/// State with the given history and y chosen to satisfy the domain condition.
M2State make_valid_state(const NeutralSystem& sys, Matrix z);

/// Valid state whose history is a random cubic with N(0,1) complex
/// coefficients scaled by 1/d! (deterministic in seed).
M2State random_smooth_state(const NeutralSystem& sys, int m, std::uint64_t seed);

/// History re-sampled on a grid of resolution m by local degree-7
/// interpolation; y is kept.
M2State resample(const M2State& x, int m);

/// (int A2 z' + int A3 z, z'). Derivative by 8th-order finite differences,
/// integrals by product integration against the exact kernel.
/// Throws DomainViolationError when the domain condition fails by more than
/// 1e-8 * |x|.
M2State apply_generator(const NeutralSystem& sys, const M2State& x);

/// Solution x of A x = b. Throws ZeroInSpectrumError when int A3 is
/// numerically singular.
M2State solve_generator(const NeutralSystem& sys, const M2State& b);

/// n_times-fold solve_generator.
M2State smooth(const NeutralSystem& sys, const M2State& x, int n_times);

struct EigenFunction {
  Complex lambda;
  Vector c;
  M2State as_state;
};

/// Eigenfunction z = e^{lambda theta} c, y = (I - A_{-1} e^{-lambda}) c on a
/// grid of resolution m. Throws NotAnEigenvalueError or MultipleKernelError.
EigenFunction eigenfunction(const NeutralSystem& sys, Complex lambda, int m);

/// First row y, then m+1 rows of z samples; each row re,im pairs per component.
void write_state_csv(const M2State& x, std::ostream& out);
M2State read_state_csv(std::istream& in, int n);

}  // namespace nds
