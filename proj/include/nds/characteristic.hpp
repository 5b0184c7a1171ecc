#pragma once

#include <iosfwd>
#include <vector>

#include "nds/matrix_spectral.hpp"
#include "nds/system.hpp"
#include "nds/types.hpp"

namespace nds {

/// int_{-1}^0 theta^extra_power * e^{lambda theta} * kern(theta) dtheta, exact
/// per polynomial piece. extra_power = 1 gives the lambda-derivative.
Matrix kernel_laplace(const PiecewisePolyKernel& kern, Complex lambda, int extra_power = 0);

/// Delta(lambda) = lambda I - lambda e^{-lambda} A_{-1} - lambda L2(lambda) - L3(lambda)
Matrix char_matrix(const NeutralSystem& sys, Complex lambda);
Matrix char_matrix_derivative(const NeutralSystem& sys, Complex lambda);

Complex char_det(const NeutralSystem& sys, Complex lambda);

/// d/dlambda log det Delta = tr(Delta^{-1} Delta').
Complex log_det_derivative(const NeutralSystem& sys, Complex lambda);

/// Magnitude of the individual terms of Delta(lambda); a scale against which
/// "numerically zero" is judged.
double char_scale(const NeutralSystem& sys, Complex lambda);

struct DiscSpec {
  int group = 0;  // 0 is the disc around the origin, groups count from 1
  int k = 0;
  Complex center;
  double radius = 1.0;
};

/// Centers ln|mu| + i(arg mu + 2 k pi) for every group and k in [k_lo, k_hi],
/// plus the origin disc when with_origin is set. Radii are
/// min(1, half the distance to the nearest other center).
std::vector<DiscSpec> approx_spectrum(const ModulusSpectrum& ms, int k_lo, int k_hi, bool with_origin = true);

/// Winding number of det Delta around the disc boundary.
/// Throws ContourError when det Delta nearly vanishes on the circle.
int count_roots(const NeutralSystem& sys, const DiscSpec& disc);

struct Root {
  Complex lambda;
  int multiplicity = 1;
};

/// Roots inside the disc (multiplicities summing to count) from contour
/// moments, simple roots Newton-polished on det Delta.
std::vector<Root> refine_roots(const NeutralSystem& sys, const DiscSpec& disc, int count);

struct DiscRecord {
  DiscSpec disc;
  int expected = 0;
  int count = 0;
  std::vector<Root> roots;
};

struct SpectrumReport {
  std::vector<DiscRecord> discs;  // ordered by (group, k)
  std::vector<Root> leftover;
  int k_max = 0;
  int n_threshold = 0;  // every group disc with |k| > n_threshold matched its multiplicity
};

SpectrumReport scan_spectrum(const NeutralSystem& sys, int k_max);
SpectrumReport scan_spectrum(const NeutralSystem& sys, const ModulusSpectrum& ms, int k_max);

void write_spectrum_csv(const SpectrumReport& report, std::ostream& out);
void write_leftover_csv(const SpectrumReport& report, std::ostream& out);

}  // namespace nds
