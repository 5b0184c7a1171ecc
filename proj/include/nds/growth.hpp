#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nds/characteristic.hpp"
#include "nds/matrix_spectral.hpp"
#include "nds/system.hpp"

namespace nds {

/// max(omega_tilde, largest real part among the refined roots, leftovers included).
double estimate_omega(const SpectrumReport& report, const ModulusSpectrum& ms);

struct SFit {
  double s = 0.0;
  double r2 = 0.0;
  int used = 0;
};

/// Power-law fit of omega - Re(lambda) against |k| for points (k, Re lambda):
/// log gap = -s log|k| + c. Points with gap <= 1e-14 are dropped.
/// DegenerateFitError if nothing is left, InsufficientDataError below 8 points.
SFit fit_power_law(const std::vector<std::pair<int, double>>& k_re, double omega);

/// fit_power_law over the discs of the first group with |k| >= k_min, taking
/// the right-most root of each disc.
SFit fit_s(const SpectrumReport& report, double omega, const ModulusSpectrum& ms, int k_min = 1);

/// p - 1 - n_smooth / s; p - 1 when n_smooth = 0.
double predicted_exponent(const ModulusSpectrum& ms, int n_smooth, double s);

struct ExponentFit {
  double beta = 0.0;
  double c = 0.0;
  double residual = 0.0;
  int samples = 0;
};

/// Least squares of log|x(t)| - omega t = beta log t + c over t in [t0, t1].
ExponentFit empirical_exponent(const std::vector<std::pair<double, double>>& samples, double omega, double t0,
                               double t1);

struct CertifyOptions {
  int n_smooth = 0;
  int k_max = 40;
  double horizon = 30.0;
  double slack = 0.3;
  int m = 100;
  int fit_k_min = 8;
  double t0 = -1.0;  // negative: max(1, horizon / 5)
  double t1 = -1.0;  // negative: horizon
};

struct GrowthCertificate {
  double omega = 0.0;
  double s_fit = 0.0;  // NaN when no fit was possible
  double r2 = 0.0;
  int p = 0;
  int p1 = 0;
  int n_smooth = 0;
  double beta_pred = 0.0;  // NaN when the theorem does not apply
  double beta_emp = 0.0;
  double slack = 0.0;
  std::string verdict;  // "pass", "fail" or "n/a"
  int k_max = 0;
  double horizon = 0.0;
  int m = 0;
  std::vector<std::string> notes;
};

GrowthCertificate certify(const NeutralSystem& sys, const M2State& x0, const CertifyOptions& opts);

/// Verdict from the stored fields alone.
std::string recompute_verdict(const GrowthCertificate& cert);

nlohmann::json certificate_to_json(const GrowthCertificate& cert);
std::string certificate_text(const GrowthCertificate& cert);

}  // namespace nds
