#include "nds/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "nds/dde_solver.hpp"
#include "nds/errors.hpp"
#include "nds/state_ops.hpp"

namespace nds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFitError("least squares: abscissae do not vary");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss / syy : 1.0;
  f.rms = std::sqrt(ss / n);
  return f;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double estimate_omega(const SpectrumReport& report, const ModulusSpectrum& ms) {
  double omega = ms.omega_tilde;
  for (const auto& rec : report.discs)
    for (const auto& r : rec.roots) omega = std::max(omega, r.lambda.real());
  for (const auto& r : report.leftover) omega = std::max(omega, r.lambda.real());
  return omega;
}

SFit fit_power_law(const std::vector<std::pair<int, double>>& k_re, double omega) {
  std::vector<double> x, y;
  for (const auto& [k, re] : k_re) {
    const double gap = omega - re;
    if (k == 0 || gap <= 1e-14) continue;
    x.push_back(std::log(std::abs(static_cast<double>(k))));
    y.push_back(std::log(gap));
  }
  if (x.empty()) throw DegenerateFitError("fit_s: every root lies on the line Re = omega, s is undefined");
  if (x.size() < 8) {
    throw InsufficientDataError("fit_s: only " + std::to_string(x.size()) + " usable discs, need 8");
  }
  const auto f = least_squares(x, y);
  return {-f.slope, f.r2, static_cast<int>(x.size())};
}

SFit fit_s(const SpectrumReport& report, double omega, const ModulusSpectrum& ms, int k_min) {
  (void)ms;
  std::vector<std::pair<int, double>> pts;
  for (const auto& rec : report.discs) {
    if (rec.disc.group != 1 || std::abs(rec.disc.k) < k_min || rec.roots.empty()) continue;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& r : rec.roots) top = std::max(top, r.lambda.real());
    pts.emplace_back(rec.disc.k, top);
  }
  return fit_power_law(pts, omega);
}

double predicted_exponent(const ModulusSpectrum& ms, int n_smooth, double s) {
  if (n_smooth < 0) throw RangeError("predicted_exponent: n_smooth must be non-negative");
  if (n_smooth == 0) return ms.p - 1.0;
  if (!(s > 0.0)) throw PreconditionError("predicted_exponent: s must be positive");
  return ms.p - 1.0 - n_smooth / s;
}

ExponentFit empirical_exponent(const std::vector<std::pair<double, double>>& samples, double omega, double t0,
                               double t1) {
  if (t0 < 1.0) throw RangeError("empirical_exponent: window must start at t >= 1");
  std::vector<double> x, y;
  for (const auto& [t, v] : samples) {
    if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
    if (!(v > 0.0)) continue;
    x.push_back(std::log(t));
    y.push_back(std::log(v) - omega * t);
  }
  if (x.size() < 20) {
    throw InsufficientDataError("empirical_exponent: " + std::to_string(x.size()) +
                                " positive samples in the window, need 20");
  }
  const auto f = least_squares(x, y);
  return {f.slope, f.intercept, f.rms, static_cast<int>(x.size())};
}

std::string recompute_verdict(const GrowthCertificate& cert) {
  if (std::isnan(cert.beta_pred)) return "n/a";
  return cert.beta_emp <= cert.beta_pred + cert.slack ? "pass" : "fail";
}

GrowthCertificate certify(const NeutralSystem& sys, const M2State& x0, const CertifyOptions& opts) {
  require_valid(sys);
  if (opts.n_smooth < 0) throw RangeError("certify: n_smooth must be non-negative");
  if (!(opts.slack >= 0.0)) throw RangeError("certify: slack must be non-negative");
  const ModulusSpectrum ms = spectrum_of(sys);
  const SpectrumReport report = scan_spectrum(sys, ms, opts.k_max);

  GrowthCertificate cert;
  cert.p = ms.p;
  cert.p1 = ms.p1;
  cert.n_smooth = opts.n_smooth;
  cert.slack = opts.slack;
  cert.k_max = opts.k_max;
  cert.horizon = opts.horizon;
  cert.m = opts.m;
  cert.omega = estimate_omega(report, ms);

  cert.s_fit = kNaN;
  cert.r2 = kNaN;
  try {
    const auto f = fit_s(report, cert.omega, ms, opts.fit_k_min);
    cert.s_fit = f.s;
    cert.r2 = f.r2;
  } catch (const DegenerateFitError& e) {
    if (opts.n_smooth > 0) throw;
    cert.notes.push_back(std::string("no rate fit: ") + e.what());
  } catch (const InsufficientDataError& e) {
    if (opts.n_smooth > 0) throw;
    cert.notes.push_back(std::string("no rate fit: ") + e.what());
  }

  bool applicable = true;
  if (opts.n_smooth > 0) {
    if (!(cert.s_fit > 0.0)) {
      applicable = false;
      cert.notes.push_back("fitted s is not positive; the rate hypothesis fails");
    }
    for (const auto& rec : report.discs) {
      if (rec.disc.group != 1 || std::abs(rec.disc.k) <= report.n_threshold) continue;
      for (const auto& r : rec.roots) {
        if (r.lambda.real() >= cert.omega) {
          applicable = false;
          cert.notes.push_back("root " + fmt(r.lambda.real()) + (r.lambda.imag() < 0 ? "" : "+") +
                               fmt(r.lambda.imag()) + "i of the maximal chain reaches Re = omega");
        }
      }
    }
  }
  cert.beta_pred = applicable ? predicted_exponent(ms, opts.n_smooth, cert.s_fit) : kNaN;

  const M2State smoothed = smooth(sys, x0, opts.n_smooth);
  const Trajectory traj = simulate(sys, smoothed, opts.horizon, opts.m);
  const double t1 = opts.t1 > 0.0 ? opts.t1 : opts.horizon;
  const double t0 = opts.t0 > 0.0 ? opts.t0 : std::max(1.0, opts.horizon / 5.0);
  // Sample once per unit time (phase-locked to the delay) unless that leaves
  // fewer than 20 points in the window.
  int per_unit = 1;
  while (per_unit < opts.m && (std::floor(t1) - std::ceil(t0) + 1.0) * per_unit < 20.0) per_unit *= 2;
  const int stride = std::max(1, opts.m / per_unit);
  const auto samples = norm_samples(traj, t0, t1, stride);
  cert.beta_emp = empirical_exponent(samples, cert.omega, t0, t1).beta;
  cert.verdict = recompute_verdict(cert);
  return cert;
}

nlohmann::json certificate_to_json(const GrowthCertificate& cert) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  return nlohmann::json{{"omega", num(cert.omega)},       {"s_fit", num(cert.s_fit)},
                        {"r2", num(cert.r2)},             {"p", cert.p},
                        {"p1", cert.p1},                  {"n_smooth", cert.n_smooth},
                        {"beta_pred", num(cert.beta_pred)}, {"beta_emp", num(cert.beta_emp)},
                        {"slack", cert.slack},            {"verdict", cert.verdict},
                        {"k_max", cert.k_max},            {"horizon", cert.horizon},
                        {"m", cert.m}};
}

std::string certificate_text(const GrowthCertificate& cert) {
  std::ostringstream out;
  out << "growth certificate\n"
      << "  omega      " << fmt(cert.omega) << "\n"
      << "  s (fit)    " << fmt(cert.s_fit) << "  R^2 " << fmt(cert.r2) << "\n"
      << "  p, p1      " << cert.p << ", " << cert.p1 << "\n"
      << "  n_smooth   " << cert.n_smooth << "\n"
      << "  beta pred  " << fmt(cert.beta_pred) << "\n"
      << "  beta emp   " << fmt(cert.beta_emp) << "\n"
      << "  slack      " << fmt(cert.slack) << "\n"
      << "  k_max " << cert.k_max << ", horizon " << fmt(cert.horizon) << ", m " << cert.m << "\n"
      << "  verdict    " << cert.verdict << "\n";
  for (const auto& n : cert.notes) out << "  note: " << n << "\n";
  return out.str();
}

}  // namespace nds
