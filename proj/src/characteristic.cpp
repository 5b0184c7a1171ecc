#include "nds/characteristic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>

#include "nds/errors.hpp"

namespace nds {

namespace {

// Below this modulus the by-parts recursion divides by a small lambda and
// amplifies rounding like (j/|lambda|)^j, so the power series takes over.
constexpr double kSeriesRadius = 1.0;
constexpr int kSeriesTerms = 28;

// int_a^b theta^j e^{lambda theta} dtheta for j = 0..jmax.
std::vector<Complex> exp_moments(double a, double b, Complex lambda, int jmax) {
  std::vector<Complex> out(static_cast<std::size_t>(jmax) + 1);
  if (std::abs(lambda) < kSeriesRadius) {
    for (int j = 0; j <= jmax; ++j) {
      Complex sum = 0.0;
      Complex lp = 1.0;  // lambda^r / r!
      for (int r = 0; r < kSeriesTerms; ++r) {
        const int e = j + r + 1;
        sum += lp * ((std::pow(b, e) - std::pow(a, e)) / e);
        lp *= lambda / static_cast<double>(r + 1);
      }
      out[static_cast<std::size_t>(j)] = sum;
    }
    return out;
  }
  const Complex ea = std::exp(lambda * a);
  const Complex eb = std::exp(lambda * b);
  out[0] = (eb - ea) / lambda;
  double aj = 1.0;
  double bj = 1.0;
  for (int j = 1; j <= jmax; ++j) {
    aj *= a;
    bj *= b;
    out[static_cast<std::size_t>(j)] = (bj * eb - aj * ea - static_cast<double>(j) * out[static_cast<std::size_t>(j) - 1]) / lambda;
  }
  return out;
}

double op_norm_bound(const Matrix& m) { return m.norm(); }

struct ContourSamples {
  std::vector<Complex> det;  // det Delta at c + r e^{2 pi i j / N}
  int winding = 0;
};

Complex on_circle(const DiscSpec& d, std::size_t j, std::size_t n) {
  const double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
  return d.center + d.radius * Complex(std::cos(phi), std::sin(phi));
}

// Adaptive phase tracking: double the sample count until every phase step is
// below pi/4 and the winding number has been the same for three consecutive
// resolutions.
ContourSamples winding(const NeutralSystem& sys, const DiscSpec& disc) {
  constexpr std::size_t kStart = 64;
  constexpr std::size_t kCap = std::size_t{1} << 16;
  std::vector<Complex> vals(kStart);
  for (std::size_t j = 0; j < kStart; ++j) vals[j] = char_det(sys, on_circle(disc, j, kStart));

  int prev = std::numeric_limits<int>::min();
  int stable = 0;
  while (true) {
    const std::size_t n = vals.size();
    double vmax = 0.0;
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& v : vals) {
      vmax = std::max(vmax, std::abs(v));
      vmin = std::min(vmin, std::abs(v));
    }
    if (!(vmax > 0.0) || !std::isfinite(vmax) || vmin < 1e-12 * vmax) {
      throw ContourError("det Delta nearly vanishes on the circle |lambda - (" +
                         std::to_string(disc.center.real()) + "," + std::to_string(disc.center.imag()) +
                         ")| = " + std::to_string(disc.radius));
    }
    double total = 0.0;
    bool fine = true;
    for (std::size_t j = 0; j < n; ++j) {
      const double step = std::arg(vals[(j + 1) % n] / vals[j]);
      if (std::abs(step) >= kPi / 4) fine = false;
      total += step;
    }
    const int w = static_cast<int>(std::lround(total / (2.0 * kPi)));
    if (fine) {
      stable = (w == prev) ? stable + 1 : 1;
      prev = w;
      if (stable >= 3) return {std::move(vals), w};
    }
    if (2 * n > kCap) {
      throw ContourError("phase tracking did not settle on the circle around (" +
                         std::to_string(disc.center.real()) + "," + std::to_string(disc.center.imag()) + ")");
    }
    std::vector<Complex> next(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      next[2 * j] = vals[j];
      next[2 * j + 1] = char_det(sys, on_circle(disc, 2 * j + 1, 2 * n));
    }
    vals = std::move(next);
  }
}

int count_with_retries(const NeutralSystem& sys, DiscSpec& disc) {
  const double base = disc.radius;
  const double factors[] = {1.0, 0.9, 1.1, 1.25};
  for (std::size_t i = 0; i < std::size(factors); ++i) {
    disc.radius = base * factors[i];
    try {
      return winding(sys, disc).winding;
    } catch (const ContourError&) {
      if (i + 1 == std::size(factors)) throw;
    }
  }
  return 0;  // unreachable
}

bool inside(const DiscSpec& d, Complex z) { return std::abs(z - d.center) < d.radius; }

// Size of det Delta near lambda if no cancellation took place. The derivative
// term keeps it meaningful at lambda = 0, where every term of Delta can vanish.
double det_scale(const NeutralSystem& sys, Complex lambda) {
  const double local = char_scale(sys, lambda) + char_matrix_derivative(sys, lambda).norm();
  return std::pow(local, sys.n);
}

}  // namespace

Matrix kernel_laplace(const PiecewisePolyKernel& kern, Complex lambda, int extra_power) {
  const int n = kern.dim();
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t p = 0; p < kern.pieces.size(); ++p) {
    const auto& piece = kern.pieces[p];
    const int deg = static_cast<int>(piece.size()) - 1;
    const auto mom = exp_moments(kern.breakpoints[p], kern.breakpoints[p + 1], lambda, deg + extra_power);
    for (int d = 0; d <= deg; ++d) {
      out += mom[static_cast<std::size_t>(d + extra_power)] * piece[static_cast<std::size_t>(d)];
    }
  }
  return out;
}

Matrix char_matrix(const NeutralSystem& sys, Complex lambda) {
  Matrix d = lambda * (Matrix::Identity(sys.n, sys.n) - std::exp(-lambda) * sys.a_minus1);
  if (!sys.a2.is_zero()) d -= lambda * kernel_laplace(sys.a2, lambda);
  if (!sys.a3.is_zero()) d -= kernel_laplace(sys.a3, lambda);
  return d;
}

Matrix char_matrix_derivative(const NeutralSystem& sys, Complex lambda) {
  const Complex e = std::exp(-lambda);
  Matrix d = Matrix::Identity(sys.n, sys.n) - (e - lambda * e) * sys.a_minus1;
  if (!sys.a2.is_zero()) d -= kernel_laplace(sys.a2, lambda) + lambda * kernel_laplace(sys.a2, lambda, 1);
  if (!sys.a3.is_zero()) d -= kernel_laplace(sys.a3, lambda, 1);
  return d;
}

Complex char_det(const NeutralSystem& sys, Complex lambda) {
  return char_matrix(sys, lambda).partialPivLu().determinant();
}

Complex log_det_derivative(const NeutralSystem& sys, Complex lambda) {
  const Matrix d = char_matrix(sys, lambda);
  const Matrix dp = char_matrix_derivative(sys, lambda);
  return d.partialPivLu().solve(dp).trace();
}

double char_scale(const NeutralSystem& sys, Complex lambda) {
  double s = std::abs(lambda) * (1.0 + std::abs(std::exp(-lambda)) * op_norm_bound(sys.a_minus1));
  if (!sys.a2.is_zero()) s += std::abs(lambda) * op_norm_bound(kernel_laplace(sys.a2, lambda));
  if (!sys.a3.is_zero()) s += op_norm_bound(kernel_laplace(sys.a3, lambda));
  return std::max(s, std::numeric_limits<double>::min());
}

std::vector<DiscSpec> approx_spectrum(const ModulusSpectrum& ms, int k_lo, int k_hi, bool with_origin) {
  std::vector<DiscSpec> discs;
  if (with_origin) discs.push_back({0, 0, Complex(0.0, 0.0), 1.0});
  for (std::size_t g = 0; g < ms.groups.size(); ++g) {
    const Complex mu = ms.groups[g].mu;
    const double re = std::log(std::abs(mu));
    const double arg = std::arg(mu) == -kPi ? kPi : std::arg(mu);
    for (int k = k_lo; k <= k_hi; ++k) {
      discs.push_back({static_cast<int>(g) + 1, k, Complex(re, arg + 2.0 * kPi * k), 1.0});
    }
  }
  // The origin always counts as a neighbouring center, even when not scanned.
  for (auto& d : discs) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& o : discs) {
      if (&o == &d) continue;
      const double dist = std::abs(o.center - d.center);
      if (dist > 0.0) nearest = std::min(nearest, dist);
    }
    if (d.group != 0) {
      const double dist0 = std::abs(d.center);
      if (dist0 > 0.0) nearest = std::min(nearest, dist0);
    }
    d.radius = std::min(1.0, 0.5 * nearest);
  }
  return discs;
}

int count_roots(const NeutralSystem& sys, const DiscSpec& disc) { return winding(sys, disc).winding; }

std::vector<Root> refine_roots(const NeutralSystem& sys, const DiscSpec& disc, int count) {
  if (count < 1) throw PreconditionError("refine_roots: count must be at least 1");
  const auto q = static_cast<std::size_t>(count);

  // Power sums of the normalized roots zeta = (lambda - c) / r.
  auto power_sums = [&](std::size_t npts) {
    std::vector<Complex> s(q + 1, 0.0);
    for (std::size_t j = 0; j < npts; ++j) {
      const double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(npts);
      const Complex zeta(std::cos(phi), std::sin(phi));
      const Complex g = log_det_derivative(sys, disc.center + disc.radius * zeta);
      Complex zp = zeta;
      for (std::size_t p = 0; p <= q; ++p) {
        s[p] += zp * g;
        zp *= zeta;
      }
    }
    for (auto& v : s) v *= disc.radius / static_cast<double>(npts);
    return s;
  };

  std::size_t npts = std::max<std::size_t>(256, 8 * q);
  auto s = power_sums(npts);
  for (int it = 0; it < 5; ++it) {
    auto s2 = power_sums(2 * npts);
    double diff = 0.0;
    for (std::size_t p = 1; p <= q; ++p) diff = std::max(diff, std::abs(s2[p] - s[p]));
    s = std::move(s2);
    npts *= 2;
    if (diff < 1e-11 * static_cast<double>(q)) break;
  }

  // Newton identities: elementary symmetric polynomials from power sums.
  std::vector<Complex> e(q + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t k = 1; k <= q; ++k) {
    Complex acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
      const double sign = (i % 2 == 1) ? 1.0 : -1.0;
      acc += sign * e[k - i] * s[i];
    }
    e[k] = acc / static_cast<double>(k);
  }
  std::vector<Complex> zetas;
  if (q == 1) {
    zetas.push_back(e[1]);
  } else {
    // zeta^q - e1 zeta^{q-1} + e2 zeta^{q-2} - ...
    Matrix comp = Matrix::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    for (std::size_t i = 0; i < q; ++i) {
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      comp(0, static_cast<Eigen::Index>(i)) = sign * e[i + 1];
    }
    for (std::size_t i = 1; i < q; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i) - 1) = 1.0;
    Eigen::ComplexEigenSolver<Matrix> es(comp, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) zetas.push_back(es.eigenvalues()(i));
  }

  // Cluster numerically coincident roots (multiple roots split by rounding).
  constexpr double kClusterTol = 1e-5;
  std::vector<int> owner(zetas.size());
  std::iota(owner.begin(), owner.end(), 0);
  std::function<int(int)> find = [&](int i) { return owner[i] == i ? i : owner[i] = find(owner[i]); };
  for (std::size_t i = 0; i < zetas.size(); ++i) {
    for (std::size_t j = i + 1; j < zetas.size(); ++j) {
      if (std::abs(zetas[i] - zetas[j]) < kClusterTol) owner[find(static_cast<int>(j))] = find(static_cast<int>(i));
    }
  }
  std::vector<Root> roots;
  std::vector<int> rep_index(zetas.size(), -1);
  for (std::size_t i = 0; i < zetas.size(); ++i) {
    const int r = find(static_cast<int>(i));
    if (rep_index[static_cast<std::size_t>(r)] < 0) {
      rep_index[static_cast<std::size_t>(r)] = static_cast<int>(roots.size());
      roots.push_back({0.0, 0});
    }
    auto& root = roots[static_cast<std::size_t>(rep_index[static_cast<std::size_t>(r)])];
    root.lambda += zetas[i];
    root.multiplicity += 1;
  }
  for (auto& r : roots) r.lambda = disc.center + disc.radius * (r.lambda / static_cast<double>(r.multiplicity));

  for (auto& r : roots) {
    if (r.multiplicity != 1) continue;
    Complex lam = r.lambda;
    const double start_res = std::abs(char_det(sys, lam));
    for (int it = 0; it < 50; ++it) {
      const Complex g = log_det_derivative(sys, lam);
      if (!std::isfinite(g.real()) || !std::isfinite(g.imag()) || std::abs(g) == 0.0) break;
      const Complex step = 1.0 / g;
      const Complex next = lam - step;
      if (std::abs(next - disc.center) > disc.radius) break;
      lam = next;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(lam))) break;
    }
    const double res = std::abs(char_det(sys, lam));
    const double tol = 1e-9 * det_scale(sys, lam);
    if (res > tol && res > start_res / 10.0) {
      throw NonConvergenceError("Newton polishing stalled near (" + std::to_string(lam.real()) + "," +
                                std::to_string(lam.imag()) + "), residual " + std::to_string(res));
    }
    r.lambda = lam;
  }
  // Two simple roots polished onto the same point signal a double root.
  for (std::size_t i = 0; i < roots.size(); ++i) {
    for (std::size_t j = i + 1; j < roots.size();) {
      if (std::abs(roots[i].lambda - roots[j].lambda) < 1e-10 * std::max(1.0, std::abs(roots[i].lambda))) {
        roots[i].multiplicity += roots[j].multiplicity;
        roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(j));
      } else {
        ++j;
      }
    }
  }
  for (const auto& r : roots) {
    const double res = std::abs(char_det(sys, r.lambda));
    if (res > 1e-9 * det_scale(sys, r.lambda) && r.multiplicity == 1) {
      throw NonConvergenceError("root residual too large at (" + std::to_string(r.lambda.real()) + "," +
                                std::to_string(r.lambda.imag()) + ")");
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  return roots;
}

SpectrumReport scan_spectrum(const NeutralSystem& sys, int k_max) {
  return scan_spectrum(sys, spectrum_of(sys), k_max);
}

SpectrumReport scan_spectrum(const NeutralSystem& sys, const ModulusSpectrum& ms, int k_max) {
  if (k_max < 1) throw RangeError("scan_spectrum: k_max must be at least 1");
  auto discs = approx_spectrum(ms, -k_max, k_max, true);

  // A group with mu = 1 has its k = 0 center at the origin; fold it into the
  // origin disc.
  int origin_expected = sys.n;
  std::erase_if(discs, [&](const DiscSpec& d) {
    if (d.group != 0 && d.k == 0 && std::abs(d.center) < 1e-12) {
      origin_expected += ms.groups[static_cast<std::size_t>(d.group) - 1].multiplicity;
      return true;
    }
    return false;
  });

  SpectrumReport report;
  report.k_max = k_max;
  std::vector<Root> candidates;
  for (auto disc : discs) {
    const int expected =
        disc.group == 0 ? origin_expected : ms.groups[static_cast<std::size_t>(disc.group) - 1].multiplicity;
    int count = count_with_retries(sys, disc);
    if (count != expected) {
      const bool grow = count < expected;
      DiscSpec trial = disc;
      DiscSpec widest = disc;
      int widest_count = count;
      bool matched = false;
      for (int attempt = 0; attempt < 3; ++attempt) {
        trial.radius = grow ? trial.radius * 1.5 : trial.radius / 1.5;
        DiscSpec probe = trial;
        int c = 0;
        try {
          c = count_with_retries(sys, probe);
        } catch (const ContourError&) {
          continue;
        }
        if (c == expected) {
          disc = probe;
          count = c;
          matched = true;
          break;
        }
        if (grow && probe.radius > widest.radius) {
          widest = probe;
          widest_count = c;
        }
      }
      if (!matched && grow && widest_count > 0 && widest.radius > disc.radius) {
        for (const auto& r : refine_roots(sys, widest, widest_count)) {
          if (!inside(disc, r.lambda)) candidates.push_back(r);
        }
      }
    }
    DiscRecord rec{disc, expected, count, {}};
    if (count > 0) rec.roots = refine_roots(sys, disc, count);
    report.discs.push_back(std::move(rec));
  }

  int n_thr = 0;
  for (const auto& rec : report.discs) {
    if (rec.disc.group != 0 && rec.count != rec.expected) n_thr = std::max(n_thr, std::abs(rec.disc.k));
  }
  report.n_threshold = n_thr;

  for (const auto& c : candidates) {
    bool covered = false;
    for (const auto& rec : report.discs) covered = covered || inside(rec.disc, c.lambda);
    for (const auto& l : report.leftover) {
      covered = covered || std::abs(l.lambda - c.lambda) < 1e-8 * std::max(1.0, std::abs(c.lambda));
    }
    if (!covered) report.leftover.push_back(c);
  }
  return report;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_spectrum_csv(const SpectrumReport& report, std::ostream& out) {
  out << "m,k,center_re,center_im,radius,count,root_re,root_im,multiplicity\n";
  for (const auto& rec : report.discs) {
    const std::string head = std::to_string(rec.disc.group) + "," + std::to_string(rec.disc.k) + "," +
                             num(rec.disc.center.real()) + "," + num(rec.disc.center.imag()) + "," +
                             num(rec.disc.radius) + "," + std::to_string(rec.count) + ",";
    if (rec.roots.empty()) {
      out << head << ",,0\n";
      continue;
    }
    for (const auto& r : rec.roots) {
      out << head << num(r.lambda.real()) << "," << num(r.lambda.imag()) << "," << r.multiplicity << "\n";
    }
  }
}

void write_leftover_csv(const SpectrumReport& report, std::ostream& out) {
  out << "root_re,root_im,multiplicity\n";
  for (const auto& r : report.leftover) {
    out << num(r.lambda.real()) << "," << num(r.lambda.imag()) << "," << r.multiplicity << "\n";
  }
}

}  // namespace nds
