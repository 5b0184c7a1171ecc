#include "nds/jordan_perturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "nds/errors.hpp"

namespace nds {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

int total_size(const std::vector<int>& sizes) { return std::accumulate(sizes.begin(), sizes.end(), 0); }

Complex det_of(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  return m.partialPivLu().determinant();
}

Matrix minor_of(const Matrix& m, Eigen::Index r, Eigen::Index c) {
  const auto n = m.rows();
  Matrix out(n - 1, n - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == r) continue;
    for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
      if (j == c) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// |lambda| log-uniform in [lo, hi], argument uniform.
Complex draw_lambda(SplitMixStream& s, double lo, double hi) {
  const double r = lo * std::pow(hi / lo, s.uniform());
  return std::polar(r, 2.0 * kPi * s.uniform());
}

std::uint64_t trial_seed(std::uint64_t seed, int n, int trial, std::uint64_t purpose) {
  SplitMixStream s(seed, (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint32_t>(trial), purpose);
  return s.next();
}

}  // namespace

SplitMixStream::SplitMixStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
    : state_(mix(seed + kGolden) ^ mix(a * kGolden + 0x632be59bd9b4e019ULL) ^ mix(b + 0x1234567ULL)) {}

std::uint64_t SplitMixStream::next() {
  state_ += kGolden;
  return mix(state_);
}

double SplitMixStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMixStream::open_uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

Matrix make_jordan(Complex lambda, const std::vector<int>& sizes) {
  if (sizes.empty()) throw PreconditionError("make_jordan: need at least one block");
  for (int s : sizes)
    if (s < 1) throw PreconditionError("make_jordan: block sizes must be positive");
  const int n = total_size(sizes);
  Matrix j = Matrix::Zero(n, n);
  int off = 0;
  for (int s : sizes) {
    for (int i = 0; i < s; ++i) {
      j(off + i, off + i) = lambda;
      if (i + 1 < s) j(off + i, off + i + 1) = 1.0;
    }
    off += s;
  }
  return j;
}

double entrywise_norm(const Matrix& a) { return a.cwiseAbs().sum(); }

Matrix sample_perturbation(int n, std::uint64_t seed) {
  if (n < 1) throw PreconditionError("sample_perturbation: n must be positive");
  SplitMixStream s(seed);
  const bool boundary = s.uniform() < 0.5;
  const double scale = boundary ? 1.0 : s.open_uniform();
  std::vector<double> mag(static_cast<std::size_t>(n) * n);
  double sum = 0.0;
  for (auto& v : mag) {
    v = -std::log(s.open_uniform());
    sum += v;
  }
  Matrix e(n, n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e(i, j) = std::polar(scale * mag[k++] / sum, 2.0 * kPi * s.uniform());
  return e;
}

PerturbedBlock make_perturbed_block(Complex lambda, const std::vector<int>& sizes, const Matrix& e) {
  PerturbedBlock pb;
  pb.lambda = lambda;
  pb.sizes = sizes;
  pb.a_matrix = make_jordan(lambda, sizes);
  if (e.rows() != pb.a_matrix.rows() || e.cols() != pb.a_matrix.cols()) {
    throw DimensionError("perturbation has the wrong dimension");
  }
  pb.b_matrix = pb.a_matrix + e;
  return pb;
}

std::vector<Complex> det_coefficients(const std::vector<int>& sizes, const Matrix& e) {
  const int n = total_size(sizes);
  const Matrix base = make_jordan(0.0, sizes) + e;
  const int pts = n + 1;
  std::vector<Complex> vals(static_cast<std::size_t>(pts));
  for (int k = 0; k < pts; ++k) {
    const Complex w = std::polar(1.0, 2.0 * kPi * k / pts);
    vals[static_cast<std::size_t>(k)] = det_of(base + w * Matrix::Identity(n, n));
  }
  // c_d = (1/pts) sum_k p(w_k) w_k^{-d}; f_j is the coefficient of lambda^{n-j}.
  std::vector<Complex> f(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const int d = n - j;
    Complex c = 0.0;
    for (int k = 0; k < pts; ++k) c += vals[static_cast<std::size_t>(k)] * std::polar(1.0, -2.0 * kPi * k * d / pts);
    f[static_cast<std::size_t>(j) - 1] = c / static_cast<double>(pts);
  }
  return f;
}

M0Estimate estimate_M0(int n, int trials, std::uint64_t seed) { return estimate_M0(std::vector<int>{n}, trials, seed); }

M0Estimate estimate_M0(const std::vector<int>& sizes, int trials, std::uint64_t seed) {
  if (trials < 1000) throw PreconditionError("estimate_M0: need at least 1000 trials");
  const int n = total_size(sizes);
  M0Estimate est;
  est.ceiling = std::pow(2.0, n) * factorial(n);
  for (int t = 0; t < trials; ++t) {
    const Matrix e = sample_perturbation(n, trial_seed(seed, n, t, 1));
    for (const auto& f : det_coefficients(sizes, e)) est.m0 = std::max(est.m0, std::abs(f));
  }
  return est;
}

Statement1Check check_statement1(const PerturbedBlock& pb, double M, double M0) {
  const int n = total_size(pb.sizes);
  if (M < (n + 1) * M0) throw PreconditionError("check_statement1: M must be at least (n+1) M0");
  const double lam = std::abs(pb.lambda);
  const double det = std::abs(det_of(pb.b_matrix));
  const double lam_n = std::pow(lam, n);
  Statement1Check out;
  out.upper_ok = det <= M * lam_n;
  if (lam >= 2.0 * M) out.lower_ok = det >= 0.5 * lam_n;
  return out;
}

bool check_remark1(const PerturbedBlock& pb, double M) {
  const auto n = pb.b_matrix.rows();
  const double bound = M * std::pow(std::abs(pb.lambda), static_cast<double>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(det_of(minor_of(pb.b_matrix, i, j))) > bound) return false;
  return true;
}

Statement2Check check_statement2(const PerturbedBlock& pb, double M0) {
  const int n = total_size(pb.sizes);
  const double M = (n + 1) * M0;
  const double lam = std::abs(pb.lambda);
  if (lam < 2.0 * M) throw RangeError("check_statement2: |lambda| below 2M, outside the large-|lambda| regime");
  Statement2Check out;
  out.bound = 2.0 * n * n * M / lam;
  out.inv_norm = entrywise_norm(pb.b_matrix.partialPivLu().inverse());
  out.ok = out.inv_norm <= out.bound;
  return out;
}

AppendixReport run_appendix(int n, int trials, std::uint64_t seed) {
  if (n < 1 || n > 6) throw RangeError("appendix: n must be in 1..6");
  const std::vector<int> sizes{n};
  const auto est = estimate_M0(n, trials, seed);
  const double M = (n + 1) * est.m0;
  AppendixReport rep;
  for (double lo : {1.0, 10.0, 100.0}) {
    AppendixRow row;
    row.n = n;
    row.lambda_abs = lo;
    row.m0 = est.m0;
    row.M = M;
    rep.rows.push_back(row);
  }
  for (int t = 0; t < trials; ++t) {
    const Matrix e = sample_perturbation(n, trial_seed(seed, n, t, 1));
    SplitMixStream ls(trial_seed(seed, n, t, 2));
    const Complex lambda = draw_lambda(ls, 1.0, 1e3);
    const auto pb = make_perturbed_block(lambda, sizes, e);
    const double lam = std::abs(lambda);
    auto& row = rep.rows[lam < 10.0 ? 0 : (lam < 100.0 ? 1 : 2)];
    ++row.trials;
    const auto s1 = check_statement1(pb, M, est.m0);
    if (!s1.upper_ok) ++row.violations_upper;
    if (s1.lower_ok) {
      ++row.lower_checked;
      if (!*s1.lower_ok) ++row.violations_lower;
    }
    if (!check_remark1(pb, M)) ++row.violations_cofactor;
    if (lam >= 2.0 * M) {
      const auto s2 = check_statement2(pb, est.m0);
      row.max_inv_norm_scaled = std::max(row.max_inv_norm_scaled, s2.inv_norm * lam);
    }
  }

  // |lambda| sweep from the regime edge to 1e6 for a handful of perturbations.
  ScalingRow sc;
  sc.n = n;
  sc.lambda_min = std::max(2.0 * M, 10.0);
  sc.lambda_max = 1e6;
  sc.slope_min = 1e300;
  sc.slope_max = -1e300;
  constexpr int kSweep = 25;
  constexpr int kSamples = 50;
  for (int t = 0; t < kSamples; ++t) {
    const Matrix e = sample_perturbation(n, trial_seed(seed, n, t, 3));
    SplitMixStream ps(trial_seed(seed, n, t, 4));
    const double phase = 2.0 * kPi * ps.uniform();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < kSweep; ++i) {
      const double r = sc.lambda_min * std::pow(sc.lambda_max / sc.lambda_min, static_cast<double>(i) / (kSweep - 1));
      const auto pb = make_perturbed_block(std::polar(r, phase), sizes, e);
      const auto s2 = check_statement2(pb, est.m0);
      sc.max_inv_norm_scaled = std::max(sc.max_inv_norm_scaled, s2.inv_norm * r);
      const double x = std::log(r);
      const double y = std::log(s2.inv_norm);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (kSweep * sxy - sx * sy) / (kSweep * sxx - sx * sx);
    sc.slope_min = std::min(sc.slope_min, slope);
    sc.slope_max = std::max(sc.slope_max, slope);
  }
  rep.scaling.push_back(sc);
  return rep;
}

namespace {
std::string g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_appendix_csv(const AppendixReport& rep, std::ostream& out) {
  out << "n,lambda_abs,trials,M0,M,violations_upper,violations_lower,max_inv_norm_scaled,violations_cofactor,"
         "lower_checked\n";
  for (const auto& r : rep.rows) {
    out << r.n << ',' << g(r.lambda_abs) << ',' << r.trials << ',' << g(r.m0) << ',' << g(r.M) << ','
        << r.violations_upper << ',' << r.violations_lower << ',' << g(r.max_inv_norm_scaled) << ','
        << r.violations_cofactor << ',' << r.lower_checked << '\n';
  }
}

void write_scaling_csv(const AppendixReport& rep, std::ostream& out) {
  out << "n,lambda_min,lambda_max,slope_min,slope_max,max_inv_norm_scaled\n";
  for (const auto& r : rep.scaling) {
    out << r.n << ',' << g(r.lambda_min) << ',' << g(r.lambda_max) << ',' << g(r.slope_min) << ','
        << g(r.slope_max) << ',' << g(r.max_inv_norm_scaled) << '\n';
  }
}

}  // namespace nds
