#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nds/types.hpp"

namespace nds {

/// Counter-based stream: draw i of stream (seed, a, b) does not depend on how
/// many other streams were used, so trials can run in any order.
class SplitMixStream {
 public:
  explicit SplitMixStream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);
  std::uint64_t next();
  double uniform();       // [0, 1)
  double open_uniform();  // (0, 1)

 private:
  std::uint64_t state_;
};

Matrix make_jordan(Complex lambda, const std::vector<int>& sizes);

/// Sum of |a_ij|.
double entrywise_norm(const Matrix& a);

/// Complex n x n perturbation with entrywise-sum norm on the unit simplex
/// boundary (half the draws) or strictly inside it; phases uniform.
Matrix sample_perturbation(int n, std::uint64_t seed);

struct PerturbedBlock {
  Complex lambda;
  std::vector<int> sizes;
  Matrix a_matrix;
  Matrix b_matrix;
};

PerturbedBlock make_perturbed_block(Complex lambda, const std::vector<int>& sizes, const Matrix& e);

/// f_1..f_n with det(lambda I + N + E) = lambda^n + f_1 lambda^{n-1} + ... + f_n,
/// where N is the nilpotent part of the Jordan matrix with the given sizes.
/// Obtained by interpolating the determinant at the (n+1)-th roots of unity.
std::vector<Complex> det_coefficients(const std::vector<int>& sizes, const Matrix& e);

struct M0Estimate {
  double m0 = 0.0;
  double ceiling = 0.0;  // 2^n n!
};

/// Running max of |f_j| over `trials` sampled perturbations (trials >= 1000).
M0Estimate estimate_M0(int n, int trials, std::uint64_t seed);
M0Estimate estimate_M0(const std::vector<int>& sizes, int trials, std::uint64_t seed);

struct Statement1Check {
  bool upper_ok = false;
  std::optional<bool> lower_ok;  // only when |lambda| >= 2M
};

/// |det B| <= M |lambda|^n, and |det B| >= |lambda|^n / 2 once |lambda| >= 2M.
/// Requires M >= (n+1) M0.
Statement1Check check_statement1(const PerturbedBlock& pb, double M, double M0);

/// Every cofactor satisfies |B_ij| <= M |lambda|^{n-1}.
bool check_remark1(const PerturbedBlock& pb, double M);

struct Statement2Check {
  double bound = 0.0;     // C / |lambda|, C = 2 n^2 M
  double inv_norm = 0.0;  // entrywise-sum norm of B^{-1}
  bool ok = false;
};

/// Inverse-norm bound with M = (n+1) M0; RangeError when |lambda| < 2M.
Statement2Check check_statement2(const PerturbedBlock& pb, double M0);

struct AppendixRow {
  int n = 0;
  double lambda_abs = 0.0;  // lower edge of the |lambda| decade
  int trials = 0;
  double m0 = 0.0;
  double M = 0.0;
  int violations_upper = 0;
  int violations_lower = 0;
  int violations_cofactor = 0;
  int lower_checked = 0;
  double max_inv_norm_scaled = 0.0;  // max |B^-1| |lambda| over the regime |lambda| >= 2M
};

struct ScalingRow {
  int n = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double slope_min = 0.0;
  double slope_max = 0.0;
  double max_inv_norm_scaled = 0.0;
};

struct AppendixReport {
  std::vector<AppendixRow> rows;
  std::vector<ScalingRow> scaling;
};

/// Full property sweep for one dimension n: M0 from `trials` draws, then the
/// Statement 1 / Remark 1 / Statement 2 checks on the same draws with |lambda|
/// log-uniform in [1, 1e3], plus the |lambda| -> 1e6 scaling sweep.
AppendixReport run_appendix(int n, int trials, std::uint64_t seed);

void write_appendix_csv(const AppendixReport& rep, std::ostream& out);
void write_scaling_csv(const AppendixReport& rep, std::ostream& out);

}  // namespace nds
