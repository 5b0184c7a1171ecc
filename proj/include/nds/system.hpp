#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nds/types.hpp"

namespace nds {

/// Piecewise polynomial matrix kernel on [-1, 0].
///
/// Piece j lives on [breakpoints[j], breakpoints[j+1]] and evaluates
/// sum_d pieces[j][d] * theta^d (absolute theta, not shifted to the piece).
/// Degree is at most 3, so every piece holds between one and four
/// coefficient matrices.
struct PiecewisePolyKernel {
  std::vector<double> breakpoints;
  std::vector<std::vector<Matrix>> pieces;

  static PiecewisePolyKernel zero(int n);
  static PiecewisePolyKernel constant(const Matrix& value);

  int dim() const;
  int max_degree() const;
  bool is_zero() const;

  /// Index of the piece containing theta. Breakpoints belong to the piece on
  /// their right, except 0 which belongs to the last piece.
  std::size_t piece_index(double theta) const;
  Matrix eval_piece(std::size_t piece, double theta) const;
  Matrix eval(double theta) const;

  /// Exact integral over [-1, 0].
  Matrix integral() const;

};

struct JordanBlockSpec {
  Complex mu;
  int size = 1;

  bool operator==(const JordanBlockSpec&) const = default;
};

/// User-declared Jordan structure: A_{-1} = S * J * S^{-1}.
struct DeclaredStructure {
  std::vector<JordanBlockSpec> blocks;
  Matrix similarity;

  Matrix jordan_matrix() const;
  Matrix assemble() const;

};

/// z'(t) = A_{-1} z'(t-1) + int A2(th) z'(t+th) dth + int A3(th) z(t+th) dth
struct NeutralSystem {
  int n = 0;
  Matrix a_minus1;
  PiecewisePolyKernel a2;
  PiecewisePolyKernel a3;
  std::optional<DeclaredStructure> jordan;

};

/// Element (y, z) of C^n x L2(-1, 0; C^n); z sampled at theta_i = -1 + i/m.
struct M2State {
  Vector y;
  Matrix z;  // n x (m + 1), column i is z(theta_i)

  M2State() = default;
  M2State(Vector y_, Matrix z_) : y(std::move(y_)), z(std::move(z_)) {}

  int n() const { return static_cast<int>(y.size()); }
  int m() const { return static_cast<int>(z.cols()) - 1; }
  double h() const { return 1.0 / m(); }
  double theta(int i) const { return -1.0 + static_cast<double>(i) / m(); }
};

// Exact field-by-field equality; matrices of different shape compare unequal.
bool operator==(const PiecewisePolyKernel& a, const PiecewisePolyKernel& b);
bool operator==(const DeclaredStructure& a, const DeclaredStructure& b);
bool operator==(const NeutralSystem& a, const NeutralSystem& b);

/// Every violated standing assumption, one message each; empty means valid.
std::vector<std::string> validate(const NeutralSystem& sys);

/// Throws PreconditionError listing the violations when sys is not valid.
void require_valid(const NeutralSystem& sys);

NeutralSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const NeutralSystem& sys);

NeutralSystem load_system(const std::filesystem::path& path);
void save_system(const NeutralSystem& sys, const std::filesystem::path& path);

/// Convenience constructor for systems with constant kernels.
NeutralSystem make_system(const Matrix& a_minus1, const Matrix& a2_const,
                          const Matrix& a3_const);

nlohmann::json complex_to_json(Complex c);
nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace nds
