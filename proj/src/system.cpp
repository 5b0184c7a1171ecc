#include "nds/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nds/errors.hpp"

namespace nds {

using nlohmann::json;

namespace {

constexpr double kInvertibilityTol = 1e-10;

bool nearly_singular(const Matrix& m) {
  if (m.size() == 0) return true;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s(0) == 0.0 || s(s.size() - 1) <= kInvertibilityTol * s(0);
}

void validate_kernel(const PiecewisePolyKernel& k, int n, const std::string& name,
                     std::vector<std::string>& out) {
  const auto& bp = k.breakpoints;
  if (bp.size() < 2) {
    out.push_back(name + ": need at least two breakpoints");
    return;
  }
  if (bp.front() != -1.0) out.push_back(name + ": first breakpoint must be -1");
  if (bp.back() != 0.0) out.push_back(name + ": last breakpoint must be 0");
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i] > bp[i - 1])) {
      out.push_back(name + ": breakpoints not increasing");
      break;
    }
  }
  if (k.pieces.size() + 1 != bp.size()) {
    out.push_back(name + ": " + std::to_string(k.pieces.size()) + " pieces for " +
                  std::to_string(bp.size()) + " breakpoints");
  }
  for (std::size_t p = 0; p < k.pieces.size(); ++p) {
    const auto& coeffs = k.pieces[p];
    if (coeffs.empty() || coeffs.size() > 4) {
      out.push_back(name + ": piece " + std::to_string(p) + " must have 1..4 coefficients");
    }
    for (const auto& c : coeffs) {
      if (c.rows() != n || c.cols() != n) {
        out.push_back(name + ": piece " + std::to_string(p) + " coefficient is " +
                      std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                      ", expected " + std::to_string(n) + "x" + std::to_string(n));
        break;
      }
    }
  }
}

// Field-path aware accessors so schema errors name the offending field.
const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing field \"" + key + "\" at " + path);
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

Complex complex_from_json(const json& j, const std::string& path) {
  return {number(field(j, "re", path), path + ".re"), number(field(j, "im", path), path + ".im")};
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ParseError(path + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.is_array()) throw ParseError(rp + ": expected an array");
    if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DimensionError(rp + ": ragged matrix row");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = complex_from_json(j[r][c], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

void expect_square(const Matrix& m, int n, const std::string& path) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(path + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " but n = " + std::to_string(n));
  }
}

PiecewisePolyKernel kernel_from_json(const json& j, int n, const std::string& path) {
  PiecewisePolyKernel k;
  const auto& bp = field(j, "breakpoints", path);
  if (!bp.is_array()) throw ParseError(path + ".breakpoints: expected an array");
  for (std::size_t i = 0; i < bp.size(); ++i) {
    k.breakpoints.push_back(number(bp[i], path + ".breakpoints[" + std::to_string(i) + "]"));
  }
  const auto& pieces = field(j, "pieces", path);
  if (!pieces.is_array()) throw ParseError(path + ".pieces: expected an array");
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const std::string pp = path + ".pieces[" + std::to_string(p) + "]";
    if (!pieces[p].is_array()) throw ParseError(pp + ": expected an array of coefficient matrices");
    std::vector<Matrix> coeffs;
    for (std::size_t d = 0; d < pieces[p].size(); ++d) {
      const std::string cp = pp + "[" + std::to_string(d) + "]";
      Matrix c = matrix_from_json(pieces[p][d], cp);
      expect_square(c, n, cp);
      coeffs.push_back(std::move(c));
    }
    k.pieces.push_back(std::move(coeffs));
  }
  return k;
}

json kernel_to_json(const PiecewisePolyKernel& k) {
  json pieces = json::array();
  for (const auto& piece : k.pieces) {
    json coeffs = json::array();
    for (const auto& c : piece) coeffs.push_back(matrix_to_json(c));
    pieces.push_back(std::move(coeffs));
  }
  return json{{"breakpoints", k.breakpoints}, {"pieces", std::move(pieces)}};
}

}  // namespace

PiecewisePolyKernel PiecewisePolyKernel::zero(int n) { return constant(Matrix::Zero(n, n)); }

PiecewisePolyKernel PiecewisePolyKernel::constant(const Matrix& value) {
  PiecewisePolyKernel k;
  k.breakpoints = {-1.0, 0.0};
  k.pieces = {{value}};
  return k;
}

int PiecewisePolyKernel::dim() const {
  for (const auto& p : pieces)
    if (!p.empty()) return static_cast<int>(p.front().rows());
  return 0;
}

int PiecewisePolyKernel::max_degree() const {
  std::size_t d = 0;
  for (const auto& p : pieces) d = std::max(d, p.size());
  return d == 0 ? 0 : static_cast<int>(d) - 1;
}

bool PiecewisePolyKernel::is_zero() const {
  for (const auto& p : pieces)
    for (const auto& c : p)
      if (!c.isZero(0.0)) return false;
  return true;
}

std::size_t PiecewisePolyKernel::piece_index(double theta) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), theta);
  auto idx = static_cast<std::ptrdiff_t>(it - breakpoints.begin()) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(pieces.size()) - 1);
  return static_cast<std::size_t>(idx);
}

Matrix PiecewisePolyKernel::eval_piece(std::size_t piece, double theta) const {
  const auto& coeffs = pieces[piece];
  Matrix acc = coeffs.back();
  for (auto d = static_cast<std::ptrdiff_t>(coeffs.size()) - 2; d >= 0; --d) {
    acc = acc * theta + coeffs[static_cast<std::size_t>(d)];
  }
  return acc;
}

Matrix PiecewisePolyKernel::eval(double theta) const { return eval_piece(piece_index(theta), theta); }

Matrix PiecewisePolyKernel::integral() const {
  const int n = dim();
  Matrix acc = Matrix::Zero(n, n);
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    for (std::size_t d = 0; d < pieces[p].size(); ++d) {
      const double e = static_cast<double>(d + 1);
      acc += pieces[p][d] * ((std::pow(b, e) - std::pow(a, e)) / e);
    }
  }
  return acc;
}

Matrix DeclaredStructure::jordan_matrix() const {
  int n = 0;
  for (const auto& b : blocks) n += b.size;
  Matrix j = Matrix::Zero(n, n);
  int off = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.size; ++i) {
      j(off + i, off + i) = b.mu;
      if (i + 1 < b.size) j(off + i, off + i + 1) = 1.0;
    }
    off += b.size;
  }
  return j;
}

Matrix DeclaredStructure::assemble() const {
  return similarity * jordan_matrix() * similarity.fullPivLu().inverse();
}

namespace {
bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}
}  // namespace

bool operator==(const PiecewisePolyKernel& a, const PiecewisePolyKernel& b) {
  if (a.breakpoints != b.breakpoints || a.pieces.size() != b.pieces.size()) return false;
  for (std::size_t p = 0; p < a.pieces.size(); ++p) {
    if (a.pieces[p].size() != b.pieces[p].size()) return false;
    for (std::size_t d = 0; d < a.pieces[p].size(); ++d)
      if (!same(a.pieces[p][d], b.pieces[p][d])) return false;
  }
  return true;
}

bool operator==(const DeclaredStructure& a, const DeclaredStructure& b) {
  return a.blocks == b.blocks && same(a.similarity, b.similarity);
}

bool operator==(const NeutralSystem& a, const NeutralSystem& b) {
  return a.n == b.n && same(a.a_minus1, b.a_minus1) && a.a2 == b.a2 && a.a3 == b.a3 &&
         a.jordan == b.jordan;
}

std::vector<std::string> validate(const NeutralSystem& sys) {
  std::vector<std::string> out;
  const int n = sys.n;
  if (n < 1) {
    out.push_back("n must be at least 1");
    return out;
  }
  if (sys.a_minus1.rows() != n || sys.a_minus1.cols() != n) {
    out.push_back("A_-1 has wrong dimension");
  } else if (nearly_singular(sys.a_minus1)) {
    out.push_back("A_-1 singular (smallest singular value <= 1e-10 x largest)");
  }
  validate_kernel(sys.a2, n, "A2", out);
  validate_kernel(sys.a3, n, "A3", out);
  if (sys.jordan) {
    const auto& js = *sys.jordan;
    int total = 0;
    bool sizes_ok = true;
    for (const auto& b : js.blocks) {
      if (b.size < 1) sizes_ok = false;
      total += b.size;
    }
    if (!sizes_ok || total != n) {
      out.push_back("declared Jordan blocks must have positive sizes summing to n");
    } else if (js.similarity.rows() != n || js.similarity.cols() != n) {
      out.push_back("declared similarity has wrong dimension");
    } else if (nearly_singular(js.similarity)) {
      out.push_back("declared similarity singular");
    } else if (sys.a_minus1.rows() == n && sys.a_minus1.cols() == n) {
      const double err = (js.assemble() - sys.a_minus1).norm();
      if (err > 1e-10 * (1.0 + sys.a_minus1.norm())) {
        out.push_back("declared Jordan structure does not reproduce A_-1");
      }
    }
  }
  return out;
}

void require_valid(const NeutralSystem& sys) {
  const auto v = validate(sys);
  if (v.empty()) return;
  std::string msg = "invalid system:";
  for (const auto& s : v) msg += " " + s + ";";
  throw PreconditionError(msg);
}

json complex_to_json(Complex c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

NeutralSystem system_from_json(const json& j) {
  NeutralSystem sys;
  const auto& jn = field(j, "n", "$");
  if (!jn.is_number_integer()) throw ParseError("$.n: expected an integer");
  sys.n = jn.get<int>();
  if (sys.n < 1) throw DimensionError("$.n: must be at least 1");

  if (auto it = j.find("jordan"); it != j.end()) {
    DeclaredStructure ds;
    const auto& blocks = field(*it, "blocks", "$.jordan");
    if (!blocks.is_array()) throw ParseError("$.jordan.blocks: expected an array");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string bp = "$.jordan.blocks[" + std::to_string(b) + "]";
      JordanBlockSpec spec;
      spec.mu = complex_from_json(field(blocks[b], "mu", bp), bp + ".mu");
      const auto& sz = field(blocks[b], "size", bp);
      if (!sz.is_number_integer()) throw ParseError(bp + ".size: expected an integer");
      spec.size = sz.get<int>();
      ds.blocks.push_back(spec);
    }
    ds.similarity = matrix_from_json(field(*it, "similarity", "$.jordan"), "$.jordan.similarity");
    expect_square(ds.similarity, sys.n, "$.jordan.similarity");
    sys.jordan = std::move(ds);
  }

  if (j.contains("a_minus1") || !sys.jordan) {
    sys.a_minus1 = matrix_from_json(field(j, "a_minus1", "$"), "$.a_minus1");
    expect_square(sys.a_minus1, sys.n, "$.a_minus1");
  } else {
    int total = 0;
    for (const auto& b : sys.jordan->blocks) total += b.size;
    if (total != sys.n) throw DimensionError("$.jordan.blocks: sizes sum to " + std::to_string(total));
    sys.a_minus1 = sys.jordan->assemble();
  }
  sys.a2 = kernel_from_json(field(j, "a2", "$"), sys.n, "$.a2");
  sys.a3 = kernel_from_json(field(j, "a3", "$"), sys.n, "$.a3");
  return sys;
}

json system_to_json(const NeutralSystem& sys) {
  json j{{"n", sys.n},
         {"a_minus1", matrix_to_json(sys.a_minus1)},
         {"a2", kernel_to_json(sys.a2)},
         {"a3", kernel_to_json(sys.a3)}};
  if (sys.jordan) {
    json blocks = json::array();
    for (const auto& b : sys.jordan->blocks) {
      blocks.push_back(json{{"mu", complex_to_json(b.mu)}, {"size", b.size}});
    }
    j["jordan"] = json{{"blocks", std::move(blocks)},
                       {"similarity", matrix_to_json(sys.jordan->similarity)}};
  }
  return j;
}

NeutralSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return system_from_json(j);
  } catch (const DimensionError& e) {
    throw DimensionError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_system(const NeutralSystem& sys, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write system file " + path.string());
  out << system_to_json(sys).dump(2) << '\n';
}

NeutralSystem make_system(const Matrix& a_minus1, const Matrix& a2_const, const Matrix& a3_const) {
  NeutralSystem sys;
  sys.n = static_cast<int>(a_minus1.rows());
  sys.a_minus1 = a_minus1;
  sys.a2 = PiecewisePolyKernel::constant(a2_const);
  sys.a3 = PiecewisePolyKernel::constant(a3_const);
  return sys;
}

}  // namespace nds
