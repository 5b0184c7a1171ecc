#include "nds/matrix_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <limits>
#include <optional>

#include "nds/errors.hpp"

namespace nds {

namespace {

struct Nullities {
  std::vector<int> d;  // d[j-1] = nullity of (A - mu I)^j
  bool ambiguous = false;
};

Nullities nullity_sequence(const Matrix& a, Complex mu, int q, double tol, double scale) {
  const auto n = a.rows();
  const Matrix shifted = a - mu * Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  Nullities out;
  for (int j = 1; j <= q; ++j) {
    power = power * shifted;
    Eigen::JacobiSVD<Matrix> svd(power);
    const auto& s = svd.singularValues();
    // Relative to the power's own norm: absolute thresholds like tol * |A|^j
    // swallow genuine nilpotent singular values when A is far from normal.
    if (s(0) <= std::numeric_limits<double>::min() * scale) {
      out.d.push_back(static_cast<int>(n));
      continue;
    }
    const double thr = tol * s(0);
    int null = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > thr / 10.0 && s(i) < thr * 10.0) out.ambiguous = true;
      if (s(i) <= thr) ++null;
    }
    out.d.push_back(null);
  }
  return out;
}

bool consistent(const Nullities& nl, int q) {
  if (nl.ambiguous || nl.d.empty() || nl.d.back() != q || nl.d.front() < 1) return false;
  int prev_d = 0;
  int prev_step = q + 1;
  for (int dj : nl.d) {
    const int step = dj - prev_d;
    if (step < 0 || step > prev_step) return false;
    prev_step = step;
    prev_d = dj;
  }
  return true;
}

std::vector<int> block_sizes_from(const std::vector<int>& d) {
  // b[j] = number of blocks of size >= j+1.
  std::vector<int> at_least;
  int prev = 0;
  for (int dj : d) {
    at_least.push_back(dj - prev);
    prev = dj;
  }
  at_least.push_back(0);
  std::vector<int> sizes;
  for (std::size_t j = at_least.size() - 1; j-- > 0;) {
    const int exactly = at_least[j] - at_least[j + 1];
    for (int c = 0; c < exactly; ++c) sizes.push_back(static_cast<int>(j) + 1);
  }
  return sizes;
}

struct Cluster {
  std::vector<Complex> members;
  std::size_t first_index = 0;  // position of the first member in solver order

  Complex mean() const {
    return std::accumulate(members.begin(), members.end(), Complex{}) /
           static_cast<double>(members.size());
  }
  double spread() const {
    const Complex c = mean();
    double s = 0.0;
    for (auto m : members) s = std::max(s, std::abs(m - c));
    return s;
  }
};

}  // namespace

ModulusSpectrum finalize_groups(std::vector<ModulusGroup> groups) {
  std::stable_sort(groups.begin(), groups.end(), [](const ModulusGroup& a, const ModulusGroup& b) {
    return std::abs(a.mu) > std::abs(b.mu) + kModulusTieTol;
  });
  // Within runs of tied moduli, larger multiplicity first.
  for (std::size_t i = 0; i < groups.size();) {
    std::size_t j = i + 1;
    while (j < groups.size() && std::abs(std::abs(groups[j].mu) - std::abs(groups[j - 1].mu)) <= kModulusTieTol) ++j;
    std::stable_sort(groups.begin() + static_cast<std::ptrdiff_t>(i), groups.begin() + static_cast<std::ptrdiff_t>(j),
                     [](const ModulusGroup& a, const ModulusGroup& b) { return a.multiplicity > b.multiplicity; });
    i = j;
  }
  ModulusSpectrum ms;
  ms.ell = static_cast<int>(groups.size());
  if (!groups.empty()) {
    const double top = std::abs(groups.front().mu);
    ms.omega_tilde = std::log(top);
    for (const auto& g : groups) {
      if (std::abs(std::abs(g.mu) - top) > kModulusTieTol) break;
      ms.p += g.multiplicity;
      for (int s : g.block_sizes) ms.p1 = std::max(ms.p1, s);
    }
  }
  ms.groups = std::move(groups);
  return ms;
}

ModulusSpectrum analyze(const Matrix& a, double cluster_tol) {
  if (a.rows() != a.cols() || a.rows() == 0) throw DimensionError("analyze: matrix must be square and non-empty");
  const auto n = a.rows();
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw Error("analyze: eigenvalue iteration failed");
  const Vector ev = es.eigenvalues();

  const double scale = std::max(1.0, Eigen::JacobiSVD<Matrix>(a).singularValues()(0));

  // Single linkage at cluster_tol.
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<Cluster> clusters;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (label[static_cast<std::size_t>(i)] >= 0) continue;
    Cluster c;
    c.first_index = static_cast<std::size_t>(i);
    std::vector<Eigen::Index> stack{i};
    label[static_cast<std::size_t>(i)] = static_cast<int>(clusters.size());
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      c.members.push_back(ev(k));
      for (Eigen::Index j = 0; j < n; ++j) {
        if (label[static_cast<std::size_t>(j)] >= 0) continue;
        if (std::abs(ev(j) - ev(k)) <= cluster_tol * std::max(1.0, std::abs(ev(k)))) {
          label[static_cast<std::size_t>(j)] = static_cast<int>(clusters.size());
          stack.push_back(j);
        }
      }
    }
    clusters.push_back(std::move(c));
  }

  // Agglomerate clusters that look like one split Jordan block. A perturbed
  // block of size q scatters its eigenvalue over a radius ~ tol^(1/q), and only
  // the full set has an accurate mean, so neighbourhoods are grown around each
  // seed and tested as a whole.
  bool merged = true;
  while (merged && clusters.size() > 1) {
    merged = false;
    for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
      std::vector<std::size_t> members{i};
      Cluster trial = clusters[i];
      bool grew = true;
      while (grew) {
        grew = false;
        for (std::size_t j = 0; j < clusters.size(); ++j) {
          if (std::find(members.begin(), members.end(), j) != members.end()) continue;
          const auto q = static_cast<int>(trial.members.size() + clusters[j].members.size());
          const Complex mu = trial.mean();
          const double allowed = 0.1 * std::pow(cluster_tol, 1.0 / q) * std::max(1.0, std::abs(mu));
          if (std::abs(clusters[j].mean() - mu) > allowed) continue;
          members.push_back(j);
          trial.members.insert(trial.members.end(), clusters[j].members.begin(), clusters[j].members.end());
          trial.first_index = std::min(trial.first_index, clusters[j].first_index);
          grew = true;
        }
      }
      if (members.size() < 2) continue;
      const auto q = static_cast<int>(trial.members.size());
      if (!consistent(nullity_sequence(a, trial.mean(), q, cluster_tol, scale), q)) continue;
      std::sort(members.rbegin(), members.rend());
      for (std::size_t idx : members) clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(idx));
      clusters.push_back(std::move(trial));
      merged = true;
    }
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& x, const Cluster& y) { return x.first_index < y.first_index; });

  std::vector<ModulusGroup> groups;
  for (const auto& c : clusters) {
    const auto q = static_cast<int>(c.members.size());
    const Complex mu = c.mean();
    const Nullities nl = nullity_sequence(a, mu, q, cluster_tol, scale);
    if (nl.ambiguous) {
      throw RankAmbiguityError("analyze: singular values of (A - mu I)^j within a factor 10 of the rank "
                               "threshold near mu = (" + std::to_string(mu.real()) + ", " +
                               std::to_string(mu.imag()) + ")");
    }
    if (!consistent(nl, q)) {
      throw RankAmbiguityError("analyze: nullity sequence inconsistent with multiplicity " + std::to_string(q));
    }
    groups.push_back(ModulusGroup{mu, q, block_sizes_from(nl.d)});
  }
  return finalize_groups(std::move(groups));
}

ModulusSpectrum from_declared(const DeclaredStructure& ds) {
  std::vector<ModulusGroup> groups;
  for (const auto& b : ds.blocks) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const ModulusGroup& g) { return g.mu == b.mu; });
    if (it == groups.end()) {
      groups.push_back(ModulusGroup{b.mu, b.size, {b.size}});
    } else {
      it->multiplicity += b.size;
      it->block_sizes.push_back(b.size);
    }
  }
  for (auto& g : groups) std::sort(g.block_sizes.rbegin(), g.block_sizes.rend());
  return finalize_groups(std::move(groups));
}

ModulusSpectrum spectrum_of(const NeutralSystem& sys, double cluster_tol) {
  if (sys.jordan) return from_declared(*sys.jordan);
  return analyze(sys.a_minus1, cluster_tol);
}

}  // namespace nds
