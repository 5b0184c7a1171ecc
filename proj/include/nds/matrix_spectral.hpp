#pragma once

#include <vector>

#include "nds/system.hpp"
#include "nds/types.hpp"

namespace nds {

struct ModulusGroup {
  Complex mu;
  int multiplicity = 0;
  std::vector<int> block_sizes;  // descending
};

/// Eigenvalues of A_{-1} ordered by modulus (descending), equal moduli by
/// multiplicity (descending), exact ties in input order.
struct ModulusSpectrum {
  std::vector<ModulusGroup> groups;
  int ell = 0;               // number of distinct eigenvalues
  double omega_tilde = 0.0;  // ln |mu_1|
  int p = 0;                 // total block size over all maximal-modulus eigenvalues
  int p1 = 0;                // largest single Jordan block among them
};

inline constexpr double kDefaultClusterTol = 1e-8;
inline constexpr double kModulusTieTol = 1e-12;

/// Numerical eigen/Jordan structure of an invertible matrix. Eigenvalues
/// within cluster_tol (relative) merge; nearby eigenvalues whose spread is
/// consistent with a perturbed Jordan block of size q (spread below
/// 0.1 * cluster_tol^(1/q)) merge when the nullity sequence of (A - mu I)^j
/// confirms it. Block sizes come from those nullities.
///
/// Throws RankAmbiguityError when a singular value lies within a factor 10 of
/// the rank threshold.
ModulusSpectrum analyze(const Matrix& a_minus1, double cluster_tol = kDefaultClusterTol);

/// Exact structure from a user-declared Jordan form.
ModulusSpectrum from_declared(const DeclaredStructure& ds);

/// Declared structure when present, otherwise analyze().
ModulusSpectrum spectrum_of(const NeutralSystem& sys, double cluster_tol = kDefaultClusterTol);

/// Orders groups and fills ell, omega_tilde, p, p1.
ModulusSpectrum finalize_groups(std::vector<ModulusGroup> groups);

}  // namespace nds
