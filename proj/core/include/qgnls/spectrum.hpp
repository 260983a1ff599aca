#pragma once

#include <cstdint>
#include <vector>

#include "qgnls/discretization.hpp"

namespace qgnls {

/// First k eigenpairs of A phi = lambda M phi, ascending, M-orthonormal.
/// Indices in the accessors are 1-based to match lambda_1 = 0.
struct SpectralData {
  Vec eigenvalues;
  Mat eigenfunctions;  // one column per eigenpair
  int iterations = 0;
  double max_residual = 0.0;
  double orthogonality_error = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  double lambda(int k) const { return eigenvalues[k - 1]; }
  Vec phi(int k) const { return eigenfunctions.col(k - 1); }
  /// Columns phi_1 .. phi_{k-1}.
  Mat leading(int k) const { return eigenfunctions.leftCols(k - 1); }
};

inline constexpr std::uint64_t kDefaultSeed = 20240917;

SpectralData eigenpairs(const Discretization& d, int k, double tol = 1e-10, std::uint64_t seed = kDefaultSeed,
                        int max_iterations = 1000);

/// Tolerance used to decide lambda_{k-1} < lambda_k.
inline double gap_tolerance(double lambda_k) { return 1e-6 * (1.0 + lambda_k); }

/// All k >= 2 with lambda_k - lambda_{k-1} above the gap tolerance.
std::vector<int> spectral_gap_indices(const Vec& eigenvalues);
inline std::vector<int> spectral_gap_indices(const SpectralData& s) { return spectral_gap_indices(s.eigenvalues); }
bool is_admissible(const SpectralData& s, int k);

}  // namespace qgnls
