#include "qgnls/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qgnls/error.hpp"

namespace qgnls {

namespace {

// Modified Gram-Schmidt in the M inner product, applied twice.
void m_orthonormalize(const SpMat& M, Mat& X) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const Vec mi = M * X.col(i);
        X.col(j) -= mi.dot(X.col(j)) * X.col(i);
      }
      const double nrm = std::sqrt(X.col(j).dot(M * X.col(j)));
      if (!(nrm > 0.0)) throw ConvergenceFailure("subspace collapsed during M-orthonormalization");
      X.col(j) /= nrm;
    }
  }
}

void fix_signs(const SpMat& M, Mat& phi) {
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    auto v = phi.col(c);
    if (c == 0) {
      if ((M * v).sum() < 0.0) v = -v;
      continue;
    }
    const double thresh = 1e-6 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v[i]) > thresh) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
  }
}

}  // namespace

SpectralData eigenpairs(const Discretization& d, int k, double tol, std::uint64_t seed, int max_iterations) {
  const Eigen::Index n = d.num_dofs();
  if (k < 1) throw InvalidArgument("eigenpairs: k must be >= 1");
  if (k > n) throw InvalidArgument("eigenpairs: k exceeds the number of DOFs");
  if (!(tol > 0.0)) throw InvalidArgument("eigenpairs: tol must be positive");
  const SpMat& A = d.stiffness();
  const SpMat& M = d.mass_matrix();

  SpectralData out;
  out.seed = seed;
  out.tol = tol;

  const Eigen::Index m = std::min<Eigen::Index>(n, std::max(2 * k, k + 8));
  Mat X(n, m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);
  m_orthonormalize(M, X);

  Vec theta;
  double worst = 0.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    // Shift-invert step with S = A + M, then Rayleigh-Ritz on the new block.
    Mat Y = d.solve_h1(Mat(M * X));
    m_orthonormalize(M, Y);
    Mat Ar = Y.transpose() * (A * Y);
    Ar = 0.5 * (Ar + Ar.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(Ar);
    theta = es.eigenvalues();
    X = Y * es.eigenvectors();

    worst = 0.0;
    for (int c = 0; c < k; ++c) {
      const Vec r = A * X.col(c) - theta[c] * (M * X.col(c));
      // Residual measured in the S^{-1} dual norm, relative to the eigenvalue scale.
      const double rn = std::sqrt(std::max(0.0, r.dot(d.solve_h1(r))));
      worst = std::max(worst, rn / std::max(1.0, theta[c]));
    }
    if (worst <= tol) break;
  }
  if (it == max_iterations) {
    std::ostringstream os;
    os << "subspace iteration did not reach tol " << tol << " in " << max_iterations
       << " iterations (worst residual " << worst << ")";
    throw ConvergenceFailure(os.str());
  }

  out.iterations = it + 1;
  out.max_residual = worst;
  out.eigenvalues = theta.head(k);
  out.eigenfunctions = X.leftCols(k);
  fix_signs(M, out.eigenfunctions);

  const Mat G = out.eigenfunctions.transpose() * (M * out.eigenfunctions);
  out.orthogonality_error = (G - Mat::Identity(k, k)).cwiseAbs().maxCoeff();
  return out;
}

std::vector<int> spectral_gap_indices(const Vec& ev) {
  std::vector<int> idx;
  for (Eigen::Index k = 2; k <= ev.size(); ++k) {
    if (ev[k - 1] - ev[k - 2] > gap_tolerance(ev[k - 1])) idx.push_back(static_cast<int>(k));
  }
  return idx;
}

bool is_admissible(const SpectralData& s, int k) {
  if (k < 2 || k > s.count()) return false;
  return s.lambda(k) - s.lambda(k - 1) > gap_tolerance(s.lambda(k));
}

}  // namespace qgnls
