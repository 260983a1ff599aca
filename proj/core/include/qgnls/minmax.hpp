#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qgnls/cones.hpp"
#include "qgnls/flow.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/spectrum.hpp"

namespace qgnls {

/// Upper hemisphere {t in R^k : |t| = 1, t_k >= 0} of eigen-coefficients,
/// u(t) = sum_i t_i sqrt(mu) phi_i. Samples with t_k = 0 lie in S_{k-1}.
struct LinkedCap {
  int k = 0;
  double mu = 0.0;
  int grid_density = 0;
  Mat coeffs;                  // one row per sample
  std::vector<char> boundary;  // t_k == 0
  Mat basis;                   // sqrt(mu) phi_1 .. sqrt(mu) phi_k

  Eigen::Index size() const { return coeffs.rows(); }
  Vec field(Eigen::Index i) const { return basis * coeffs.row(i).transpose(); }
};

LinkedCap build_cap(const SpectralData& spec, int k, double mu, int grid_density = 16);

struct LevelReport {
  int k = 0;
  double c_lower_bar = 0.0;  // g(lambda_k mu) - l^{(2-p)/2} mu^{p/2}
  double c_underbar = 0.0;   // sup of E over the S_{k-1} samples
  double sup_Q = 0.0;        // sup of E over the cap samples
  double m2 = 0.0;
  double half_lambda_mu = 0.0;
  bool cap_in_ball = false;  // lambda_k mu < rho*
  bool regime_ok = false;    // mu below the k-th threshold
  bool separation_ok = false;
  Eigen::Index argmax = 0;
  std::vector<double> energies;
};

LevelReport level_estimates(const Discretization& d, const LinkedCap& cap, const ThresholdReport& thr, double p);

struct SolutionRecord {
  std::string kind;  // "sign_changing", "positive", "mirror"
  int k = 0;
  double p = 0.0;
  double mu = 0.0;
  Vec u;
  double energy = 0.0;
  double pde_lambda = 0.0;     // lambda of -u'' + lambda u = |u|^{p-2} u
  double tested_lambda = 0.0;  // (int|u|^p - u^T A u) / mu
  double lambda_u = 0.0;
  double residual = 0.0;       // dual norm of the stationary equation
  double mass_error = 0.0;     // |u^T M u - mu| / mu
  double kinetic = 0.0;
  double p_integral = 0.0;
  double h1_norm = 0.0;
  double max_flux = 0.0;       // largest Kirchhoff flux sum over vertices
  double nodal_min = 0.0;
  double nodal_max = 0.0;
  bool sign_changing = false;
  int sign_changes = 0;        // along edges, ignoring nodes below the certificate level
  ConeReport cone;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  bool in_bracket = false;
  int starts_tried = 0;
  int starts_converged = 0;
  std::string label;
};

/// Certificate data for a (nearly) critical point u with multiplier lambda.
SolutionRecord certify(const Discretization& d, const Vec& u, double lambda, double p, double mu, double nu);

/// Number of sign changes of the nodal values along the edges (interior
/// vertices are shared, so a change through a vertex is counted once per edge).
int count_sign_changes(const Discretization& d, const Vec& u, double threshold);

struct SignChangingOptions {
  int multistart = 3;            // perturbed copies per start sample
  double perturbation = 1e-3;    // relative size of the tangent noise
  int max_start_samples = 4;     // cap on the top-decile samples used
  std::uint64_t seed = 5;
  double residual_tol = 1e-10;  // absolute cap; tightened to 1e-12 * |u|_S for small states
};

/// Descent from the energy-maximal cap samples in S*(nu), deflated against
/// phi_1 .. phi_{k-1}, then Newton refinement on the full problem.
SolutionRecord find_sign_changing(const Discretization& d, const SpectralData& spec, const LinkedCap& cap,
                                  const LevelReport& level, const FlowParams& flow, double nu,
                                  const SignChangingOptions& opt = {});

/// Positive solution by cone-restricted descent from a perturbed constant.
SolutionRecord find_positive(const Discretization& d, const FlowParams& flow, double nu, std::uint64_t seed = 3);

struct Ladder {
  std::vector<SolutionRecord> solutions;  // positive first, then ascending k
  std::vector<SolutionRecord> mirrors;    // -u for each solution
  std::vector<LevelReport> levels;
  bool ordering_ok = false;
  double min_pairwise_distance = 0.0;
};

Ladder solve_ladder(const Discretization& d, const SpectralData& spec, const ThresholdReport& thr,
                    const std::vector<int>& indices, const FlowParams& flow, double nu, int grid_density = 16,
                    const SignChangingOptions& opt = {});

struct LinkCheck {
  int deformations = 0;
  int passed = 0;
  double worst_gap = 0.0;  // largest |phi_1 component| / sqrt(mu) at the detected crossing
};

/// k = 2: deformations of Q_2 fixing its endpoints must cross S_1^perp.
LinkCheck link_sanity(const Discretization& d, const SpectralData& spec, const LinkedCap& cap, int deformations,
                      std::uint64_t seed = 13);

}  // namespace qgnls
