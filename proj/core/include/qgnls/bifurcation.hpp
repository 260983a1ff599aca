#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qgnls/cones.hpp"
#include "qgnls/flow.hpp"
#include "qgnls/spectrum.hpp"

namespace qgnls {

/// One converged state on a branch continued in mu.
struct BranchPoint {
  double mu = 0.0;
  Vec u;
  double pde_lambda = 0.0;     // lambda of -u'' + lambda u = |u|^{p-2} u, i.e. (int|u|^p - u^T A u) / mu
  double lambda_u = 0.0;
  double energy = 0.0;
  double energy_ratio = 0.0;   // E / mu
  double kinetic_ratio = 0.0;  // u^T A u / mu
  double p_norm_ratio = 0.0;   // int|u|^p / mu
  double h1_norm = 0.0;        // sqrt(u^T A u + mu)
  double residual = 0.0;
  double phi_overlap = 0.0;    // <u, M phi_k>^2 / mu
  bool sign_changing = false;
  ConeClass cone = ConeClass::InSStar;
  int newton_iterations = 0;
  bool used_descent = false;
};

/// mu0, mu0 r, mu0 r^2, ... (points entries).
std::vector<double> geometric_grid(double mu0, int points = 8, double ratio = 0.5);

struct SweepOptions {
  double residual_tol = 1e-11;
  double min_overlap = 0.5;
  int max_descent_steps = 20000;
};

/// Continues the branch bifurcating from lambda_k along a strictly decreasing
/// mass grid, warm-starting each point from the previous one scaled to the new mass.
std::vector<BranchPoint> sweep(const Discretization& d, const SpectralData& spec, int k,
                               const std::vector<double>& mu_grid, const FlowParams& flow,
                               const SweepOptions& opt = {});

struct BifurcationVerdict {
  int k = 0;
  double target = 0.0;  // lambda_k
  double tol = 0.0;
  std::vector<double> mu;
  std::vector<double> deviation;         // |-pde_lambda - lambda_k|
  std::vector<double> h1_norm;
  std::vector<double> energy_deviation;  // |E/mu - lambda_k / 2|
  std::vector<double> kinetic_deviation; // |u^T A u / mu - lambda_k|
  double p_norm_drop = 0.0;              // first / last p_norm_ratio
  bool deviation_decreasing = false;
  bool final_deviation_ok = false;
  bool h1_decreasing = false;
  bool h1_bound_ok = false;
  bool energy_ok = false;
  bool kinetic_ok = false;
  bool p_norm_ok = false;
  bool cone_clean = false;
  bool pass = false;
  std::string diagnostic;
};

BifurcationVerdict bifurcation_verdict(const std::vector<BranchPoint>& branch, double target, double tol, int k = 0);

}  // namespace qgnls
