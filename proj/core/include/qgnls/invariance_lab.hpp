#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qgnls/discretization.hpp"

namespace qgnls {

/// Finite-dimensional model of the abstract setting: E = (R^n, S_lab),
/// H = (R^n, M_lab), the sphere S_mu = {u^T M_lab u = mu}, a closed convex set
/// B (here B-tilde) and a map G from the sphere to B with u^T M_lab G(u) = mu.
struct LabScenario {
  std::string name;
  int n = 0;
  Mat S_lab;
  Mat M_lab;
  double mu = 1.0;

  std::function<bool(const Vec&)> member;          // u in B (with a round-off tolerance)
  std::function<double(const Vec&)> set_distance;  // dist_S(u, B), or an upper bound
  std::function<Vec(const Vec&)> project;          // projection onto B; empty if unavailable
  std::function<std::optional<double>(const Vec&)> exact_bmu_distance;  // dist_S(u, B cap S_mu) if known
  std::function<Vec(const Vec&)> G;
  std::function<double(const Vec&)> energy;        // optional; B* = {energy < energy_level}
  double energy_level = std::numeric_limits<double>::infinity();
  std::function<bool(const Vec&)> flagged_region;  // optional region of interest (e.g. a leak patch)

  std::function<Vec(std::mt19937_64&)> sample_start;   // point of B cap S_mu cap B*
  std::function<Vec(std::mt19937_64&)> sample_member;  // point of B

  double T = 10.0;
  double h = 1e-2;
  bool scaling_by_construction = true;
  std::vector<std::string> warnings;

  Vec V(const Vec& u) const { return G(u) - u; }
  double m_norm2(const Vec& u) const { return u.dot(M_lab * u); }
  double s_norm(const Vec& u) const { return std::sqrt(u.dot(S_lab * u)); }
  Vec renormalize(const Vec& u) const { return std::sqrt(mu / m_norm2(u)) * u; }
  Vec step(const Vec& u, const Vec& v, double s) const { return renormalize(u + s * v); }
};

/// Nonnegative orthant in R^4 with diagonal metrics and G = alpha max(Bu, 0).
LabScenario orthant_scenario(std::uint64_t seed = 1);

/// Quarter of the unit circle, invariant under an inward-rotating tangent field.
LabScenario quarter_circle_scenario(double omega = 0.5);

/// Intersection of half-spaces through the origin in R^n (Dykstra projection).
LabScenario halfspace_scenario(int n = 4, int planes = 3, std::uint64_t seed = 2);

/// nu-neighbourhood of the nonnegative cone in R^n with a diagonal metric.
LabScenario cone_neighbourhood_scenario(int n = 5, double nu = 0.1, std::uint64_t seed = 3);

/// Orthant scenario whose G is pushed outside B on the patch u_1 > patch_level sqrt(mu).
LabScenario leaky_orthant_scenario(double leak = 0.05, double patch_level = 0.8, std::uint64_t seed = 1);

/// Disk in the tangent plane of the unit sphere at e_3: convex and closed but
/// not scaling invariant; B cap S_mu = {e_3}.
LabScenario shifted_ball_scenario(double radius = 0.5, double drift = 0.3);

/// Polar cap {x_3 >= c} of the unit sphere rotated about the x_3 axis; not
/// scaling invariant, so the projected Euler scheme drifts out at order h.
LabScenario polar_cap_scenario(double c = 0.5, double omega = 1.0);

struct LimitCheckReport {
  std::string scenario;
  std::vector<double> s;
  std::vector<double> entries;       // s^{-1} dist(u + s V(u), B cap S_mu) (upper bound)
  std::vector<std::string> method;   // "projection" or "exact"
  double slope = 0.0;                // log-log slope over s >= 1e-4
  double C = 0.0;                    // max entry / s over s >= 1e-4
  double final_entry = 0.0;
  double tangency_error = 0.0;       // |V(u)^T M u| / mu
  bool decays = false;
};

/// Default grid 10^{-1} .. 10^{-8}.
std::vector<double> default_s_grid();

LimitCheckReport limit_check(const LabScenario& sc, const Vec& u, const std::vector<double>& s_grid,
                             double final_tol = 1e-6);

struct FlowInvarianceReport {
  std::string scenario;
  int starts = 0;
  double T = 0.0;
  double h = 0.0;
  double tolerance = 0.0;
  double max_violation = 0.0;       // max over starts and times of dist(u(t), B)
  double max_violation_half = 0.0;  // same with step h/2
  double richardson_ratio = std::numeric_limits<double>::quiet_NaN();  // NaN when at round-off
  double max_tangency_error = 0.0;
  double max_mass_error = 0.0;
  std::vector<double> per_start;
  std::vector<int> violating_starts;
  std::vector<int> flagged_starts;  // trajectories that visited the flagged region
  bool pass = false;
};

FlowInvarianceReport flow_invariance_check(const LabScenario& sc, int starts, double tolerance = 1e-8,
                                           std::uint64_t seed = 17);

struct OracleReport {
  std::string check;
  int samples = 0;
  int violations = 0;
  double worst = 0.0;
};

/// theta w + (1 - theta) w' in B for sampled members w, w'.
OracleReport convexity_check(const LabScenario& sc, int samples = 10000, std::uint64_t seed = 19);
/// k w in B for sampled members w and k in (0, 1).
OracleReport scaling_check(const LabScenario& sc, int samples = 10000, std::uint64_t seed = 23);
/// G(u) in B and V(u)^T M u = 0 for sampled sphere points of B.
OracleReport g_membership_check(const LabScenario& sc, int samples = 10000, std::uint64_t seed = 29);

/// The real G(u) of the discretized problem on (-P)_nu with the surrogate
/// distance |u^+|_{H1}. Needs at most 60 degrees of freedom.
LabScenario mirror_pde_scenario(const Discretization& d, double p, double mu, double nu, double mu_tilde,
                                double nu_cap, double rho_star = std::numeric_limits<double>::infinity());

struct GConeReport {
  int sign = -1;
  double nu = 0.0;
  int samples = 0;
  int checks = 0;          // samples inside (sign P)_nu cap B_{rho*}
  int failures = 0;        // G(u) outside (sign P)_{nu/2}
  int negative_lambda = 0; // lambda_u < 0
  double worst_ratio = 0.0;
  bool in_regime = false;
  bool pass = false;
};

/// Samples u in (sign P)_nu cap S_mu cap B_{rho*} and checks G(u) in (sign P)_{nu/2}.
GConeReport g_cone_check(const Discretization& d, double p, double mu, double nu, double rho_star, double mu_tilde,
                         int sign, int samples, std::uint64_t seed = 31);

}  // namespace qgnls
