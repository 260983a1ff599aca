#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "qgnls/cones.hpp"
#include "qgnls/discretization.hpp"

namespace qgnls {

enum class FlowMode { Solver, Deformation };

enum class Termination { Converged, MaxSteps, LeftBarrier, Stalled, SingularVelocity, Frozen, HorizonReached };

std::string to_string(Termination t);

struct FlowParams {
  FlowMode mode = FlowMode::Solver;
  double p = 7.0;
  double mu = 0.0;

  // Solver mode: backtracking steepest descent.
  double initial_step = 1.0;
  double shrink = 0.5;
  double grow = 1.25;
  double armijo = 1e-4;
  double max_step = 4.0;
  double min_step = 1e-14;
  int max_steps = 20000;
  double tol_rel = 1e-9;  // converged when |grad|_S <= tol_rel * max(1, |E|)

  // Barrier B^{M2}: reject steps with u^T A u >= rho*.
  bool enforce_barrier = false;
  double rho_star = std::numeric_limits<double>::infinity();
  double m2 = std::numeric_limits<double>::infinity();

  // Optional M-orthonormal columns the iterate stays orthogonal to.
  Mat deflation;

  // Optional cone restriction: reject steps leaving (cone_sign * P)_nu.
  int cone_sign = 0;
  // Radius used for recording cone classes (and for the restriction).
  double nu = 0.0;

  // Deformation mode (cutoff flow with unit energy-decrease rate).
  double level_c = 0.0;
  double eps1 = 0.0;
  double eps_bar = 0.0;
  double delta1 = 0.0;
  double delta_tilde = std::numeric_limits<double>::infinity();
  double t_max = 1.0;
  double max_displacement = 0.0;  // per step, in the H1 norm; 0 selects 1e-4 |u0|_{H1}

  bool store_fields = false;
  int record_every = 1;

  void validate() const;
};

struct TrajectoryState {
  double t = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  double h1_norm_grad = 0.0;
  double lambda_u = 0.0;
  double kinetic = 0.0;
  ConeClass cone = ConeClass::InSStar;
  double dist_plus = 0.0;
  double dist_minus = 0.0;
  double h = 1.0;  // deformation cutoffs at this state
  double y = 1.0;
};

struct Trajectory {
  std::vector<TrajectoryState> states;
  std::vector<Vec> fields;  // filled when store_fields is set
  Vec terminal;
  Termination reason = Termination::MaxSteps;
  int steps = 0;
  int rejected_steps = 0;
  double min_lambda_u = std::numeric_limits<double>::infinity();
  double max_lambda_u = -std::numeric_limits<double>::infinity();
  double final_grad_norm = 0.0;
};

/// sqrt(mu) (u + sV) / |u + sV|_M.
Vec step_project(const Discretization& d, const Vec& u, const Vec& V, double s, double mu);

/// Steepest descent on the mass sphere with V = -grad (deflated if requested).
Trajectory descend(const Discretization& d, const Vec& u0, const FlowParams& params);

/// Cutoff flow V = -h y grad / |grad|^2 integrated by explicit Euler with a
/// displacement cap; y vanishes within delta1/3 of the inventory.
Trajectory deformation_flow(const Discretization& d, const Vec& u0, const FlowParams& params,
                            const std::vector<Vec>& critical_inventory);

/// Energy-band cutoff h and inventory cutoff y.
double band_cutoff(double energy, double c, double eps1);
double inventory_cutoff(double distance, double delta1);

struct NewtonResult {
  Vec u;
  double lambda = 0.0;  // multiplier of -u'' + lambda u = |u|^{p-2} u
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Newton iteration on the bordered system
///   A u + lambda M u - N(u) = 0,  u^T M u = mu.
NewtonResult newton_polish(const Discretization& d, const Vec& u0, double lambda0, double p, double mu,
                           double tol = 1e-12, int max_iterations = 30);

struct AuditReport {
  bool applicable = false;
  bool exited = false;
  double exit_time = 0.0;
  std::size_t exit_index = 0;
  bool in_regime = false;  // mu <= mu_tilde
  bool violation = false;  // exited while in regime
  int g_checks = 0;
  int g_failures = 0;
  double worst_g_ratio = 0.0;  // max over audited states of dist(G(u)) / (nu / 2)
  bool g_ok_at_exit = true;
  std::string note;
};

/// Checks whether a trajectory that starts in D*(nu) stays there, and evaluates
/// G(u) in (+-P)_{nu/2} at every recorded state inside B_{rho*} (needs stored fields).
AuditReport cone_invariance_audit(const Discretization& d, const Trajectory& traj, double nu, double p, double mu,
                                  double mu_tilde, double rho_star);

}  // namespace qgnls
