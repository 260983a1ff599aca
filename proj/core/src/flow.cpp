#include "qgnls/flow.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "qgnls/error.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/gradient.hpp"

namespace qgnls {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "CONVERGED";
    case Termination::MaxSteps: return "MAX_STEPS";
    case Termination::LeftBarrier: return "LEFT_BARRIER";
    case Termination::Stalled: return "STALLED";
    case Termination::SingularVelocity: return "SINGULAR_VELOCITY";
    case Termination::Frozen: return "FROZEN";
    case Termination::HorizonReached: return "HORIZON_REACHED";
  }
  return "?";
}

void FlowParams::validate() const {
  if (!(p > 2.0)) throw InvalidArgument("flow: p must exceed 2");
  if (!(mu > 0.0)) throw InvalidArgument("flow: mu must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("flow: shrink must lie in (0, 1)");
  if (!(grow >= 1.0)) throw InvalidArgument("flow: grow must be >= 1");
  if (!(initial_step > 0.0)) throw InvalidArgument("flow: initial_step must be positive");
  if (max_steps < 0) throw InvalidArgument("flow: max_steps must be >= 0");
  if (cone_sign != 0 && !(nu > 0.0)) throw InvalidArgument("flow: cone restriction needs nu > 0");
  if (mode == FlowMode::Deformation) {
    if (!(eps1 > 0.0 && 3.0 * eps1 <= eps_bar * (1.0 + 1e-12)))
      throw InvalidArgument("flow: deformation needs 0 < 3 eps1 <= eps_bar");
    if (!(delta1 > 0.0)) throw InvalidArgument("flow: deformation needs delta1 > 0");
    if (nu > 0.0 && !(delta1 < nu)) throw InvalidArgument("flow: deformation needs delta1 < nu");
    if (!(delta1 <= delta_tilde)) throw InvalidArgument("flow: deformation needs delta1 <= delta_tilde");
    if (!(t_max > 0.0)) throw InvalidArgument("flow: deformation needs t_max > 0");
  }
}

Vec step_project(const Discretization& d, const Vec& u, const Vec& V, double s, double mu) {
  Vec w = u + s * V;
  return std::sqrt(mu / d.mass(w)) * w;
}

namespace {

void project_out(const Discretization& d, const Mat& Phi, Vec& u) {
  if (Phi.cols() == 0) return;
  u -= Phi * (Phi.transpose() * (d.mass_matrix() * u));
}

TrajectoryState make_state(const Discretization& d, double t, const GradientResult& g, const Vec& u, double nu) {
  TrajectoryState s;
  s.t = t;
  s.energy = g.energy;
  s.mass = g.mass;
  s.h1_norm_grad = g.h1_norm_grad;
  s.lambda_u = g.lambda_u;
  s.kinetic = g.kinetic;
  const auto c = cone_classify(d, u, nu);
  s.cone = c.classification;
  s.dist_plus = c.dist_plus;
  s.dist_minus = c.dist_minus;
  return s;
}

void record(Trajectory& tr, const FlowParams& prm, TrajectoryState s, const Vec& u) {
  tr.states.push_back(s);
  if (prm.store_fields) tr.fields.push_back(u);
}

}  // namespace

Trajectory descend(const Discretization& d, const Vec& u0, const FlowParams& prm) {
  prm.validate();
  const double mu = prm.mu, p = prm.p;
  const double nu = prm.nu > 0.0 ? prm.nu : default_nu_cap(mu);
  const Mat Phi = prm.deflation.cols() > 0 ? prm.deflation : Mat(d.num_dofs(), 0);

  Trajectory tr;
  Vec u = u0;
  project_out(d, Phi, u);
  u *= std::sqrt(mu / d.mass(u));

  if (prm.enforce_barrier && !(d.kinetic(u) < prm.rho_star && energy(d, u, p) < prm.m2)) {
    const auto g = deflated_gradient(d, u, p, mu, Phi);
    record(tr, prm, make_state(d, 0.0, g, u, nu), u);
    tr.terminal = u;
    tr.reason = Termination::LeftBarrier;
    tr.final_grad_norm = g.h1_norm_grad;
    return tr;
  }

  double s = prm.initial_step;
  double t = 0.0;
  for (int step = 0;; ++step) {
    const auto g = deflated_gradient(d, u, p, mu, Phi);
    tr.min_lambda_u = std::min(tr.min_lambda_u, g.lambda_u);
    tr.max_lambda_u = std::max(tr.max_lambda_u, g.lambda_u);
    tr.final_grad_norm = g.h1_norm_grad;

    const bool converged = g.h1_norm_grad <= prm.tol_rel * std::max(1.0, std::abs(g.energy));
    const bool out_of_budget = step >= prm.max_steps;
    if (step % std::max(1, prm.record_every) == 0 || converged || out_of_budget)
      record(tr, prm, make_state(d, t, g, u, nu), u);
    if (converged) {
      tr.reason = Termination::Converged;
      break;
    }
    if (out_of_budget) {
      tr.reason = Termination::MaxSteps;
      break;
    }

    // Energies live at the scale |E|; allow rounding-level slack in the Armijo test.
    const double slack = 1e-14 * std::max(std::abs(g.energy), std::numeric_limits<double>::min());
    const double g2 = g.h1_norm_grad * g.h1_norm_grad;
    bool accepted = false;
    while (s >= prm.min_step) {
      Vec trial = step_project(d, u, -g.grad, s, mu);
      if (Phi.cols() > 0) {
        project_out(d, Phi, trial);
        trial *= std::sqrt(mu / d.mass(trial));
      }
      const double et = energy(d, trial, p);
      // The slack only relaxes the sufficient-decrease margin; the energy itself never rises.
      bool ok = et <= g.energy && et <= g.energy - prm.armijo * s * g2 + slack;
      if (ok && prm.enforce_barrier) ok = d.kinetic(trial) < prm.rho_star && et < prm.m2;
      if (ok && prm.cone_sign != 0) ok = in_cone_neighbourhood(d, trial, prm.cone_sign, nu);
      if (ok) {
        u = std::move(trial);
        t += s;
        accepted = true;
        break;
      }
      ++tr.rejected_steps;
      s *= prm.shrink;
    }
    if (!accepted) {
      if (tr.states.empty() || tr.states.back().t != t) record(tr, prm, make_state(d, t, g, u, nu), u);
      tr.reason = Termination::Stalled;
      break;
    }
    ++tr.steps;
    s = std::min(prm.max_step, s * prm.grow);
  }
  tr.terminal = u;
  return tr;
}

double band_cutoff(double energy, double c, double eps1) {
  return std::clamp((3.0 * eps1 - std::abs(energy - c)) / eps1, 0.0, 1.0);
}

double inventory_cutoff(double distance, double delta1) {
  const double lo = delta1 / 3.0, hi = delta1 / 2.0;
  return std::clamp((distance - lo) / (hi - lo), 0.0, 1.0);
}

Trajectory deformation_flow(const Discretization& d, const Vec& u0, const FlowParams& prm,
                            const std::vector<Vec>& inventory) {
  FlowParams q = prm;
  q.mode = FlowMode::Deformation;
  q.validate();
  const double mu = q.mu, p = q.p;
  const double nu = q.nu > 0.0 ? q.nu : default_nu_cap(mu);

  Trajectory tr;
  Vec u = u0 * std::sqrt(mu / d.mass(u0));
  const double disp = q.max_displacement > 0.0 ? q.max_displacement : 1e-4 * d.h1_norm(u);

  double t = 0.0;
  for (int step = 0;; ++step) {
    const auto g = constrained_gradient(d, u, p, mu);
    tr.min_lambda_u = std::min(tr.min_lambda_u, g.lambda_u);
    tr.max_lambda_u = std::max(tr.max_lambda_u, g.lambda_u);
    tr.final_grad_norm = g.h1_norm_grad;

    double dist = std::numeric_limits<double>::infinity();
    for (const auto& w : inventory) dist = std::min(dist, d.h1_norm(u - w));
    const double h = band_cutoff(g.energy, q.level_c, q.eps1);
    const double y = inventory_cutoff(dist, q.delta1);

    auto st = make_state(d, t, g, u, nu);
    st.h = h;
    st.y = y;
    const bool done = t >= q.t_max || step >= q.max_steps;
    if (step % std::max(1, q.record_every) == 0 || done) record(tr, q, st, u);
    if (t >= q.t_max) {
      tr.reason = Termination::HorizonReached;
      break;
    }
    if (step >= q.max_steps) {
      tr.reason = Termination::MaxSteps;
      break;
    }
    if (h * y == 0.0) {
      // The velocity vanishes here and depends only on the state: the flow is
      // stationary for all later times.
      if (tr.states.back().t != t) record(tr, q, st, u);
      st.t = q.t_max;
      record(tr, q, st, u);
      tr.reason = Termination::Frozen;
      break;
    }
    if (g.h1_norm_grad < 1e-14) {
      if (tr.states.back().t != t) record(tr, q, st, u);
      tr.reason = Termination::SingularVelocity;
      break;
    }
    const double speed = h * y / g.h1_norm_grad;  // |V|_S
    const double dt = std::min(q.t_max - t, disp / speed);
    const Vec V = -(h * y / (g.h1_norm_grad * g.h1_norm_grad)) * g.grad;
    u = step_project(d, u, V, dt, mu);
    t += dt;
    ++tr.steps;
  }
  tr.terminal = u;
  return tr;
}

NewtonResult newton_polish(const Discretization& d, const Vec& u0, double lambda0, double p, double mu, double tol,
                           int max_iterations) {
  const Eigen::Index n = d.num_dofs();
  const SpMat& A = d.stiffness();
  const SpMat& M = d.mass_matrix();

  NewtonResult r;
  r.u = u0 * std::sqrt(mu / d.mass(u0));
  r.lambda = lambda0;
  r.residual = stationary_residual(d, r.u, p, r.lambda);
  const double floor = 1e-13 * d.h1_norm(r.u);
  auto done = [&] { return r.residual <= tol || r.residual <= floor; };

  for (int it = 0; it < max_iterations && !done(); ++it) {
    const Vec Mu = M * r.u;
    const Vec F1 = A * r.u + r.lambda * Mu - d.nonlinear_load(r.u, p);
    const double F2 = 0.5 * (r.u.dot(Mu) - mu);

    SpMat K = A + r.lambda * M - d.nonlinear_jacobian(r.u, p);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(K.nonZeros() + 2 * n);
    for (int k = 0; k < K.outerSize(); ++k)
      for (SpMat::InnerIterator itk(K, k); itk; ++itk) t.emplace_back(itk.row(), itk.col(), itk.value());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (Mu[i] == 0.0) continue;
      t.emplace_back(i, n, Mu[i]);
      t.emplace_back(n, i, Mu[i]);
    }
    SpMat J(n + 1, n + 1);
    J.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) break;
    Vec rhs(n + 1);
    rhs.head(n) = -F1;
    rhs[n] = -F2;
    const Vec delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !delta.allFinite()) break;

    // Damped update: accept the first step length that lowers the residual.
    bool improved = false;
    for (double a = 1.0; a > 1e-3; a *= 0.5) {
      Vec un = r.u + a * delta.head(n);
      un *= std::sqrt(mu / d.mass(un));
      const double ln = r.lambda + a * delta[n];
      const double res = stationary_residual(d, un, p, ln);
      if (res < r.residual) {
        r.u = std::move(un);
        r.lambda = ln;
        r.residual = res;
        improved = true;
        break;
      }
    }
    ++r.iterations;
    if (!improved) break;
  }
  r.converged = done();
  return r;
}

AuditReport cone_invariance_audit(const Discretization& d, const Trajectory& traj, double nu, double p, double mu,
                                  double mu_tilde, double rho_star) {
  AuditReport a;
  a.in_regime = mu <= mu_tilde;
  if (traj.states.empty()) {
    a.note = "empty trajectory";
    return a;
  }
  const ConeClass c0 = traj.fields.empty() ? traj.states.front().cone
                                           : cone_classify(d, traj.fields.front(), nu).classification;
  if (c0 == ConeClass::InSStar) {
    a.note = "not applicable (started outside D*)";
    return a;
  }
  a.applicable = true;
  const int sign = c0 == ConeClass::InPNu ? 1 : -1;

  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const bool inside = traj.fields.empty()
                            ? traj.states[i].cone != ConeClass::InSStar
                            : in_cone_neighbourhood(d, traj.fields[i], 1, nu) ||
                                  in_cone_neighbourhood(d, traj.fields[i], -1, nu);
    bool g_ok = true;
    if (!traj.fields.empty() && d.kinetic(traj.fields[i]) < rho_star) {
      const Vec& u = traj.fields[i];
      const auto g = constrained_gradient(d, u, p, mu);
      const Vec G = u - g.grad;
      const int s = in_cone_neighbourhood(d, u, sign, nu) ? sign : -sign;
      const Vec part = s > 0 ? Vec((-G).cwiseMax(0.0)) : Vec(G.cwiseMax(0.0));
      const double ratio = d.h1_norm(part) / (0.5 * nu);
      a.worst_g_ratio = std::max(a.worst_g_ratio, ratio);
      ++a.g_checks;
      g_ok = ratio <= 1.0;
      if (!g_ok) ++a.g_failures;
    }
    if (!inside && !a.exited) {
      a.exited = true;
      a.exit_index = i;
      a.exit_time = traj.states[i].t;
      a.g_ok_at_exit = g_ok;
    }
  }
  a.violation = a.exited && a.in_regime;
  if (!a.exited)
    a.note = "invariant over the recorded run";
  else
    a.note = a.in_regime ? "left D*(nu) inside the invariance regime" : "left D*(nu) outside the invariance regime";
  if (traj.fields.empty()) a.note += "; G(u) check skipped (fields not stored)";
  return a;
}

}  // namespace qgnls
