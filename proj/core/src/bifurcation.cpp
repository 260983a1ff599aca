#include "qgnls/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qgnls/error.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/gradient.hpp"

namespace qgnls {

std::vector<double> geometric_grid(double mu0, int points, double ratio) {
  if (!(mu0 > 0.0)) throw InvalidArgument("geometric grid needs mu0 > 0");
  if (points < 1) throw InvalidArgument("geometric grid needs at least one point");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("geometric grid ratio must lie in (0, 1)");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = mu0 * std::pow(ratio, i);
  return g;
}

namespace {

BranchPoint make_point(const Discretization& d, const Vec& Mphi, const Vec& u, double lambda, double p, double mu,
                       double residual, int iterations) {
  BranchPoint b;
  b.mu = mu;
  b.u = u;
  const auto g = constrained_gradient(d, u, p, mu);
  b.pde_lambda = lambda;
  b.lambda_u = g.lambda_u;
  b.energy = g.energy;
  b.energy_ratio = g.energy / mu;
  b.kinetic_ratio = g.kinetic / mu;
  b.p_norm_ratio = g.p_integral / mu;
  b.h1_norm = std::sqrt(g.kinetic + g.mass);
  b.residual = residual;
  const double c = u.dot(Mphi);
  b.phi_overlap = c * c / mu;
  const double level = 1e-6 * std::sqrt(mu / d.graph().total_length());
  b.sign_changing = u.minCoeff() < -level && u.maxCoeff() > level;
  b.cone = cone_classify(d, u, default_nu_cap(mu)).classification;
  b.newton_iterations = iterations;
  return b;
}

}  // namespace

std::vector<BranchPoint> sweep(const Discretization& d, const SpectralData& spec, int k,
                               const std::vector<double>& mu_grid, const FlowParams& flow, const SweepOptions& opt) {
  if (!is_admissible(spec, k)) throw InadmissibleIndex(k);
  if (mu_grid.size() < 4) throw InvalidArgument("bifurcation sweep needs at least 4 grid points");
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    if (!(mu_grid[i] > 0.0)) throw InvalidArgument("bifurcation grid entries must be positive");
    if (i > 0 && !(mu_grid[i] < mu_grid[i - 1])) throw InvalidArgument("bifurcation grid must be strictly decreasing");
  }
  const double p = flow.p;
  const Vec Mphi = d.mass_matrix() * spec.phi(k);

  FlowParams fp = flow;
  fp.mode = FlowMode::Solver;
  fp.deflation = spec.leading(k);
  fp.cone_sign = 0;
  fp.store_fields = false;
  fp.max_steps = opt.max_descent_steps;

  std::vector<BranchPoint> branch;
  Vec prev;
  double prev_lambda = -spec.lambda(k);
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    const double mu = mu_grid[i];
    fp.mu = mu;
    fp.nu = default_nu_cap(mu);
    // The residual scales with |u| ~ sqrt(mu); keep the tolerance relative on small states.
    const double tol = std::min(opt.residual_tol, 1e-12 * std::sqrt((spec.lambda(k) + 1.0) * mu));
    NewtonResult nr;
    bool descended = false;
    if (i > 0) {
      const Vec guess = std::sqrt(mu / mu_grid[i - 1]) * prev;
      nr = newton_polish(d, guess, prev_lambda, p, mu, tol);
    }
    if (i == 0 || !nr.converged) {
      const Vec start = i == 0 ? Vec(std::sqrt(mu) * spec.phi(k)) : Vec(std::sqrt(mu / mu_grid[i - 1]) * prev);
      const auto tr = descend(d, start, fp);
      nr = newton_polish(d, tr.terminal, tested_multiplier(d, tr.terminal, p), p, mu, tol);
      descended = true;
    }
    if (!nr.converged) {
      std::ostringstream os;
      os << "continuation of branch k = " << k << " did not converge (residual "
         << nr.residual << ")";
      throw BranchLost(mu, os.str());
    }
    auto b = make_point(d, Mphi, nr.u, nr.lambda, p, mu, nr.residual, nr.iterations);
    b.used_descent = descended;
    if (b.cone != ConeClass::InSStar || !b.sign_changing) {
      std::ostringstream os;
      os << "branch k = " << k << " converged to a cone state (" << to_string(b.cone) << ")";
      throw BranchLost(mu, os.str());
    }
    if (b.phi_overlap < opt.min_overlap) {
      std::ostringstream os;
      os << "branch k = " << k << " left the phi_" << k << " mode (overlap " << b.phi_overlap
         << ")";
      throw BranchLost(mu, os.str());
    }
    prev = b.u;
    prev_lambda = b.pde_lambda;
    branch.push_back(std::move(b));
  }
  return branch;
}

BifurcationVerdict bifurcation_verdict(const std::vector<BranchPoint>& branch, double target, double tol, int k) {
  BifurcationVerdict v;
  v.k = k;
  v.target = target;
  v.tol = tol;
  std::ostringstream diag;
  if (branch.size() < 4) {
    v.diagnostic = "fewer than 4 branch points";
    return v;
  }
  for (const auto& b : branch) {
    v.mu.push_back(b.mu);
    v.deviation.push_back(std::abs(-b.pde_lambda - target));
    v.h1_norm.push_back(b.h1_norm);
    v.energy_deviation.push_back(std::abs(b.energy_ratio - 0.5 * target));
    v.kinetic_deviation.push_back(std::abs(b.kinetic_ratio - target));
  }
  const std::size_t n = branch.size();
  // Resolution of -lambda at each point: rounding plus the Newton residual relative to mu.
  auto floor = [&](std::size_t i) {
    const auto& b = branch[i];
    return std::max(1e-12 * std::max(1.0, target), 10.0 * b.residual * b.h1_norm / b.mu);
  };

  v.deviation_decreasing = true;
  for (std::size_t i = n - 3; i + 1 < n; ++i)
    if (!(v.deviation[i + 1] < v.deviation[i]) && !(v.deviation[i + 1] <= floor(i + 1)))
      v.deviation_decreasing = false;
  v.final_deviation_ok = v.deviation.back() <= tol * target;

  v.h1_decreasing = true;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(v.h1_norm[i + 1] < v.h1_norm[i])) v.h1_decreasing = false;
  v.h1_bound_ok = v.h1_norm.back() * v.h1_norm.back() <= 2.0 * (target + 1.0) * branch.back().mu;

  v.energy_ok = v.energy_deviation.back() <= tol * target;
  v.kinetic_ok = v.kinetic_deviation.back() <= tol * target;
  v.p_norm_drop = branch.back().p_norm_ratio > 0.0 ? branch.front().p_norm_ratio / branch.back().p_norm_ratio
                                                   : std::numeric_limits<double>::infinity();
  v.p_norm_ok = v.p_norm_drop >= 10.0;

  v.cone_clean = true;
  for (const auto& b : branch) {
    if (b.cone != ConeClass::InSStar || !b.sign_changing) {
      v.cone_clean = false;
      diag << "mu = " << b.mu << " is a cone state (" << to_string(b.cone) << "); ";
    }
  }
  if (!v.deviation_decreasing) diag << "|-lambda - lambda_k| not decreasing over the last 3 points; ";
  if (!v.final_deviation_ok) diag << "final |-lambda - lambda_k| = " << v.deviation.back() << " above tolerance; ";
  if (!v.h1_decreasing) diag << "H1 norm not strictly decreasing; ";
  if (!v.h1_bound_ok) diag << "final H1 norm above sqrt(2 (lambda_k + 1) mu); ";
  v.pass = v.cone_clean && v.deviation_decreasing && v.final_deviation_ok && v.h1_decreasing && v.h1_bound_ok;
  v.diagnostic = v.pass ? "PASS" : diag.str();
  return v;
}

}  // namespace qgnls
