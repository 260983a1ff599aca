#include "qgnls/gradient.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "qgnls/error.hpp"
#include "qgnls/functional.hpp"

namespace qgnls {

Vec resolvent(const Discretization& d, const Vec& u) {
  const Vec rhs = d.mass_matrix() * u;
  Vec xi = d.solve_h1(rhs);
  // One step of iterative refinement; anything still far off means a corrupt factor.
  Vec r = rhs - d.h1_matrix() * xi;
  xi += d.solve_h1(r);
  r = rhs - d.h1_matrix() * xi;
  const double res = r.norm();
  if (!std::isfinite(res) || res > 1e-8 * rhs.norm())
    throw LinearSolveFailure("resolvent residual " + std::to_string(res) + " relative to |Mu| = " +
                             std::to_string(rhs.norm()));
  return xi;
}

double lagrange_multiplier(const Discretization& d, const Vec& u, double p, double mu) {
  const Vec xi = resolvent(d, u);
  const double uxi = d.m_dot(u, xi);
  if (!(uxi > 0.0)) throw DegeneratePairing(uxi);
  return (mu - d.nonlinear_load(u, p).dot(xi)) / uxi;
}

GradientResult constrained_gradient(const Discretization& d, const Vec& u, double p, double mu) {
  return deflated_gradient(d, u, p, mu, Mat(d.num_dofs(), 0));
}

GradientResult deflated_gradient(const Discretization& d, const Vec& u, double p, double mu, const Mat& Phi) {
  GradientResult r;
  r.xi = resolvent(d, u);
  const Vec N = d.nonlinear_load(u, p);
  r.zeta = d.solve_h1(N);
  const double uxi = d.m_dot(u, r.xi);
  if (!(uxi > 0.0)) throw DegeneratePairing(uxi);
  r.lambda_u = (mu - N.dot(r.xi)) / uxi;
  r.grad = u - r.zeta - r.lambda_u * r.xi;

  if (Phi.cols() > 0) {
    // S-orthogonal projection of grad onto {v : v^T M u = 0, v^T M phi_i = 0}.
    // The constraint representers are S^{-1} M u = xi and S^{-1} M phi_i.
    const Eigen::Index c = Phi.cols() + 1;
    Mat R(d.num_dofs(), c);
    R.col(0) = r.xi;
    R.rightCols(Phi.cols()) = d.solve_h1(Mat(d.mass_matrix() * Phi));
    Mat C(d.num_dofs(), c);
    C.col(0) = d.mass_matrix() * u;
    C.rightCols(Phi.cols()) = d.mass_matrix() * Phi;
    const Mat G = C.transpose() * R;
    const Vec rhs = C.transpose() * r.grad;
    const Vec beta = G.ldlt().solve(rhs);
    r.grad -= R * beta;
  }

  r.h1_norm_grad = d.h1_norm(r.grad);
  r.kinetic = d.kinetic(u);
  r.p_integral = d.integrate_power(u, p);
  r.energy = 0.5 * r.kinetic - r.p_integral / p;
  r.mass = d.mass(u);
  return r;
}

double stationary_residual(const Discretization& d, const Vec& u, double p, double lambda) {
  const Vec r = d.stiffness() * u + lambda * (d.mass_matrix() * u) - d.nonlinear_load(u, p);
  return std::sqrt(std::max(0.0, r.dot(d.solve_h1(r))));
}

double tested_multiplier(const Discretization& d, const Vec& u, double p) {
  return (d.integrate_power(u, p) - d.kinetic(u)) / d.mass(u);
}

}  // namespace qgnls
