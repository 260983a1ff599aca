#pragma once

#include "qgnls/discretization.hpp"

namespace qgnls {

/// Constrained H1 gradient grad = u - G(u), G(u) = S^{-1}(N(u) + lambda_u M u).
struct GradientResult {
  Vec grad;
  double lambda_u = 0.0;   // tangency multiplier in the shifted (S = A + M) convention
  Vec xi;                  // S^{-1} M u
  Vec zeta;                // S^{-1} N(u)
  double h1_norm_grad = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;    // u^T A u
  double p_integral = 0.0; // int |u|^p
  double mass = 0.0;

  /// Multiplier of -u'' + lambda u = |u|^{p-2} u, equal to 1 - lambda_u.
  double pde_lambda() const { return 1.0 - lambda_u; }
  Vec G(const Vec& u) const { return u - grad; }
};

/// xi with S xi = M u.
Vec resolvent(const Discretization& d, const Vec& u);

/// lambda_u = (mu - <N(u), xi>) / <u, xi>, mu the mass constraint value.
double lagrange_multiplier(const Discretization& d, const Vec& u, double p, double mu);

GradientResult constrained_gradient(const Discretization& d, const Vec& u, double p, double mu);

/// Gradient of E restricted to the sphere intersected with the M-orthogonal
/// complement of the columns of Phi (M-orthonormal eigenfunctions). With an
/// empty Phi this equals constrained_gradient.
GradientResult deflated_gradient(const Discretization& d, const Vec& u, double p, double mu, const Mat& Phi);

/// Dual (S^{-1}) norm of A u + lambda M u - N(u).
double stationary_residual(const Discretization& d, const Vec& u, double p, double lambda);

/// (int|u|^p - u^T A u) / mu: the multiplier obtained by testing the equation with u.
double tested_multiplier(const Discretization& d, const Vec& u, double p);

}  // namespace qgnls
