#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgnls/discretization.hpp"
#include "qgnls/spectrum.hpp"

namespace qgnls {

/// Nonlinearity exponent p (> 6), mass mu (> 0) and total length of the graph.
struct ProblemParams {
  double p = 7.0;
  double mu = 0.0;
  double ell = 1.0;

  void validate() const;
};

/// E(u) = 1/2 u^T A u - (1/p) int |u|^p.
double energy(const Discretization& d, const Vec& u, double p);

/// Energy of the constant state of mass mu, -(1/p) l^{(2-p)/2} mu^{p/2}.
double constant_state_energy(double p, double mu, double ell);

/// Constant field of mass mu, kappa_mu = sqrt(mu / l).
Vec constant_state(const Discretization& d, double mu);

/// Quotient of the graph Gagliardo-Nirenberg inequality,
///   int|u-ubar|^p / ((int|u'|^2)^{(p-2)/4} (int|u-ubar|^2)^{(p+2)/4}).
/// Returns nullopt for (numerically) constant u.
std::optional<double> gn_quotient(const Discretization& d, const Vec& u, double p);

/// Smallest K for which
///   int|u|^p <= pK (int|u'|^2)^{(p-2)/4} mu^{(p+2)/4} + p l^{(2-p)/2} mu^{p/2}
/// holds at u (mu = mass of u). Values <= 0 mean the inequality holds for any K.
std::optional<double> mass_gn_quotient(const Discretization& d, const Vec& u, double p);

/// The inequality int|u|^p <= pK mu^{(p+2)/4}(u^T A u)^{(p-2)/4} + p l^{(2-p)/2} mu^{p/2}.
bool mass_gn_inequality_holds(const Discretization& d, const Vec& u, double p, double K);

struct KEstimate {
  double K = 0.0;
  double max_gn_quotient = 0.0;       // before the safety factor
  double max_mass_gn_quotient = 0.0;  // before the safety factor
  double safety_factor = 1.5;
  int n_samples = 0;
  int skipped = 0;
  std::uint64_t seed = 0;
  std::vector<double> sample_quotients;  // best quotient per sample, 0 for skipped
};

/// Random test field for sample `index` of the stream `seed`; each index has
/// its own generator so sample sets with a common seed are nested.
Vec random_field(const Discretization& d, std::uint64_t seed, std::uint64_t index);

/// Lower estimate of the Gagliardo-Nirenberg constant from sampled and locally
/// optimized fields, inflated by `safety_factor`.
KEstimate estimate_K(const Discretization& d, double p, int n_samples, std::uint64_t seed = 7,
                     double safety_factor = 1.5, int local_iterations = 60);

// Closed forms of the barrier construction.
double b_constant(double p, double K);
double rho_star(double p, double K, double mu);
double g_function(double rho, double p, double K, double mu);
double m1_level(double p, double K, double mu);
double m2_level(double p, double K, double mu, double ell);
double mu1_threshold(double p, double ell, double lambda2);

struct RootResult {
  std::string equation;
  double value = 0.0;
  double residual = 0.0;  // |lhs - rhs| / rhs
  int iterations = 0;
  bool monotone = false;
};

struct IndexThresholds {
  int k = 0;
  double lambda_k = 0.0;
  double lambda_km1 = 0.0;
  RootResult mu_hat;
  RootResult mu_bar;
  RootResult mu_star;                       // general-k form
  std::optional<RootResult> mu_star_pair;   // k = 2 only: (p-1)/p weighted form
  double mu_star_used = 0.0;                // smaller of the available forms
  double mu_check = 0.0;                    // min(mu_hat, mu_bar, mu_star_used, mu_tilde)
};

struct ThresholdReport {
  ProblemParams params;
  double K = 0.0;
  std::optional<KEstimate> k_provenance;
  double b = 0.0;
  double rho_star = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
  double M1_floor = 0.0;  // ((p-6)/(2(p-2))) rho*
  double mu1 = 0.0;
  RootResult mu_tilde;
  std::vector<IndexThresholds> indices;
  double mu_j = 0.0;  // min(mu1, mu_check over indices)
  std::string caveat;

  const IndexThresholds& at(int k) const;
  std::vector<const RootResult*> roots() const;
};

/// All thresholds for (p, mu, l, K) and the requested admissible indices.
ThresholdReport compute_thresholds(const ProblemParams& params, double K, const SpectralData& spec,
                                   const std::vector<int>& indices);

/// M2, the barrier level defining B^{M2}.
double boundary_energy_bound(const ProblemParams& params, double K);

/// Solves f(mu) = rhs for strictly increasing f on (0, inf).
template <class F>
RootResult solve_increasing(const std::string& name, F&& f, double rhs);

}  // namespace qgnls

#include "qgnls/detail/root.hpp"
