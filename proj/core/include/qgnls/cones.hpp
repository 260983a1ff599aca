#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "qgnls/discretization.hpp"
#include "qgnls/spectrum.hpp"

namespace qgnls {

enum class ConeClass { InPNu, InMinusPNu, InSStar };

std::string to_string(ConeClass c);

/// Surrogate distances: dist_plus = |u^-|_{H1} >= dist(u, P),
/// dist_minus = |u^+|_{H1} >= dist(u, -P).
struct ConeReport {
  double dist_plus = 0.0;
  double dist_minus = 0.0;
  double nu = 0.0;
  ConeClass classification = ConeClass::InSStar;
};

/// Nodal clamp: first = u^+, second = u^-, u = u^+ - u^-.
std::pair<Vec, Vec> split_parts(const Vec& u);

ConeReport cone_classify(const Discretization& d, const Vec& u, double nu);

/// Whether u lies in (sign * P)_nu for sign = +1 or -1.
bool in_cone_neighbourhood(const Discretization& d, const Vec& u, int sign, double nu);

struct SeparationEstimate {
  double delta = std::numeric_limits<double>::infinity();
  Vec minimizer;                 // empty when the sampled set is empty
  int samples = 0;
  int modes_used = 0;            // eigenmodes k.. with lambda_i mu < rho*
  bool empty_set = false;        // S_{k-1}^perp intersected with B_{rho*} has no points
  double dist_plus_at_min = 0.0;
  double dist_minus_at_min = 0.0;
};

/// Sampled minimum of min(dist_plus, dist_minus) over S_{k-1}^perp within
/// B_{rho*}^mu, drawn from the span of eigenmodes k.. whose Rayleigh
/// quotient keeps u^T A u < rho*, followed by local pattern search.
SeparationEstimate separation_delta(const Discretization& d, const SpectralData& spec, double mu, double rho_star,
                                    int k, int n_samples = 200, std::uint64_t seed = 11,
                                    int max_draws = 100000);

/// nu = min(nu_cap, 0.5 * delta); when delta is infinite nu_cap is used.
double choose_nu(const SeparationEstimate& sep, double nu_cap);

/// Default cap when nothing else constrains nu: 0.1 sqrt(mu).
inline double default_nu_cap(double mu) { return 0.1 * std::sqrt(mu); }

}  // namespace qgnls
