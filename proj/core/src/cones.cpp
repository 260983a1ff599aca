#include "qgnls/cones.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qgnls/error.hpp"

namespace qgnls {

std::string to_string(ConeClass c) {
  switch (c) {
    case ConeClass::InPNu: return "IN_P_NU";
    case ConeClass::InMinusPNu: return "IN_MINUS_P_NU";
    case ConeClass::InSStar: return "IN_S_STAR";
  }
  return "?";
}

std::pair<Vec, Vec> split_parts(const Vec& u) {
  return {u.cwiseMax(0.0), (-u).cwiseMax(0.0)};
}

ConeReport cone_classify(const Discretization& d, const Vec& u, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("cone radius nu must be positive");
  const auto [up, um] = split_parts(u);
  ConeReport r;
  r.nu = nu;
  r.dist_plus = d.h1_norm(um);
  r.dist_minus = d.h1_norm(up);
  if (std::min(r.dist_plus, r.dist_minus) > nu)
    r.classification = ConeClass::InSStar;
  else
    r.classification = r.dist_plus <= r.dist_minus ? ConeClass::InPNu : ConeClass::InMinusPNu;
  return r;
}

bool in_cone_neighbourhood(const Discretization& d, const Vec& u, int sign, double nu) {
  const Vec part = sign > 0 ? Vec((-u).cwiseMax(0.0)) : Vec(u.cwiseMax(0.0));
  return d.h1_norm(part) <= nu;
}

namespace {

double surrogate(const Discretization& d, const Vec& u, double& dp, double& dm) {
  const auto [up, um] = split_parts(u);
  dp = d.h1_norm(um);
  dm = d.h1_norm(up);
  return std::min(dp, dm);
}

}  // namespace

SeparationEstimate separation_delta(const Discretization& d, const SpectralData& spec, double mu, double rho_star,
                                    int k, int n_samples, std::uint64_t seed, int max_draws) {
  if (!is_admissible(spec, k)) throw InadmissibleIndex(k);
  SeparationEstimate out;

  // Modes usable inside B_{rho*}: any field of mass mu in their span has
  // u^T A u <= lambda_max mu.
  int last = k - 1;
  while (last + 1 <= spec.count() && spec.lambda(last + 1) * mu < rho_star) ++last;
  out.modes_used = last - (k - 1);
  if (out.modes_used == 0) {
    out.empty_set = true;
    return out;
  }
  const Mat basis = spec.eigenfunctions.middleCols(k - 1, out.modes_used);
  const Vec lam = spec.eigenvalues.segment(k - 1, out.modes_used);

  auto field = [&](const Vec& c) -> Vec { return std::sqrt(mu) * (basis * c) / c.norm(); };
  auto admissible = [&](const Vec& c) { return mu * c.dot(lam.cwiseProduct(c)) / c.squaredNorm() < rho_star; };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double best = std::numeric_limits<double>::infinity();
  Vec best_c;
  int draws = 0;
  while (out.samples < n_samples) {
    if (++draws > max_draws) {
      if (out.samples == 0) throw SamplingBudgetExceeded("separation_delta drew no admissible sample");
      break;
    }
    Vec c(out.modes_used);
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = normal(rng);
    if (!admissible(c)) continue;
    ++out.samples;

    // Pattern search on the coefficient sphere.
    double dp, dm;
    double f = surrogate(d, field(c), dp, dm);
    double step = 0.5;
    while (step > 1e-6) {
      bool improved = false;
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        for (double s : {step, -step}) {
          Vec t = c / c.norm();
          t[i] += s;
          if (t.norm() == 0.0 || !admissible(t)) continue;
          const double ft = surrogate(d, field(t), dp, dm);
          if (ft < f) {
            f = ft;
            c = t / t.norm();
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (f < best) {
      best = f;
      best_c = c;
    }
  }
  out.delta = best;
  out.minimizer = field(best_c);
  surrogate(d, out.minimizer, out.dist_plus_at_min, out.dist_minus_at_min);
  return out;
}

double choose_nu(const SeparationEstimate& sep, double nu_cap) {
  if (!std::isfinite(sep.delta)) return nu_cap;
  return std::min(nu_cap, 0.5 * sep.delta);
}

}  // namespace qgnls
