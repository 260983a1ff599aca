#include "qgnls/functional.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "qgnls/error.hpp"

namespace qgnls {

void ProblemParams::validate() const {
  if (!(p > 6.0)) throw InvalidArgument("exponent p must satisfy p > 6 (mass supercritical)");
  if (!(mu > 0.0)) throw InvalidArgument("mass mu must be positive");
  if (!(ell > 0.0)) throw InvalidArgument("total length must be positive");
}

double energy(const Discretization& d, const Vec& u, double p) {
  return 0.5 * d.kinetic(u) - d.integrate_power(u, p) / p;
}

double constant_state_energy(double p, double mu, double ell) {
  return -std::pow(ell, (2.0 - p) / 2.0) * std::pow(mu, p / 2.0) / p;
}

Vec constant_state(const Discretization& d, double mu) {
  return d.constant(std::sqrt(mu / d.graph().total_length()));
}

namespace {

Vec remove_mean(const Discretization& d, const Vec& u) { return u.array() - d.mean_value(u); }

struct GnTerms {
  double P, rho, m;
};

GnTerms gn_terms(const Discretization& d, const Vec& w, double p) {
  return {d.integrate_power(w, p), d.kinetic(w), d.mass(w)};
}

// Relative size below which a field counts as constant.
bool degenerate(const Discretization& d, const Vec& u, const Vec& w) {
  const double scale = std::max(d.mass(u), std::numeric_limits<double>::min());
  return d.mass(w) <= 1e-24 * scale || d.kinetic(w) <= 0.0;
}

double log_gn(const Discretization& d, const Vec& w, double p) {
  const auto t = gn_terms(d, w, p);
  return std::log(t.P) - (p - 2.0) / 4.0 * std::log(t.rho) - (p + 2.0) / 4.0 * std::log(t.m);
}

Vec grad_log_gn(const Discretization& d, const Vec& w, double p) {
  const auto t = gn_terms(d, w, p);
  return p * d.nonlinear_load(w, p) / t.P - (p - 2.0) / 2.0 * (d.stiffness() * w) / t.rho -
         (p + 2.0) / 2.0 * (d.mass_matrix() * w) / t.m;
}

// K implied by int|u|^p <= pK mu^{(p+2)/4} (u^T A u)^{(p-2)/4} + p l^{(2-p)/2} mu^{p/2};
// nullopt when the field is constant.
std::optional<double> mass_quotient(const Discretization& d, const Vec& u, double p) {
  const Vec w = remove_mean(d, u);
  if (degenerate(d, u, w)) return std::nullopt;
  const double ell = d.graph().total_length();
  const double mu = d.mass(u);
  const double num = d.integrate_power(u, p) - p * std::pow(ell, (2.0 - p) / 2.0) * std::pow(mu, p / 2.0);
  return num / (p * std::pow(d.kinetic(u), (p - 2.0) / 4.0) * std::pow(mu, (p + 2.0) / 4.0));
}

Vec grad_log_mass_quotient(const Discretization& d, const Vec& u, double p) {
  const double ell = d.graph().total_length();
  const double c0 = p * std::pow(ell, (2.0 - p) / 2.0);
  const double mu = d.mass(u);
  const double num = d.integrate_power(u, p) - c0 * std::pow(mu, p / 2.0);
  const Vec dnum = p * d.nonlinear_load(u, p) - c0 * p * std::pow(mu, p / 2.0 - 1.0) * (d.mass_matrix() * u);
  return dnum / num - (p - 2.0) / 2.0 * (d.stiffness() * u) / d.kinetic(u) -
         (p + 2.0) / 2.0 * (d.mass_matrix() * u) / mu;
}

// Preconditioned gradient ascent on a scale-invariant objective.
template <class Obj, class Grad, class Proj>
double ascend(const Discretization& d, Vec& x, Obj&& obj, Grad&& grad, Proj&& proj, int iterations) {
  x /= d.h1_norm(x);
  double f = obj(x);
  double t = 0.25;
  for (int it = 0; it < iterations && t > 1e-10; ++it) {
    Vec dir = proj(d.solve_h1(grad(x)));
    const double dn = d.h1_norm(dir);
    if (!(dn > 0.0) || !std::isfinite(dn)) break;
    dir /= dn;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Vec y = x + t * dir;
      const double ny = d.h1_norm(y);
      if (ny > 0.0) {
        y /= ny;
        const double fy = obj(y);
        if (std::isfinite(fy) && fy > f) {
          x = std::move(y);
          f = fy;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) break;
    t = std::min(1.0, 1.5 * t);
  }
  return f;
}

}  // namespace

std::optional<double> gn_quotient(const Discretization& d, const Vec& u, double p) {
  const Vec w = remove_mean(d, u);
  if (degenerate(d, u, w)) return std::nullopt;
  return std::exp(log_gn(d, w, p));
}

std::optional<double> mass_gn_quotient(const Discretization& d, const Vec& u, double p) {
  return mass_quotient(d, u, p);
}

bool mass_gn_inequality_holds(const Discretization& d, const Vec& u, double p, double K) {
  const double ell = d.graph().total_length();
  const double mu = d.mass(u);
  const double lhs = d.integrate_power(u, p);
  const double rhs = p * K * std::pow(mu, (p + 2.0) / 4.0) * std::pow(d.kinetic(u), (p - 2.0) / 4.0) +
                     p * std::pow(ell, (2.0 - p) / 2.0) * std::pow(mu, p / 2.0);
  return lhs <= rhs * (1.0 + 1e-12);
}

Vec random_field(const Discretization& d, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  const auto& g = d.graph();
  const double ell = g.total_length();

  auto pick_edge = [&]() {
    double r = unif(rng) * ell;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      r -= g.edges()[e].length;
      if (r <= 0.0) return e;
    }
    return g.num_edges() - 1;
  };

  const int kind = static_cast<int>(unif(rng) * 3.0);
  const double offset = normal(rng) * unif(rng);
  if (kind == 0) {
    // Localized bump, possibly riding on a constant.
    const std::size_t e = pick_edge();
    const double len = g.edges()[e].length;
    const double s0 = unif(rng) < 0.3 ? (unif(rng) < 0.5 ? 0.0 : len) : unif(rng) * len;
    const double width = len * std::pow(10.0, -2.0 + 2.0 * unif(rng));
    const double amp = unif(rng) < 0.5 ? 1.0 : -1.0;
    return d.interpolate([&](std::size_t edge, double s) {
      if (edge != e) return offset;
      const double c = 1.0 / std::cosh((s - s0) / width);
      return offset + amp * c * c;
    });
  }
  if (kind == 1) {
    // A few random cosine modes per edge.
    std::vector<std::array<double, 3>> modes;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      for (int j = 1; j <= 4; ++j) modes.push_back({normal(rng) / j, unif(rng) * 2.0 * std::numbers::pi, 0.0});
    }
    return d.interpolate([&](std::size_t edge, double s) {
      const double len = g.edges()[edge].length;
      double v = offset;
      for (int j = 1; j <= 4; ++j) {
        const auto& m = modes[edge * 4 + (j - 1)];
        v += m[0] * std::cos(j * std::numbers::pi * s / len + m[1]);
      }
      return v;
    });
  }
  Vec u(d.num_dofs());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = offset + normal(rng);
  return u;
}

KEstimate estimate_K(const Discretization& d, double p, int n_samples, std::uint64_t seed, double safety_factor,
                     int local_iterations) {
  if (n_samples < 1) throw InvalidArgument("estimate_K needs at least one sample");
  if (!(p > 2.0)) throw InvalidArgument("estimate_K needs p > 2");
  KEstimate out;
  out.seed = seed;
  out.n_samples = n_samples;
  out.safety_factor = safety_factor;

  auto mean_zero = [&](Vec v) { return remove_mean(d, v); };
  auto identity = [](Vec v) { return v; };

  for (int s = 0; s < n_samples; ++s) {
    const Vec u0 = random_field(d, seed, static_cast<std::uint64_t>(s));
    const Vec w0 = remove_mean(d, u0);
    if (degenerate(d, u0, w0)) {
      ++out.skipped;
      out.sample_quotients.push_back(0.0);
      continue;
    }
    Vec w = w0;
    const double lg = ascend(
        d, w, [&](const Vec& x) { return log_gn(d, x, p); }, [&](const Vec& x) { return grad_log_gn(d, x, p); },
        mean_zero, local_iterations);
    const double qg = std::exp(lg);

    double qm = 0.0;
    if (auto q0 = mass_quotient(d, u0, p); q0 && *q0 > 0.0) {
      Vec u = u0;
      auto obj = [&](const Vec& x) {
        auto q = mass_quotient(d, x, p);
        return q && *q > 0.0 ? std::log(*q) : -std::numeric_limits<double>::infinity();
      };
      qm = std::exp(ascend(
          d, u, obj, [&](const Vec& x) { return grad_log_mass_quotient(d, x, p); }, identity, local_iterations));
    }
    out.max_gn_quotient = std::max(out.max_gn_quotient, qg);
    out.max_mass_gn_quotient = std::max(out.max_mass_gn_quotient, qm);
    out.sample_quotients.push_back(std::max(qg, qm));
  }
  out.K = safety_factor * std::max(out.max_gn_quotient, out.max_mass_gn_quotient);
  if (!(out.K > 0.0)) throw SamplingBudgetExceeded("every K sample was degenerate");
  return out;
}

double b_constant(double p, double K) { return std::pow(2.0 / ((p - 2.0) * K), 4.0 / (p - 6.0)); }

double rho_star(double p, double K, double mu) {
  const double b = b_constant(p, K);
  return std::min(b, b * std::pow(mu, -(p + 2.0) / (p - 6.0)));
}

double g_function(double rho, double p, double K, double mu) {
  return 0.5 * rho - K * std::pow(mu, (p + 2.0) / 4.0) * std::pow(rho, (p - 2.0) / 4.0);
}

double m1_level(double p, double K, double mu) { return g_function(rho_star(p, K, mu), p, K, mu); }

double m2_level(double p, double K, double mu, double ell) {
  return m1_level(p, K, mu) - std::pow(ell, (2.0 - p) / 2.0) * std::pow(mu, p / 2.0);
}

double mu1_threshold(double p, double ell, double lambda2) {
  return ell * std::pow(lambda2 / (p - 2.0), 2.0 / (p - 2.0));
}

double boundary_energy_bound(const ProblemParams& params, double K) {
  return m2_level(params.p, K, params.mu, params.ell);
}

const IndexThresholds& ThresholdReport::at(int k) const {
  for (const auto& t : indices)
    if (t.k == k) return t;
  throw InvalidArgument("threshold report has no entry for k = " + std::to_string(k));
}

std::vector<const RootResult*> ThresholdReport::roots() const {
  std::vector<const RootResult*> r{&mu_tilde};
  for (const auto& t : indices) {
    r.push_back(&t.mu_hat);
    r.push_back(&t.mu_bar);
    r.push_back(&t.mu_star);
    if (t.mu_star_pair) r.push_back(&*t.mu_star_pair);
  }
  return r;
}

ThresholdReport compute_thresholds(const ProblemParams& params, double K, const SpectralData& spec,
                                   const std::vector<int>& indices) {
  params.validate();
  if (!(K > 0.0)) throw InvalidArgument("K must be positive");
  if (spec.count() < 2) throw InvalidArgument("thresholds need at least two eigenvalues");

  const double p = params.p, mu = params.mu, ell = params.ell;
  const double lp = std::pow(ell, (2.0 - p) / 2.0);

  ThresholdReport r;
  r.params = params;
  r.K = K;
  r.b = b_constant(p, K);
  r.rho_star = rho_star(p, K, mu);
  r.M1 = m1_level(p, K, mu);
  r.M2 = r.M1 - lp * std::pow(mu, p / 2.0);
  r.M1_floor = (p - 6.0) / (2.0 * (p - 2.0)) * r.rho_star;
  r.mu1 = mu1_threshold(p, ell, spec.lambda(2));
  r.caveat =
      "K is a sampled lower estimate of the Gagliardo-Nirenberg constant inflated by a safety factor; "
      "thresholds are indicative, not certified";

  const double cb = std::pow(2.0 / ((p - 2.0) * K), (p - 2.0) / (p - 6.0));
  r.mu_tilde = solve_increasing(
      "mu_tilde",
      [&](double m) { return p * K * cb * std::pow(m, (p - 2.0) / 4.0) + p * lp * std::pow(m, (p - 2.0) / 2.0); },
      1.0);

  const double rhs_b = (p - 6.0) / (p - 2.0) * r.b;
  std::vector<int> ks = indices.empty() ? std::vector<int>{2} : indices;
  r.mu_j = r.mu1;
  for (int k : ks) {
    if (!is_admissible(spec, k)) throw InadmissibleIndex(k);
    IndexThresholds t;
    t.k = k;
    t.lambda_k = spec.lambda(k);
    t.lambda_km1 = spec.lambda(k - 1);
    const double lk = t.lambda_k;
    const std::string ks_ = std::to_string(k);
    t.mu_hat = solve_increasing(
        "mu_hat_" + ks_, [&](double m) { return lk * m + 2.0 * lp * std::pow(m, p / 2.0); }, rhs_b);
    t.mu_bar = solve_increasing(
        "mu_bar_" + ks_,
        [&](double m) {
          return lk * std::pow(m, 2.0 * (p - 2.0) / (p - 6.0)) +
                 2.0 * lp * std::pow(m, (p - 2.0) * (p - 2.0) / (2.0 * (p - 6.0)));
        },
        rhs_b);
    const double lkq = std::pow(lk, (p - 2.0) / 4.0);
    t.mu_star = solve_increasing(
        "mu_star_" + ks_, [&](double m) { return 2.0 * (lp + K * lkq) * std::pow(m, (p - 2.0) / 2.0); },
        lk - t.lambda_km1);
    t.mu_star_used = t.mu_star.value;
    if (k == 2) {
      t.mu_star_pair = solve_increasing(
          "mu_star_2_pair",
          [&](double m) { return 2.0 * ((p - 1.0) / p * lp + K * lkq) * std::pow(m, (p - 2.0) / 2.0); }, lk);
      t.mu_star_used = std::min(t.mu_star_used, t.mu_star_pair->value);
    }
    t.mu_check = std::min({t.mu_hat.value, t.mu_bar.value, t.mu_star_used, r.mu_tilde.value});
    r.mu_j = std::min(r.mu_j, t.mu_check);
    r.indices.push_back(std::move(t));
  }
  return r;
}

}  // namespace qgnls
