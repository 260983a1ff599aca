#include "qgnls/invariance_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qgnls/cones.hpp"
#include "qgnls/error.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/gradient.hpp"

namespace qgnls {

namespace {

constexpr double kMemberTol = 1e-12;

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Vec diag_of(const Mat& A) { return A.diagonal(); }

double weighted_norm(const Vec& w, const Vec& x) { return std::sqrt((w.array() * x.array().square()).sum()); }

// Componentwise nonnegative matrix perturbation of the identity.
Mat positive_mixing(int n, std::mt19937_64& rng, double strength) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat B = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) += strength * unif(rng);
  return B;
}

// alpha F with alpha chosen so that (alpha F)^T M u = mu; falls back to u.
Vec tangent_scale(const Vec& F, const Vec& u, const Mat& M, double mu) {
  const double ip = F.dot(M * u);
  if (!(ip > 0.0)) return u;
  return (mu / ip) * F;
}

Vec abs_normal_with_zeros(int n, std::mt19937_64& rng, double zero_prob) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = unif(rng) < zero_prob ? 0.0 : std::abs(normal(rng));
  return w;
}

LabScenario orthant_base(const std::string& name, std::uint64_t seed) {
  auto rng = seeded(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr int n = 4;
  LabScenario sc;
  sc.name = name;
  sc.n = n;
  Vec s(n), m(n);
  for (int i = 0; i < n; ++i) {
    s[i] = 1.0 + 2.0 * unif(rng);
    m[i] = 0.5 + unif(rng);
  }
  sc.S_lab = s.asDiagonal();
  sc.M_lab = m.asDiagonal();
  sc.mu = 1.0;
  const Mat B = positive_mixing(n, rng, 0.2);

  sc.member = [](const Vec& u) { return u.minCoeff() >= -kMemberTol * std::max(1.0, u.cwiseAbs().maxCoeff()); };
  sc.set_distance = [s](const Vec& u) { return weighted_norm(s, u.cwiseMin(0.0)); };
  sc.project = [](const Vec& u) { return Vec(u.cwiseMax(0.0)); };
  const Mat M = sc.M_lab;
  const double mu = sc.mu;
  sc.G = [B, M, mu](const Vec& u) { return tangent_scale((B * u).cwiseMax(0.0), u, M, mu); };
  sc.sample_member = [n](std::mt19937_64& r) {
    Vec w = abs_normal_with_zeros(n, r, 0.25);
    if (w.maxCoeff() == 0.0) w[0] = 1.0;
    return w;
  };
  auto member_sampler = sc.sample_member;
  sc.sample_start = [member_sampler, M, mu](std::mt19937_64& r) {
    Vec w = member_sampler(r);
    return Vec(std::sqrt(mu / w.dot(M * w)) * w);
  };
  sc.T = 10.0;
  sc.h = 1e-2;
  return sc;
}

// Dykstra's alternating projection onto the intersection of {a_j^T x >= 0}.
Vec dykstra(const Mat& A, const Vec& x0) {
  const int planes = static_cast<int>(A.rows());
  Vec x = x0;
  Mat incr = Mat::Zero(planes, x0.size());
  for (int it = 0; it < 100000; ++it) {
    const Vec before = x;
    for (int j = 0; j < planes; ++j) {
      const Vec a = A.row(j).transpose();
      const Vec y = x + incr.row(j).transpose();
      const double t = a.dot(y);
      const Vec proj = t < 0.0 ? Vec(y - (t / a.squaredNorm()) * a) : y;
      incr.row(j) = (y - proj).transpose();
      x = proj;
    }
    if ((x - before).norm() <= 1e-16 * std::max(1.0, x.norm())) break;
  }
  return x;
}

}  // namespace

LabScenario orthant_scenario(std::uint64_t seed) { return orthant_base("orthant", seed); }

LabScenario quarter_circle_scenario(double omega) {
  if (!(omega > 0.0 && omega <= 1.0)) throw InvalidArgument("quarter circle: omega must lie in (0, 1]");
  LabScenario sc;
  sc.name = "quarter_circle";
  sc.n = 2;
  sc.S_lab = Mat::Identity(2, 2);
  sc.M_lab = Mat::Identity(2, 2);
  sc.mu = 1.0;
  sc.member = [](const Vec& u) { return u.minCoeff() >= -kMemberTol; };
  sc.set_distance = [](const Vec& u) { return u.cwiseMin(0.0).norm(); };
  sc.project = [](const Vec& u) { return Vec(u.cwiseMax(0.0)); };
  sc.G = [omega](const Vec& u) {
    Vec Ju(2);
    Ju << -u[1], u[0];
    return Vec(u + omega * (u[0] - u[1]) * Ju);
  };
  sc.sample_member = [](std::mt19937_64& r) { return abs_normal_with_zeros(2, r, 0.2); };
  sc.sample_start = [](std::mt19937_64& r) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double pick = unif(r);
    const double th = pick < 0.1 ? 0.0 : pick < 0.2 ? std::numbers::pi / 2 : unif(r) * std::numbers::pi / 2;
    Vec u(2);
    u << std::cos(th), std::sin(th);
    return u.cwiseMax(0.0).eval();
  };
  sc.T = 10.0;
  sc.h = 1e-2;
  return sc;
}

LabScenario halfspace_scenario(int n, int planes, std::uint64_t seed) {
  if (n < 2 || planes < 1 || planes > n) throw InvalidArgument("halfspace scenario needs 1 <= planes <= n, n >= 2");
  auto rng = seeded(seed, 0);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LabScenario sc;
  sc.name = "halfspaces";
  sc.n = n;
  sc.S_lab = Mat::Identity(n, n);
  Vec m(n);
  for (int i = 0; i < n; ++i) m[i] = 0.5 + unif(rng);
  sc.M_lab = m.asDiagonal();
  sc.mu = 1.0;
  Mat A(planes, n);
  for (int j = 0; j < planes; ++j) {
    for (int i = 0; i < n; ++i) A(j, i) = (i == j ? 1.0 : 0.0) + 0.3 * normal(rng);
    A.row(j).normalize();
  }
  const Mat B = positive_mixing(n, rng, 0.2);

  sc.member = [A](const Vec& u) { return (A * u).minCoeff() >= -1e-10 * std::max(1.0, u.norm()); };
  sc.project = [A](const Vec& u) { return dykstra(A, u); };
  sc.set_distance = [A](const Vec& u) {
    if ((A * u).minCoeff() >= 0.0) return 0.0;
    return (u - dykstra(A, u)).norm();
  };
  const Mat M = sc.M_lab;
  const double mu = sc.mu;
  sc.G = [A, B, M, mu](const Vec& u) { return tangent_scale(dykstra(A, B * u), u, M, mu); };
  sc.sample_member = [A, n](std::mt19937_64& r) {
    std::normal_distribution<double> nd;
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = nd(r);
    Vec y = dykstra(A, x);
    if (y.norm() == 0.0) y = dykstra(A, A.row(0).transpose());
    return y;
  };
  auto member_sampler = sc.sample_member;
  sc.sample_start = [member_sampler, M, mu](std::mt19937_64& r) {
    Vec w = member_sampler(r);
    return Vec(std::sqrt(mu / w.dot(M * w)) * w);
  };
  sc.T = 5.0;
  sc.h = 1e-2;
  return sc;
}

LabScenario cone_neighbourhood_scenario(int n, double nu, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("cone neighbourhood scenario needs n >= 2");
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("cone neighbourhood scenario needs 0 < nu < 1");
  auto rng = seeded(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LabScenario sc;
  sc.name = "cone_neighbourhood";
  sc.n = n;
  Vec s(n), m(n);
  for (int i = 0; i < n; ++i) {
    s[i] = 1.0 + unif(rng);
    m[i] = 0.5 + unif(rng);
  }
  sc.S_lab = s.asDiagonal();
  sc.M_lab = m.asDiagonal();
  sc.mu = 1.0;
  const Mat B = positive_mixing(n, rng, 0.2);

  auto neg_norm = [s](const Vec& u) { return weighted_norm(s, u.cwiseMin(0.0)); };
  sc.member = [neg_norm, nu](const Vec& u) { return neg_norm(u) <= nu * (1.0 + kMemberTol); };
  sc.set_distance = [neg_norm, nu](const Vec& u) { return std::max(neg_norm(u) - nu, 0.0); };
  sc.project = [neg_norm, nu](const Vec& u) {
    const double dn = neg_norm(u);
    if (dn <= nu) return u;
    return Vec(u.cwiseMax(0.0) + (nu / dn) * u.cwiseMin(0.0));
  };
  const Mat M = sc.M_lab;
  const double mu = sc.mu;
  sc.G = [B, M, mu](const Vec& u) { return tangent_scale((B * u).cwiseMax(0.0), u, M, mu); };
  sc.sample_member = [n, s, nu](std::mt19937_64& r) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Vec pos = abs_normal_with_zeros(n, r, 0.2);
    Vec neg(n);
    for (int i = 0; i < n; ++i) neg[i] = pos[i] > 0.0 ? 0.0 : -std::abs(nd(r));
    const double nn = weighted_norm(s, neg);
    if (nn > 0.0) neg *= ud(r) * nu / nn;
    return Vec(pos + neg);
  };
  auto member_sampler = sc.sample_member;
  auto member = sc.member;
  sc.sample_start = [member_sampler, member, M, mu](std::mt19937_64& r) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Vec w = member_sampler(r);
      const double m2 = w.dot(M * w);
      if (!(m2 > 0.0)) continue;
      w *= std::sqrt(mu / m2);
      if (member(w)) return w;
    }
    throw SamplingBudgetExceeded("cone neighbourhood start sampler");
  };
  sc.T = 10.0;
  sc.h = 1e-2;
  return sc;
}

LabScenario leaky_orthant_scenario(double leak, double patch_level, std::uint64_t seed) {
  LabScenario sc = orthant_base("leaky_orthant", seed);
  const Vec m = diag_of(sc.M_lab);
  const double mu = sc.mu;
  const Mat M = sc.M_lab;
  const double threshold = patch_level * std::sqrt(mu / m[0]);
  auto in_patch = [threshold](const Vec& u) { return u[0] > threshold; };
  const auto base_G = sc.G;
  sc.G = [base_G, in_patch, leak, M, mu](const Vec& u) {
    if (!in_patch(u)) return base_G(u);
    Vec F = base_G(u);
    F[1] -= leak;
    return tangent_scale(F, u, M, mu);
  };
  sc.flagged_region = in_patch;
  sc.warnings.push_back("G leaves B on the patch u_1 > " + std::to_string(patch_level) + " sqrt(mu / m_1)");
  return sc;
}

LabScenario shifted_ball_scenario(double radius, double drift) {
  if (!(radius > 0.0) || !(drift > 0.0 && drift <= radius))
    throw InvalidArgument("shifted ball: need 0 < drift <= radius");
  LabScenario sc;
  sc.name = "shifted_ball";
  sc.n = 3;
  sc.S_lab = Mat::Identity(3, 3);
  sc.M_lab = Mat::Identity(3, 3);
  sc.mu = 1.0;
  auto project = [radius](const Vec& u) {
    Vec q = u;
    q[2] = 1.0;
    const double r = std::hypot(u[0], u[1]);
    if (r > radius) {
      q[0] *= radius / r;
      q[1] *= radius / r;
    }
    return q;
  };
  sc.project = project;
  sc.member = [radius](const Vec& u) {
    return std::abs(u[2] - 1.0) <= kMemberTol && std::hypot(u[0], u[1]) <= radius * (1.0 + kMemberTol);
  };
  sc.set_distance = [project](const Vec& u) { return (u - project(u)).norm(); };
  const Vec pole = Vec::Unit(3, 2);
  sc.exact_bmu_distance = [pole](const Vec& u) { return std::optional<double>((u - pole).norm()); };
  sc.G = [drift](const Vec&) {
    Vec g(3);
    g << drift, 0.0, 1.0;
    return g;
  };
  sc.sample_member = [radius](std::mt19937_64& r) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const double rr = radius * std::sqrt(ud(r)), th = 2.0 * std::numbers::pi * ud(r);
    Vec u(3);
    u << rr * std::cos(th), rr * std::sin(th), 1.0;
    return u;
  };
  sc.sample_start = [pole](std::mt19937_64&) { return pole; };
  sc.scaling_by_construction = false;
  sc.warnings.push_back("B is not closed under k w, k in (0, 1): scaling condition broken");
  sc.T = 1.0;
  sc.h = 1e-2;
  return sc;
}

LabScenario polar_cap_scenario(double c, double omega) {
  if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("polar cap: c must lie in (0, 1)");
  LabScenario sc;
  sc.name = "polar_cap";
  sc.n = 3;
  sc.S_lab = Mat::Identity(3, 3);
  sc.M_lab = Mat::Identity(3, 3);
  sc.mu = 1.0;
  sc.member = [c](const Vec& u) { return u[2] >= c - kMemberTol; };
  sc.set_distance = [c](const Vec& u) { return std::max(c - u[2], 0.0); };
  sc.project = [c](const Vec& u) {
    Vec q = u;
    q[2] = std::max(q[2], c);
    return q;
  };
  sc.G = [omega](const Vec& u) {
    Vec g = u;
    g[0] -= omega * u[1];
    g[1] += omega * u[0];
    return g;
  };
  sc.sample_member = [c](std::mt19937_64& r) {
    std::normal_distribution<double> nd;
    Vec u(3);
    u << nd(r), nd(r), c + std::abs(nd(r));
    return u;
  };
  const double rho = std::sqrt(1.0 - c * c);
  sc.sample_start = [c, rho](std::mt19937_64& r) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const double th = 2.0 * std::numbers::pi * ud(r);
    Vec u(3);
    u << rho * std::cos(th), rho * std::sin(th), c;
    return u;
  };
  sc.scaling_by_construction = false;
  sc.warnings.push_back("B is not closed under k w, k in (0, 1): the projected scheme drifts at order h");
  sc.T = 1.0;
  sc.h = 1e-2;
  return sc;
}

std::vector<double> default_s_grid() {
  std::vector<double> s;
  for (int e = 1; e <= 8; ++e) s.push_back(std::pow(10.0, -e));
  return s;
}

LimitCheckReport limit_check(const LabScenario& sc, const Vec& u, const std::vector<double>& s_grid,
                             double final_tol) {
  if (!sc.project && !sc.exact_bmu_distance) throw OracleUnavailable(sc.name);
  if (s_grid.empty()) throw InvalidArgument("limit_check needs a non-empty s grid");
  for (std::size_t i = 1; i < s_grid.size(); ++i)
    if (!(s_grid[i] < s_grid[i - 1] && s_grid[i] > 0.0))
      throw InvalidArgument("limit_check s grid must be positive and strictly decreasing");

  LimitCheckReport r;
  r.scenario = sc.name;
  r.s = s_grid;
  const Vec V = sc.V(u);
  r.tangency_error = std::abs(V.dot(sc.M_lab * u)) / sc.mu;
  for (double s : s_grid) {
    const Vec w = u + s * V;
    double dist = 0.0;
    std::string how;
    bool done = false;
    if (sc.exact_bmu_distance) {
      if (auto e = sc.exact_bmu_distance(w)) {
        dist = *e;
        how = "exact";
        done = true;
      }
    }
    if (!done && sc.project) {
      const Vec q = sc.renormalize(sc.project(w));
      if (sc.member(q)) {
        dist = sc.s_norm(w - q);
        how = "projection";
        done = true;
      }
    }
    if (!done) throw OracleUnavailable(sc.name);
    r.entries.push_back(dist / s);
    r.method.push_back(how);
  }
  r.final_entry = r.entries.back();

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int npos = 0;
  bool all_zero = true;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (r.entries[i] != 0.0) all_zero = false;
    if (s_grid[i] < 1e-4) continue;
    r.C = std::max(r.C, r.entries[i] / s_grid[i]);
    if (!(r.entries[i] > 0.0)) continue;
    const double x = std::log(s_grid[i]), y = std::log(r.entries[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++npos;
  }
  if (npos >= 2) {
    r.slope = (npos * sxy - sx * sy) / (npos * sxx - sx * sx);
  } else {
    r.slope = std::numeric_limits<double>::infinity();
  }
  r.decays = r.final_entry <= final_tol && (all_zero || r.slope >= 0.5);
  return r;
}

FlowInvarianceReport flow_invariance_check(const LabScenario& sc, int starts, double tolerance, std::uint64_t seed) {
  if (starts < 1) throw InvalidArgument("flow_invariance_check needs at least one start");
  FlowInvarianceReport rep;
  rep.scenario = sc.name;
  rep.starts = starts;
  rep.T = sc.T;
  rep.h = sc.h;
  rep.tolerance = tolerance;

  auto run = [&](double h, bool record) {
    double worst = 0.0;
    const int steps = static_cast<int>(std::ceil(sc.T / h - 1e-9));
    for (int i = 0; i < starts; ++i) {
      auto rng = seeded(seed, static_cast<std::uint64_t>(i));
      Vec u = sc.sample_start(rng);
      if (sc.energy && !(sc.energy(u) < sc.energy_level))
        throw InvalidArgument("flow_invariance_check: start outside the energy sublevel");
      double vmax = sc.set_distance(u);
      bool flagged = sc.flagged_region && sc.flagged_region(u);
      for (int k = 0; k < steps; ++k) {
        const Vec v = sc.V(u);
        if (record) rep.max_tangency_error = std::max(rep.max_tangency_error, std::abs(v.dot(sc.M_lab * u)) / sc.mu);
        u = sc.step(u, v, h);
        vmax = std::max(vmax, sc.set_distance(u));
        if (record) rep.max_mass_error = std::max(rep.max_mass_error, std::abs(sc.m_norm2(u) - sc.mu) / sc.mu);
        if (sc.flagged_region && sc.flagged_region(u)) flagged = true;
      }
      if (record) {
        rep.per_start.push_back(vmax);
        if (vmax > tolerance) rep.violating_starts.push_back(i);
        if (flagged) rep.flagged_starts.push_back(i);
      }
      worst = std::max(worst, vmax);
    }
    return worst;
  };

  rep.max_violation = run(sc.h, true);
  rep.max_violation_half = run(0.5 * sc.h, false);
  if (rep.max_violation_half > 1e-13) rep.richardson_ratio = rep.max_violation / rep.max_violation_half;
  rep.pass = rep.max_violation <= tolerance;
  return rep;
}

OracleReport convexity_check(const LabScenario& sc, int samples, std::uint64_t seed) {
  OracleReport r{"convexity", samples, 0, 0.0};
  for (int i = 0; i < samples; ++i) {
    auto rng = seeded(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const Vec w = sc.sample_member(rng), w2 = sc.sample_member(rng);
    const double th = ud(rng);
    const Vec z = th * w + (1.0 - th) * w2;
    if (!sc.member(z)) {
      ++r.violations;
      r.worst = std::max(r.worst, sc.set_distance(z));
    }
  }
  return r;
}

OracleReport scaling_check(const LabScenario& sc, int samples, std::uint64_t seed) {
  OracleReport r{"scaling", samples, 0, 0.0};
  for (int i = 0; i < samples; ++i) {
    auto rng = seeded(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const Vec w = sc.sample_member(rng);
    const double k = ud(rng);
    const Vec z = k * w;
    if (!sc.member(z)) {
      ++r.violations;
      r.worst = std::max(r.worst, sc.set_distance(z));
    }
  }
  return r;
}

OracleReport g_membership_check(const LabScenario& sc, int samples, std::uint64_t seed) {
  OracleReport r{"G_membership", samples, 0, 0.0};
  for (int i = 0; i < samples; ++i) {
    auto rng = seeded(seed, static_cast<std::uint64_t>(i));
    const Vec u = sc.sample_start(rng);
    const Vec g = sc.G(u);
    const double tangency = std::abs((g - u).dot(sc.M_lab * u)) / sc.mu;
    if (!sc.member(g) || tangency > 1e-10) {
      ++r.violations;
      r.worst = std::max(r.worst, std::max(sc.set_distance(g), tangency));
    }
  }
  return r;
}

LabScenario mirror_pde_scenario(const Discretization& d, double p, double mu, double nu, double mu_tilde,
                                double nu_cap, double rho_star) {
  if (d.num_dofs() > 60) throw InvalidArgument("mirror_pde_scenario needs at most 60 degrees of freedom");
  if (!(nu > 0.0)) throw InvalidArgument("mirror_pde_scenario needs nu > 0");
  ProblemParams{p, mu, d.graph().total_length()}.validate();

  LabScenario sc;
  sc.name = "mirror_pde";
  sc.n = static_cast<int>(d.num_dofs());
  sc.S_lab = Mat(d.h1_matrix());
  sc.M_lab = Mat(d.mass_matrix());
  sc.mu = mu;
  const Discretization* dp = &d;
  auto pos_norm = [dp](const Vec& u) { return dp->h1_norm(split_parts(u).first); };
  sc.member = [pos_norm, nu](const Vec& u) { return pos_norm(u) <= nu * (1.0 + kMemberTol); };
  sc.set_distance = [pos_norm, nu](const Vec& u) { return std::max(pos_norm(u) - nu, 0.0); };
  sc.project = [pos_norm, nu](const Vec& u) {
    const double pn = pos_norm(u);
    if (pn <= nu) return u;
    const auto [plus, minus] = split_parts(u);
    return Vec((nu / pn) * plus - minus);
  };
  sc.G = [dp, p, mu](const Vec& u) { return constrained_gradient(*dp, u, p, mu).G(u); };
  // B* is the kinetic ball u^T A u < rho*.
  sc.energy = [dp](const Vec& u) { return dp->kinetic(u); };
  sc.energy_level = rho_star;
  const double kappa = std::sqrt(mu / d.graph().total_length());
  sc.sample_member = [dp, kappa, nu](std::mt19937_64& r) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Vec w = random_field(*dp, r(), 0);
    const double wn = dp->h1_norm(w);
    Vec u = -dp->constant(kappa);
    if (wn > 0.0) u += (ud(r) * nu / wn) * w;
    return u;
  };
  auto member_sampler = sc.sample_member;
  auto member = sc.member;
  sc.sample_start = [member_sampler, member, dp, mu, rho_star](std::mt19937_64& r) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Vec u = member_sampler(r);
      u *= std::sqrt(mu / dp->mass(u));
      if (member(u) && dp->kinetic(u) < rho_star) return u;
    }
    throw SamplingBudgetExceeded("mirror_pde_scenario start sampler");
  };
  sc.T = 1.0;
  sc.h = 1e-2;
  if (mu > mu_tilde) sc.warnings.push_back("mu above mu_tilde: lambda_u >= 0 is not guaranteed (out of regime)");
  if (nu > nu_cap) sc.warnings.push_back("nu above the separation cap: S_{k-1}^perp may meet the cone neighbourhood");
  return sc;
}

GConeReport g_cone_check(const Discretization& d, double p, double mu, double nu, double rho_star, double mu_tilde,
                         int sign, int samples, std::uint64_t seed) {
  if (sign != 1 && sign != -1) throw InvalidArgument("g_cone_check: sign must be +1 or -1");
  if (!(nu > 0.0)) throw InvalidArgument("g_cone_check needs nu > 0");
  GConeReport r;
  r.sign = sign;
  r.nu = nu;
  r.samples = samples;
  r.in_regime = mu <= mu_tilde;
  const double kappa = std::sqrt(mu / d.graph().total_length());
  for (int i = 0; i < samples; ++i) {
    auto rng = seeded(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Vec w = random_field(d, seed, static_cast<std::uint64_t>(i));
    const double wn = d.h1_norm(w);
    Vec u = d.constant(sign * kappa);
    if (wn > 0.0) u += (2.0 * nu * ud(rng) / wn) * w;
    u *= std::sqrt(mu / d.mass(u));
    if (!in_cone_neighbourhood(d, u, sign, nu) || !(d.kinetic(u) < rho_star)) continue;
    ++r.checks;
    const auto g = constrained_gradient(d, u, p, mu);
    if (g.lambda_u < 0.0) ++r.negative_lambda;
    const Vec Gu = g.G(u);
    const auto [plus, minus] = split_parts(Gu);
    const double dist = d.h1_norm(sign > 0 ? minus : plus);
    const double ratio = dist / (0.5 * nu);
    r.worst_ratio = std::max(r.worst_ratio, ratio);
    if (ratio > 1.0) ++r.failures;
  }
  r.pass = r.checks > 0 && r.failures == 0;
  return r;
}

}  // namespace qgnls
