#include "qgnls/minmax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "qgnls/error.hpp"
#include "qgnls/gradient.hpp"

namespace qgnls {

namespace {

// Angles theta_1..theta_{k-1} in [0, pi]; a pole (theta_i in {0, pi}) makes the
// later angles irrelevant, so only theta_j = 0 is kept after it.
void enumerate_angles(int dims, int n, std::vector<int>& cur, std::vector<std::vector<int>>& out, bool collapsed) {
  if (static_cast<int>(cur.size()) == dims) {
    out.push_back(cur);
    return;
  }
  for (int i = 0; i <= (collapsed ? 0 : n); ++i) {
    cur.push_back(i);
    enumerate_angles(dims, n, cur, out, collapsed || i == 0 || i == n);
    cur.pop_back();
  }
}

}  // namespace

LinkedCap build_cap(const SpectralData& spec, int k, double mu, int grid_density) {
  if (!is_admissible(spec, k)) throw InadmissibleIndex(k);
  if (grid_density < 8) throw InvalidArgument("cap grid density must be >= 8 per angular dimension");
  if (!(mu > 0.0)) throw InvalidArgument("cap mass must be positive");

  LinkedCap cap;
  cap.k = k;
  cap.mu = mu;
  cap.grid_density = grid_density;
  cap.basis = std::sqrt(mu) * spec.eigenfunctions.leftCols(k);

  std::vector<std::vector<int>> grid;
  std::vector<int> cur;
  enumerate_angles(k - 1, grid_density, cur, grid, false);

  cap.coeffs.resize(static_cast<Eigen::Index>(grid.size()), k);
  cap.boundary.resize(grid.size());
  for (std::size_t s = 0; s < grid.size(); ++s) {
    double sprod = 1.0;
    for (int j = 0; j < k - 1; ++j) {
      const double th = std::numbers::pi * grid[s][j] / grid_density;
      cap.coeffs(static_cast<Eigen::Index>(s), j) = sprod * std::cos(th);
      sprod *= std::sin(th);
    }
    // sin(pi) is not exactly zero in floating point.
    const bool pole = std::any_of(grid[s].begin(), grid[s].end(), [&](int i) { return i == 0 || i == grid_density; });
    cap.coeffs(static_cast<Eigen::Index>(s), k - 1) = pole ? 0.0 : sprod;
    cap.boundary[s] = pole;
  }
  return cap;
}

LevelReport level_estimates(const Discretization& d, const LinkedCap& cap, const ThresholdReport& thr, double p) {
  const double mu = cap.mu, ell = thr.params.ell;
  const auto& it = thr.at(cap.k);
  LevelReport r;
  r.k = cap.k;
  r.m2 = thr.M2;
  r.half_lambda_mu = 0.5 * it.lambda_k * mu;
  r.c_lower_bar = g_function(it.lambda_k * mu, p, thr.K, mu) - std::pow(ell, (2.0 - p) / 2.0) * std::pow(mu, p / 2.0);
  r.cap_in_ball = it.lambda_k * mu < thr.rho_star;
  r.regime_ok = mu < it.mu_check;

  r.energies.resize(static_cast<std::size_t>(cap.size()));
  r.sup_Q = -std::numeric_limits<double>::infinity();
  r.c_underbar = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cap.size(); ++i) {
    const double e = energy(d, cap.field(i), p);
    r.energies[static_cast<std::size_t>(i)] = e;
    if (e > r.sup_Q) {
      r.sup_Q = e;
      r.argmax = i;
    }
    if (cap.boundary[static_cast<std::size_t>(i)]) r.c_underbar = std::max(r.c_underbar, e);
  }
  r.separation_ok = r.regime_ok && r.cap_in_ball && r.c_lower_bar > r.c_underbar && r.sup_Q < r.m2;
  return r;
}

int count_sign_changes(const Discretization& d, const Vec& u, double threshold) {
  int changes = 0;
  for (const auto& m : d.meshes()) {
    int last = 0;
    for (int i = 0; i <= m.cells; ++i) {
      const double v = u[m.dofs[i]];
      if (std::abs(v) <= threshold) continue;
      const int s = v > 0.0 ? 1 : -1;
      if (last != 0 && s != last) ++changes;
      last = s;
    }
  }
  return changes;
}

SolutionRecord certify(const Discretization& d, const Vec& u, double lambda, double p, double mu, double nu) {
  SolutionRecord r;
  r.p = p;
  r.mu = mu;
  r.u = u;
  const auto g = constrained_gradient(d, u, p, mu);
  r.energy = g.energy;
  r.kinetic = g.kinetic;
  r.p_integral = g.p_integral;
  r.lambda_u = g.lambda_u;
  r.pde_lambda = lambda;
  r.tested_lambda = (g.p_integral - g.kinetic) / g.mass;
  r.residual = stationary_residual(d, u, p, lambda);
  r.mass_error = std::abs(g.mass - mu) / mu;
  r.h1_norm = d.h1_norm(u);
  r.max_flux = d.vertex_flux_sums(u).cwiseAbs().maxCoeff();
  r.nodal_min = u.minCoeff();
  r.nodal_max = u.maxCoeff();
  const double level = 1e-6 * std::sqrt(mu / d.graph().total_length());
  r.sign_changing = r.nodal_min < -level && r.nodal_max > level;
  r.sign_changes = count_sign_changes(d, u, level);
  r.cone = cone_classify(d, u, nu);
  return r;
}

namespace {

Vec tangent_noise(const Discretization& d, const Vec& base, double mu, double rel, std::uint64_t seed,
                  std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  Vec v(d.num_dofs());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v -= (d.m_dot(v, base) / mu) * base;
  return v * (rel * d.h1_norm(base) / d.h1_norm(v));
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

Vec polish_from(const Discretization& d, const Vec& u, double p, double mu, double tol, bool& ok, double& lambda) {
  // Small states carry small residuals; tighten the absolute tolerance to stay relative to |u|.
  const double scaled = std::min(tol, 1e-12 * d.h1_norm(u) * std::sqrt(mu / d.mass(u)));
  auto nr = newton_polish(d, u, tested_multiplier(d, u, p), p, mu, scaled);
  ok = nr.converged;
  lambda = nr.lambda;
  return nr.u;
}

}  // namespace

SolutionRecord find_sign_changing(const Discretization& d, const SpectralData& spec, const LinkedCap& cap,
                                  const LevelReport& level, const FlowParams& flow, double nu,
                                  const SignChangingOptions& opt) {
  const int k = cap.k;
  const double mu = cap.mu, p = flow.p;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(cap.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return level.energies[static_cast<std::size_t>(a)] > level.energies[static_cast<std::size_t>(b)];
  });
  const std::size_t decile = std::max<std::size_t>(1, order.size() / 10);

  std::vector<Eigen::Index> picked;
  for (std::size_t i = 0; i < decile && static_cast<int>(picked.size()) < opt.max_start_samples; ++i) {
    if (cone_classify(d, cap.field(order[i]), nu).classification == ConeClass::InSStar) picked.push_back(order[i]);
  }
  if (picked.empty())
    throw NoSignChangingFound("no top-decile cap sample lies in S*(nu) for k = " + std::to_string(k));

  FlowParams fp = flow;
  fp.mode = FlowMode::Solver;
  fp.mu = mu;
  fp.deflation = spec.leading(k);
  fp.cone_sign = 0;
  fp.nu = nu;
  fp.store_fields = false;

  std::vector<SolutionRecord> found;
  int tried = 0, converged = 0;
  std::ostringstream diag;
  for (auto idx : picked) {
    const Vec base = cap.field(idx);
    for (int j = 0; j <= opt.multistart; ++j) {
      Vec start = base;
      if (j > 0)
        start = step_project(d, base,
                             tangent_noise(d, base, mu, opt.perturbation, opt.seed, static_cast<std::uint64_t>(idx),
                                           static_cast<std::uint64_t>(j)),
                             1.0, mu);
      ++tried;
      const auto tr = descend(d, start, fp);
      bool ok = false;
      double lambda = 0.0;
      const Vec u = polish_from(d, tr.terminal, p, mu, opt.residual_tol, ok, lambda);
      if (!ok) {
        diag << "start " << idx << "/" << j << ": descent " << to_string(tr.reason) << ", Newton did not converge; ";
        continue;
      }
      ++converged;
      auto rec = certify(d, u, lambda, p, mu, nu);
      if (!rec.sign_changing) {
        diag << "start " << idx << "/" << j << ": converged to a one-signed state; ";
        continue;
      }
      found.push_back(std::move(rec));
    }
  }
  if (found.empty()) throw NoSignChangingFound(diag.str());

  auto best = std::min_element(found.begin(), found.end(), [](const SolutionRecord& a, const SolutionRecord& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return lex_less(a.u, b.u);
  });
  SolutionRecord r = *best;
  r.kind = "sign_changing";
  r.k = k;
  r.starts_tried = tried;
  r.starts_converged = converged;
  r.bracket_low = level.c_lower_bar;
  r.bracket_high = level.sup_Q;
  r.in_bracket = r.energy >= level.c_lower_bar && r.energy <= level.sup_Q;
  r.label = "candidate c_" + std::to_string(k - 1);
  return r;
}

SolutionRecord find_positive(const Discretization& d, const FlowParams& flow, double nu, std::uint64_t seed) {
  const double mu = flow.mu, p = flow.p;
  const double kappa = std::sqrt(mu / d.graph().total_length());
  Vec w = random_field(d, seed, 0);
  w = (w.array() - w.mean()).matrix();
  const double wmax = w.cwiseAbs().maxCoeff();
  Vec u0 = d.constant(kappa);
  if (wmax > 0.0) u0 += (1e-3 * kappa / wmax) * w;

  FlowParams fp = flow;
  fp.mode = FlowMode::Solver;
  fp.deflation = Mat();
  fp.cone_sign = 1;
  fp.nu = nu;
  const auto tr = descend(d, u0, fp);
  bool ok = false;
  double lambda = 0.0;
  Vec u = polish_from(d, tr.terminal, p, mu, 1e-10, ok, lambda);
  if (!ok) {
    u = tr.terminal;
    lambda = constrained_gradient(d, u, p, mu).pde_lambda();
  }
  auto r = certify(d, u, lambda, p, mu, nu);
  r.kind = "positive";
  r.k = 1;
  r.starts_tried = 1;
  r.starts_converged = ok ? 1 : 0;
  r.label = "positive (cone-restricted descent)";
  return r;
}

Ladder solve_ladder(const Discretization& d, const SpectralData& spec, const ThresholdReport& thr,
                    const std::vector<int>& indices, const FlowParams& flow, double nu, int grid_density,
                    const SignChangingOptions& opt) {
  std::vector<int> ks = indices;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks)
    if (!is_admissible(spec, k)) throw InadmissibleIndex(k);

  Ladder L;
  L.solutions.push_back(find_positive(d, flow, nu));
  for (int k : ks) {
    const auto cap = build_cap(spec, k, flow.mu, grid_density);
    auto level = level_estimates(d, cap, thr, flow.p);
    L.solutions.push_back(find_sign_changing(d, spec, cap, level, flow, nu, opt));
    L.levels.push_back(std::move(level));
  }
  for (const auto& s : L.solutions) {
    SolutionRecord m = s;
    m.u = -s.u;
    m.kind = "mirror";
    m.energy = energy(d, m.u, flow.p);
    m.nodal_min = m.u.minCoeff();
    m.nodal_max = m.u.maxCoeff();
    m.cone = cone_classify(d, m.u, nu);
    L.mirrors.push_back(std::move(m));
  }

  L.min_pairwise_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < L.solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < L.solutions.size(); ++j) {
      const auto& a = L.solutions[i];
      const auto& b = L.solutions[j];
      const double dist = std::min(d.h1_norm(a.u - b.u), d.h1_norm(a.u + b.u));
      L.min_pairwise_distance = std::min(L.min_pairwise_distance, dist);
      if (dist <= 1e-6 * std::max(a.h1_norm, b.h1_norm))
        throw DuplicateSolution("solutions " + a.label + " and " + b.label + " are " + std::to_string(dist) +
                                " apart in H1");
      const double scale = std::max(std::abs(a.energy), std::abs(b.energy));
      if (std::abs(a.energy - b.energy) <= 1e-8 * scale)
        throw OrderingViolation("energies of " + a.label + " and " + b.label + " coincide");
    }
  }
  L.ordering_ok = true;
  for (std::size_t i = 1; i < L.solutions.size(); ++i) {
    if (!(L.solutions[i].energy > L.solutions[i - 1].energy)) {
      L.ordering_ok = false;
      std::ostringstream os;
      os << "E(" << L.solutions[i].label << ") = " << L.solutions[i].energy << " is not above E("
         << L.solutions[i - 1].label << ") = " << L.solutions[i - 1].energy;
      throw OrderingViolation(os.str());
    }
  }
  return L;
}

LinkCheck link_sanity(const Discretization& d, const SpectralData& spec, const LinkedCap& cap, int deformations,
                      std::uint64_t seed) {
  if (cap.k != 2) throw InvalidArgument("link_sanity is implemented for k = 2");
  const double mu = cap.mu;
  const Vec Mphi1 = d.mass_matrix() * spec.phi(1);
  LinkCheck out;
  out.deformations = deformations;
  const Eigen::Index n = cap.size();
  for (int j = 0; j < deformations; ++j) {
    Vec wa = random_field(d, seed, 2 * static_cast<std::uint64_t>(j));
    Vec wb = random_field(d, seed, 2 * static_cast<std::uint64_t>(j) + 1);
    wa *= std::sqrt(mu / d.mass(wa));
    wb *= std::sqrt(mu / d.mass(wb));
    std::vector<double> c(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double th = std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1);
      const double bump = cap.boundary[static_cast<std::size_t>(i)] ? 0.0 : std::sin(th);
      Vec h = cap.field(i) + 0.8 * bump * (std::cos(th) * wa + std::sin(2.0 * th) * wb);
      h *= std::sqrt(mu / d.mass(h));
      c[static_cast<std::size_t>(i)] = h.dot(Mphi1);
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double a = c[static_cast<std::size_t>(i)], b = c[static_cast<std::size_t>(i + 1)];
      if ((a >= 0.0 && b <= 0.0) || (a <= 0.0 && b >= 0.0)) {
        ++out.passed;
        out.worst_gap = std::max(out.worst_gap, std::min(std::abs(a), std::abs(b)) / std::sqrt(mu));
        break;
      }
    }
  }
  return out;
}

}  // namespace qgnls
