// One PASS/FAIL line per acceptance criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qgnls/bifurcation.hpp"
#include "qgnls/cones.hpp"
#include "qgnls/error.hpp"
#include "qgnls/flow.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/gradient.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/invariance_lab.hpp"
#include "qgnls/minmax.hpp"
#include "qgnls/spectrum.hpp"

using namespace qgnls;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kP = 7.0;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

struct Problem {
  Discretization d;
  SpectralData spec;
  KEstimate kest;
};

Problem interval_problem(double len, int cells, int nev = 8) {
  auto d = assemble_uniform(interval_graph(len, cells), cells);
  auto spec = eigenpairs(d, nev);
  auto kest = estimate_K(d, kP, 100);
  return {std::move(d), std::move(spec), std::move(kest)};
}

ThresholdReport thresholds_at(const Problem& pr, double mu, const std::vector<int>& ks) {
  return compute_thresholds({kP, mu, pr.d.graph().total_length()}, pr.kest.K, pr.spec, ks);
}

// Sphere point near the constant with u^T A u a chosen fraction of rho*.
Vec near_constant(const Discretization& d, double mu, double kin_target, std::uint64_t seed, std::uint64_t i) {
  Vec w = random_field(d, seed, i);
  w = (w.array() - d.mean_value(w)).matrix();
  const double kin = d.kinetic(w);
  Vec u = d.constant(std::sqrt(mu / d.graph().total_length()));
  if (kin > 0.0) u += std::sqrt(kin_target / kin) * w;
  return u * std::sqrt(mu / d.mass(u));
}

Outcome criterion1() {
  auto d = assemble_uniform(interval_graph(kPi, 256), 256);
  auto s = eigenpairs(d, 5);
  double worst = 0.0;
  for (int k = 2; k <= 5; ++k) worst = std::max(worst, std::abs(s.lambda(k) - (k - 1.0) * (k - 1.0)) / ((k - 1.0) * (k - 1.0)));
  auto dl = assemble_uniform(loop_graph(2.0 * kPi, 256), 256);
  auto sl = eigenpairs(dl, 5);
  const double gap1 = std::abs(sl.lambda(3) - sl.lambda(2)) / sl.lambda(3);
  const double gap2 = std::abs(sl.lambda(5) - sl.lambda(4)) / sl.lambda(5);
  const bool ok = worst <= 1e-4 && gap1 <= 1e-6 && gap2 <= 1e-6;
  return {ok, "interval max rel err " + fmt(worst) + ", loop pair gaps " + fmt(gap1) + ", " + fmt(gap2)};
}

Outcome criterion2() {
  std::vector<Discretization> ds;
  ds.push_back(assemble_uniform(interval_graph(kPi, 64), 64));
  ds.push_back(assemble_by_size(star_graph(3, 1.0, 16), 1.0 / 16));
  ds.push_back(assemble_by_size(tadpole_graph(2.0 * kPi, 1.0, 16), 0.1));
  double worst = 0.0;
  int count = 0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  for (int i = 0; i < 100; ++i) {
    const auto& d = ds[static_cast<std::size_t>(i % 3)];
    const double mu = unif(rng);
    Vec u = random_field(d, 41, static_cast<std::uint64_t>(i));
    u *= std::sqrt(mu / d.mass(u));
    Vec v = random_field(d, 43, static_cast<std::uint64_t>(i));
    v -= (d.m_dot(v, u) / mu) * u;
    const auto g = constrained_gradient(d, u, kP, mu);
    v = v / d.h1_norm(v) + g.grad / d.h1_norm(g.grad);
    const double analytic = d.s_dot(g.grad, v);
    const double t = 1e-4 * d.h1_norm(u) / d.h1_norm(v);
    auto on_sphere = [&](double s) { return Vec(std::sqrt(mu / d.mass(u + s * v)) * (u + s * v)); };
    const double fd = (energy(d, on_sphere(t), kP) - energy(d, on_sphere(-t), kP)) / (2.0 * t);
    worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
    ++count;
  }
  return {worst <= 1e-4, std::to_string(count) + " points, max rel err " + fmt(worst)};
}

Outcome criterion3() {
  auto d = assemble_uniform(interval_graph(kPi, 128), 128);
  double worst_norm = 0.0, worst_lambda = 0.0;
  for (double mu : {0.1, 1.0, 3.0}) {
    const Vec u = constant_state(d, mu);
    const auto g = constrained_gradient(d, u, kP, mu);
    worst_norm = std::max(worst_norm, g.h1_norm_grad);
    const double oracle = 1.0 - std::pow(mu / kPi, (kP - 2.0) / 2.0);
    worst_lambda = std::max(worst_lambda, std::abs(g.lambda_u - oracle));
  }
  return {worst_norm <= 1e-10 && worst_lambda <= 1e-10,
          "|grad|_H1 " + fmt(worst_norm) + ", |lambda_u - oracle| " + fmt(worst_lambda)};
}

Outcome criterion4() {
  const auto pr = interval_problem(kPi, 128);
  const auto t0 = thresholds_at(pr, 1.0, {2});
  const double mu = 0.5 * t0.mu_j;
  const auto thr = thresholds_at(pr, mu, {2});
  FlowParams fp;
  fp.p = kP;
  fp.mu = mu;
  fp.enforce_barrier = true;
  fp.rho_star = thr.rho_star;
  fp.m2 = thr.M2;
  fp.nu = default_nu_cap(mu);
  fp.max_steps = 2000;
  int runs = 0, barrier_hits = 0, mass_hits = 0, increases = 0;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (std::uint64_t i = 0; runs < 50 && i < 5000; ++i) {
    const Vec u0 = near_constant(pr.d, mu, frac(rng) * thr.rho_star, 61, i);
    if (!(pr.d.kinetic(u0) < thr.rho_star && energy(pr.d, u0, kP) < thr.M2)) continue;
    ++runs;
    const auto tr = descend(pr.d, u0, fp);
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const auto& s = tr.states[k];
      if (s.kinetic >= thr.rho_star) ++barrier_hits;
      if (std::abs(s.mass - mu) > 1e-13 * mu) ++mass_hits;
      if (k > 0 && s.energy > tr.states[k - 1].energy) ++increases;
    }
  }
  const bool ok = runs == 50 && barrier_hits == 0 && mass_hits == 0 && increases == 0;
  return {ok, std::to_string(runs) + " runs at mu " + fmt(mu) + ": barrier " + std::to_string(barrier_hits) +
                  ", mass " + std::to_string(mass_hits) + ", energy increases " + std::to_string(increases)};
}

Outcome criterion5() {
  // Short edge: at mu = 0.5 mu_tilde the positive constant lies in B^{M2}, so P_nu has admissible starts.
  const auto pr = interval_problem(0.02, 64);
  const auto t0 = thresholds_at(pr, 1e-3, {2});
  const double mu = 0.5 * t0.mu_tilde.value;
  const auto thr = thresholds_at(pr, mu, {2});
  const auto sep = separation_delta(pr.d, pr.spec, mu, thr.rho_star, 2);
  const double nu = choose_nu(sep, default_nu_cap(mu));
  FlowParams fp;
  fp.p = kP;
  fp.mu = mu;
  fp.enforce_barrier = true;
  fp.rho_star = thr.rho_star;
  fp.m2 = thr.M2;
  fp.nu = nu;
  fp.max_steps = 500;
  fp.store_fields = true;
  int runs = 0, exits = 0, g_checks = 0, g_fail = 0;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (std::uint64_t i = 0; runs < 50 && i < 5000; ++i) {
    Vec u0 = near_constant(pr.d, mu, frac(rng) * thr.rho_star, 71, i);
    if (!(pr.d.kinetic(u0) < thr.rho_star && energy(pr.d, u0, kP) < thr.M2)) continue;
    if (!in_cone_neighbourhood(pr.d, u0, 1, nu)) continue;
    ++runs;
    const auto tr = descend(pr.d, u0, fp);
    const auto audit = cone_invariance_audit(pr.d, tr, nu, kP, mu, thr.mu_tilde.value, thr.rho_star);
    if (audit.exited) ++exits;
    g_checks += audit.g_checks;
    g_fail += audit.g_failures;
  }
  const bool ok = runs == 50 && exits == 0 && g_checks > 0 && g_fail == 0;
  return {ok, std::to_string(runs) + " runs, mu " + fmt(mu) + ", nu " + fmt(nu) + (sep.empty_set ? " (cap)" : "") +
                  ": exits " + std::to_string(exits) + ", G-cone failures " + std::to_string(g_fail) + "/" +
                  std::to_string(g_checks)};
}

struct SolverSetup {
  Problem pr;
  ThresholdReport thr;
  double mu = 0.0;
  double nu = 0.0;
  FlowParams fp;
};

SolverSetup solver_setup(const std::vector<int>& ks) {
  SolverSetup s{interval_problem(kPi, 128), {}, 0.0, 0.0, {}};
  const auto t0 = thresholds_at(s.pr, 1.0, ks);
  s.mu = 0.5 * t0.mu_j;
  s.thr = thresholds_at(s.pr, s.mu, ks);
  double nu = default_nu_cap(s.mu);
  for (int k : ks) nu = std::min(nu, choose_nu(separation_delta(s.pr.d, s.pr.spec, s.mu, s.thr.rho_star, k),
                                               default_nu_cap(s.mu)));
  s.nu = nu;
  s.fp.p = kP;
  s.fp.mu = s.mu;
  s.fp.enforce_barrier = true;
  s.fp.rho_star = s.thr.rho_star;
  s.fp.m2 = s.thr.M2;
  s.fp.nu = nu;
  return s;
}

Outcome criterion6() {
  auto s = solver_setup({2});
  const auto cap = build_cap(s.pr.spec, 2, s.mu);
  const auto level = level_estimates(s.pr.d, cap, s.thr, kP);
  const auto rec = find_sign_changing(s.pr.d, s.pr.spec, cap, level, s.fp, s.nu);
  const bool ok = rec.residual <= 1e-7 && rec.sign_changes == 1 && rec.in_bracket && rec.lambda_u >= 0.0;
  return {ok, "mu " + fmt(s.mu) + ": residual " + fmt(rec.residual) + ", sign changes " +
                  std::to_string(rec.sign_changes) + ", E " + fmt(rec.energy) + " in [" + fmt(level.c_lower_bar) +
                  ", " + fmt(level.sup_Q) + "] " + (rec.in_bracket ? "yes" : "no") + ", lambda_u " +
                  fmt(rec.lambda_u)};
}

Outcome criterion7() {
  auto s = solver_setup({2, 3, 4});
  const auto L = solve_ladder(s.pr.d, s.pr.spec, s.thr, {2, 3, 4}, s.fp, s.nu);
  int sc = 0;
  for (const auto& r : L.solutions)
    if (r.kind == "sign_changing" && r.sign_changing) ++sc;
  const bool positive = L.solutions.front().kind == "positive" && L.solutions.front().cone.classification == ConeClass::InPNu;
  const bool ok = sc == 3 && positive && L.ordering_ok && L.min_pairwise_distance > 1e-3;
  std::ostringstream os;
  os << "mu " << fmt(s.mu) << ": energies";
  for (const auto& r : L.solutions) os << " " << fmt(r.energy);
  os << ", min H1 distance " << fmt(L.min_pairwise_distance);
  return {ok, os.str()};
}

Outcome criterion8() {
  const auto pr = interval_problem(kPi, 128);
  std::ostringstream os;
  bool ok = true;
  for (int k : {2, 3}) {
    const auto t0 = thresholds_at(pr, 1.0, {k});
    const double mu0 = 0.5 * t0.at(k).mu_check;
    FlowParams fp;
    fp.p = kP;
    const auto branch = sweep(pr.d, pr.spec, k, geometric_grid(mu0, 8, 0.5), fp);
    const double lk = pr.spec.lambda(k);
    const auto v = bifurcation_verdict(branch, lk, 0.05, k);
    const bool e_ok = std::abs(branch.back().energy_ratio - 0.5 * lk) <= 0.05 * lk;
    const bool p_ok = branch.front().p_norm_ratio >= 10.0 * branch.back().p_norm_ratio;
    const bool k_ok = v.final_deviation_ok && e_ok && p_ok && v.h1_decreasing;
    ok = ok && k_ok;
    os << "k=" << k << ": |-lambda - lambda_k| " << fmt(v.deviation.back()) << ", |E/mu - lambda_k/2| "
       << fmt(std::abs(branch.back().energy_ratio - 0.5 * lk)) << ", p-norm drop " << fmt(v.p_norm_drop)
       << ", H1 decreasing " << (v.h1_decreasing ? "yes" : "no") << "; ";
  }
  return {ok, os.str()};
}

Outcome criterion9() {
  const auto orth = orthant_scenario();
  std::mt19937_64 rng(5);
  Vec u = orth.sample_start(rng);
  const auto lc = limit_check(orth, u, default_s_grid());
  const auto fi = flow_invariance_check(orth, 100, 1e-8);
  const auto shifted = shifted_ball_scenario();
  std::mt19937_64 rng2(6);
  const auto cx = limit_check(shifted, shifted.sample_start(rng2), default_s_grid());
  const bool ok = lc.decays && lc.final_entry <= 1e-6 && fi.pass && fi.max_violation <= 1e-8 && !cx.decays;
  return {ok, "orthant slope " + fmt(lc.slope) + ", final " + fmt(lc.final_entry) + ", flow violation " +
                  fmt(fi.max_violation) + "; counterexample final " + fmt(cx.final_entry) +
                  (cx.decays ? " (decays: wrong)" : " (fails as expected)")};
}

Outcome criterion10() {
  const auto pr = interval_problem(kPi, 128);
  double worst_res = 0.0;
  for (double mu : {1e-4, 1.0, 2.0}) {
    const auto thr = thresholds_at(pr, mu, {2, 3, 4});
    for (const auto* r : thr.roots()) worst_res = std::max(worst_res, r->residual);
  }
  double m1_gap = 0.0;
  for (double mu : {1.0, 2.0}) {
    const auto thr = thresholds_at(pr, mu, {2});
    m1_gap = std::max(m1_gap, std::abs(thr.M1 - thr.M1_floor) / std::abs(thr.M1_floor));
  }
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec u = random_field(pr.d, 9001, static_cast<std::uint64_t>(i));
    if (!mass_gn_inequality_holds(pr.d, u, kP, pr.kest.K)) ++violations;
  }
  const bool ok = worst_res <= 1e-10 && m1_gap <= 1e-12 && violations == 0;
  return {ok, "max root residual " + fmt(worst_res) + ", M1 equality gap " + fmt(m1_gap) + ", G-N violations " +
                  std::to_string(violations) + "/10000 (K = " + fmt(pr.kest.K) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                        criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::stoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const Error& e) {
      o = {false, std::string("error ") + e.what()};
    } catch (const std::exception& e) {
      o = {false, std::string("exception ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("CRITERION %d: %s (%.2f s) %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
