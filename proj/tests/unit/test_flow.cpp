#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qgnls/cones.hpp"
#include "qgnls/discretization.hpp"
#include "qgnls/error.hpp"
#include "qgnls/flow.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/gradient.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/minmax.hpp"
#include "qgnls/spectrum.hpp"

using namespace qgnls;

namespace {

const Discretization& interval_d() {
  static const Discretization d = assemble_uniform(interval_graph(std::numbers::pi), 96);
  return d;
}

FlowParams solver(double mu) {
  FlowParams f;
  f.p = 7.0;
  f.mu = mu;
  return f;
}

}  // namespace

TEST(Flow, StepProjectKeepsMass) {
  const auto& d = interval_d();
  const double mu = 0.3;
  const Vec u = random_field(d, 2, 0) * 1.0;
  const Vec w = u * std::sqrt(mu / d.mass(u));
  EXPECT_EQ(step_project(d, w, Vec::Zero(w.size()), 0.5, mu), w);
  Vec V = random_field(d, 2, 1);
  V -= (d.m_dot(V, w) / mu) * w;
  const double s = 0.7;
  EXPECT_NEAR(d.mass(w + s * V), mu + s * s * d.mass(V), 1e-12);
  EXPECT_NEAR(d.mass(step_project(d, w, V, s, mu)), mu, 1e-13 * mu);
}

TEST(Flow, ConstantStateConvergesImmediately) {
  const auto& d = interval_d();
  const auto tr = descend(d, constant_state(d, 0.2), solver(0.2));
  EXPECT_EQ(tr.reason, Termination::Converged);
  EXPECT_EQ(tr.steps, 0);
}

TEST(Flow, PerturbedModeDescendsToSignChangingSolution) {
  const auto& d = interval_d();
  const auto s = eigenpairs(d, 2);
  const double mu = 1e-3;
  Vec u0 = std::sqrt(mu) * s.phi(2) + 1e-3 * std::sqrt(mu) * random_field(d, 3, 0) / random_field(d, 3, 0).norm();
  FlowParams f = solver(mu);
  f.deflation = s.leading(2);
  const auto tr = descend(d, u0, f);
  EXPECT_EQ(tr.reason, Termination::Converged);
  EXPECT_LT(tr.terminal.minCoeff(), 0.0);
  EXPECT_GT(tr.terminal.maxCoeff(), 0.0);
  EXPECT_LE(stationary_residual(d, tr.terminal, f.p, tested_multiplier(d, tr.terminal, 7.0)), 1e-8);
  for (std::size_t i = 1; i < tr.states.size(); ++i) EXPECT_LE(tr.states[i].energy, tr.states[i - 1].energy);
  for (const auto& st : tr.states) EXPECT_LE(std::abs(st.mass - mu), 1e-13 * mu);
}

TEST(Flow, BarrierRespected) {
  const auto& d = interval_d();
  const double p = 7.0, mu = 1e-3;
  const auto k = estimate_K(d, p, 16);
  FlowParams f = solver(mu);
  f.enforce_barrier = true;
  f.rho_star = rho_star(p, k.K, mu);
  f.m2 = boundary_energy_bound({p, mu, std::numbers::pi}, k.K);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto tr = descend(d, random_field(d, 40, i), f);
    if (tr.reason == Termination::LeftBarrier) continue;
    for (const auto& st : tr.states) {
      EXPECT_LT(st.kinetic, f.rho_star);
      EXPECT_LT(st.energy, f.m2);
    }
  }
}

TEST(Flow, ParamsValidation) {
  FlowParams f = solver(0.0);
  EXPECT_THROW(f.validate(), ConfigError);
  f = solver(1.0);
  f.p = 2.0;
  EXPECT_THROW(f.validate(), ConfigError);
}

TEST(Flow, Cutoffs) {
  EXPECT_EQ(band_cutoff(1.0, 1.0, 0.1), 1.0);
  EXPECT_EQ(band_cutoff(1.0 + 0.2, 1.0, 0.1), 1.0);
  EXPECT_NEAR(band_cutoff(1.0 + 0.25, 1.0, 0.1), 0.5, 1e-12);
  EXPECT_EQ(band_cutoff(1.0 + 0.3, 1.0, 0.1), 0.0);
  EXPECT_EQ(inventory_cutoff(0.3, 0.9), 0.0);
  EXPECT_EQ(inventory_cutoff(0.45, 0.9), 1.0);
  EXPECT_NEAR(inventory_cutoff(0.375, 0.9), 0.5, 1e-12);
}

TEST(Flow, DeformationFreezesNearInventory) {
  const auto& d = interval_d();
  const double mu = 1e-3;
  const auto s = eigenpairs(d, 2);
  const Vec u = std::sqrt(mu) * s.phi(2);
  FlowParams f = solver(mu);
  f.mode = FlowMode::Deformation;
  f.level_c = energy(d, u, 7.0);
  f.eps1 = 1e-3;
  f.eps_bar = 3e-3;
  f.delta1 = 1e-2;
  f.t_max = 1.0;
  const auto tr = deformation_flow(d, u, f, {u});
  EXPECT_EQ(tr.reason, Termination::Frozen);
  EXPECT_LT((tr.terminal - u).norm(), 1e-15);
}

TEST(Flow, DeformationConstantsAreFixed) {
  const auto& d = interval_d();
  const double mu = 1e-3;
  const Vec k = constant_state(d, mu);
  FlowParams f = solver(mu);
  f.mode = FlowMode::Deformation;
  f.eps1 = 1e-6;
  f.eps_bar = 3e-6;
  f.level_c = energy(d, k, 7.0) + 1.0;  // far above the constant level: h = 0
  f.delta1 = 1e-2;
  const auto tr = deformation_flow(d, k, f, {});
  EXPECT_EQ(tr.terminal, k * std::sqrt(mu / d.mass(k)));
  EXPECT_EQ(tr.states.back().t, f.t_max);
}

TEST(Flow, DeformationUnitRateInBand) {
  const auto& d = interval_d();
  const double mu = 1e-2;
  const auto s = eigenpairs(d, 3);
  const Vec u = std::sqrt(mu) * (0.6 * s.phi(2) + 0.8 * s.phi(3));
  const double e0 = energy(d, u, 7.0);
  FlowParams f = solver(mu);
  f.mode = FlowMode::Deformation;
  f.level_c = e0;
  f.eps1 = 1e-3;
  f.eps_bar = 3e-3;
  f.delta1 = 1e-3;
  f.t_max = 1e-3;  // stays inside |E - c| <= 2 eps1
  const auto tr = deformation_flow(d, u, f, {});
  const double de = tr.states.back().energy - e0;
  const double dt = tr.states.back().t;
  EXPECT_LE(std::abs(de + dt), 1e-3 * dt);
}

TEST(Flow, NewtonPolishConvergesOnModeTwo) {
  const auto& d = interval_d();
  const auto s = eigenpairs(d, 2);
  const double mu = 1e-2;
  const auto nr = newton_polish(d, std::sqrt(mu) * s.phi(2), -s.lambda(2), 7.0, mu);
  ASSERT_TRUE(nr.converged);
  EXPECT_LE(nr.residual, 1e-12);
  EXPECT_NEAR(d.mass(nr.u), mu, 1e-13);
  EXPECT_LT(std::abs(-nr.lambda - s.lambda(2)), 1e-3);
}

TEST(Flow, AuditNotApplicableOutsideCones) {
  const auto& d = interval_d();
  const auto s = eigenpairs(d, 2);
  const double mu = 1e-3;
  FlowParams f = solver(mu);
  f.store_fields = true;
  f.nu = default_nu_cap(mu) * 1e-3;
  const auto tr = descend(d, std::sqrt(mu) * s.phi(2), f);
  const auto a = cone_invariance_audit(d, tr, f.nu, 7.0, mu, 1.0, 1.0);
  EXPECT_FALSE(a.applicable);
  EXPECT_EQ(a.note, "not applicable (started outside D*)");
}

TEST(Flow, AuditPositiveStartStaysInCone) {
  const auto& d = interval_d();
  const double mu = 1e-3;
  FlowParams f = solver(mu);
  f.store_fields = true;
  f.cone_sign = 0;
  const double nu = default_nu_cap(mu);
  Vec u0 = constant_state(d, mu) + 1e-4 * random_field(d, 8, 0);
  const auto tr = descend(d, u0, f);
  const auto a = cone_invariance_audit(d, tr, nu, 7.0, mu, 1.0, 1e6);
  EXPECT_TRUE(a.applicable);
  EXPECT_FALSE(a.exited);
  EXPECT_FALSE(a.violation);
}
