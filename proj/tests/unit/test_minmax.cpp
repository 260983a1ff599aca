#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qgnls/error.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/minmax.hpp"

using namespace qgnls;

namespace {

struct Fixture {
  Discretization d = assemble_uniform(interval_graph(std::numbers::pi), 64);
  SpectralData spec = eigenpairs(d, 6);
  double p = 7.0;
  double K = estimate_K(d, 7.0, 64).K;
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

ThresholdReport thresholds_at(double mu, const std::vector<int>& ks) {
  return compute_thresholds({fx().p, mu, std::numbers::pi}, fx().K, fx().spec, ks);
}

}  // namespace

TEST(Minmax, CapK2IsHalfCircle) {
  const double mu = 1e-3;
  const auto cap = build_cap(fx().spec, 2, mu, 16);
  ASSERT_GT(cap.size(), 0);
  int boundary = 0;
  for (Eigen::Index i = 0; i < cap.size(); ++i) {
    const Vec u = cap.field(i);
    EXPECT_NEAR(fx().d.mass(u), mu, 1e-8 * mu);
    EXPECT_LE(fx().d.kinetic(u), fx().spec.lambda(2) * mu * (1.0 + 1e-10));
    EXPECT_GE(cap.coeffs(i, 1), 0.0);
    if (cap.boundary[i]) {
      ++boundary;
      EXPECT_NEAR(std::abs(u.mean()), std::sqrt(mu / std::numbers::pi), 1e-8);
    }
  }
  EXPECT_EQ(boundary, 2);
}

TEST(Minmax, CapContainsPureMode) {
  const double mu = 1e-3;
  const auto cap = build_cap(fx().spec, 3, mu, 8);
  bool found = false;
  for (Eigen::Index i = 0; i < cap.size(); ++i)
    if (std::abs(cap.coeffs(i, 2) - 1.0) < 1e-14) {
      found = true;
      EXPECT_NEAR(fx().d.kinetic(cap.field(i)), fx().spec.lambda(3) * mu, 1e-10 * mu);
    }
  EXPECT_TRUE(found);
}

TEST(Minmax, CapRejectsCoarseGridAndBadIndex) {
  EXPECT_THROW(build_cap(fx().spec, 2, 1e-3, 4), ConfigError);
  const auto dl = assemble_uniform(loop_graph(2.0 * std::numbers::pi), 64);
  EXPECT_THROW(build_cap(eigenpairs(dl, 4), 3, 1e-3, 8), NumericalError);
}

TEST(Minmax, LevelEstimatesInRegime) {
  const auto t0 = thresholds_at(1e-4, {2});
  const double mu = 0.5 * t0.mu_j;
  const auto thr = thresholds_at(mu, {2});
  const auto cap = build_cap(fx().spec, 2, mu, 16);
  const auto lv = level_estimates(fx().d, cap, thr, fx().p);
  EXPECT_TRUE(lv.regime_ok);
  EXPECT_TRUE(lv.separation_ok);
  EXPECT_LT(lv.sup_Q, 0.5 * fx().spec.lambda(2) * mu);
  EXPECT_LT(lv.sup_Q, lv.m2);
  EXPECT_NEAR(lv.c_underbar, constant_state_energy(fx().p, mu, std::numbers::pi), 1e-15);
}

TEST(Minmax, LevelEstimatesOutOfRegime) {
  const double mu = 10.0;
  const auto thr = thresholds_at(mu, {2});
  const auto lv = level_estimates(fx().d, build_cap(fx().spec, 2, mu, 16), thr, fx().p);
  EXPECT_FALSE(lv.regime_ok);
  EXPECT_FALSE(lv.separation_ok);
}

TEST(Minmax, SignChangesCounted) {
  const auto& d = fx().d;
  EXPECT_EQ(count_sign_changes(d, fx().spec.phi(2), 1e-8), 1);
  EXPECT_EQ(count_sign_changes(d, fx().spec.phi(4), 1e-8), 3);
  EXPECT_EQ(count_sign_changes(d, fx().spec.phi(1), 1e-8), 0);
}

TEST(Minmax, SignChangingSolutionAndDeterminism) {
  const auto t0 = thresholds_at(1e-4, {2});
  const double mu = 0.5 * t0.mu_j;
  const auto thr = thresholds_at(mu, {2});
  const auto cap = build_cap(fx().spec, 2, mu, 16);
  const auto lv = level_estimates(fx().d, cap, thr, fx().p);
  FlowParams f;
  f.p = fx().p;
  f.mu = mu;
  const double nu = default_nu_cap(mu);
  const auto a = find_sign_changing(fx().d, fx().spec, cap, lv, f, nu);
  const auto b = find_sign_changing(fx().d, fx().spec, cap, lv, f, nu);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_TRUE(a.sign_changing);
  EXPECT_EQ(a.sign_changes, 1);
  EXPECT_LE(a.residual, 1e-7);
  EXPECT_GE(a.energy, lv.c_lower_bar * (1.0 - 1e-9));
  EXPECT_LE(a.mass_error, 1e-10);
  EXPECT_NEAR(a.h1_norm * a.h1_norm, a.kinetic + mu, 1e-12 * mu);
  EXPECT_NEAR(a.pde_lambda, a.tested_lambda, 1e-6);
  EXPECT_LT(a.max_flux, 1e-3);
}

TEST(Minmax, LadderWithMirrors) {
  const auto t0 = thresholds_at(1e-4, {2, 3});
  const double mu = 0.5 * t0.mu_j;
  const auto thr = thresholds_at(mu, {2, 3});
  FlowParams f;
  f.p = fx().p;
  f.mu = mu;
  const auto ladder = solve_ladder(fx().d, fx().spec, thr, {2, 3}, f, default_nu_cap(mu));
  ASSERT_EQ(ladder.solutions.size(), 3u);
  ASSERT_EQ(ladder.mirrors.size(), 3u);
  EXPECT_TRUE(ladder.ordering_ok);
  EXPECT_EQ(ladder.solutions[0].kind, "positive");
  EXPECT_GT(ladder.solutions[0].u.minCoeff(), 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(ladder.mirrors[i].energy, ladder.solutions[i].energy);
    EXPECT_EQ(ladder.mirrors[i].u, -ladder.solutions[i].u);
  }
  EXPECT_LT(ladder.solutions[1].energy, ladder.solutions[2].energy);
  EXPECT_GT(ladder.min_pairwise_distance, 1e-3);
}

TEST(Minmax, LinkSanityK2) {
  const auto cap = build_cap(fx().spec, 2, 1e-3, 16);
  const auto lc = link_sanity(fx().d, fx().spec, cap, 20);
  EXPECT_EQ(lc.deformations, 20);
  EXPECT_EQ(lc.passed, 20);
}
