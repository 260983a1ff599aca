#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qgnls/cones.hpp"
#include "qgnls/error.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/invariance_lab.hpp"
#include "qgnls/spectrum.hpp"

using namespace qgnls;

TEST(Lab, OrthantLimitDecaysLinearly) {
  const auto sc = orthant_scenario();
  std::mt19937_64 rng(1);
  const auto r = limit_check(sc, sc.sample_start(rng), default_s_grid());
  EXPECT_TRUE(r.decays);
  EXPECT_LE(r.final_entry, 1e-6);
  EXPECT_LE(r.tangency_error, 1e-12);
}

TEST(Lab, FixedPointGivesZeroTable) {
  auto sc = orthant_scenario();
  std::mt19937_64 rng(2);
  const Vec u = sc.sample_start(rng);
  sc.G = [](const Vec& w) { return w; };
  const auto r = limit_check(sc, u, default_s_grid());
  for (double e : r.entries) EXPECT_EQ(e, 0.0);
  EXPECT_TRUE(r.decays);
}

TEST(Lab, ShiftedBallCounterexampleFails) {
  const auto sc = shifted_ball_scenario();
  EXPECT_FALSE(sc.scaling_by_construction);
  std::mt19937_64 rng(3);
  const auto r = limit_check(sc, sc.sample_start(rng), default_s_grid());
  EXPECT_FALSE(r.decays);
  EXPECT_GT(r.final_entry, 1e-2);
}

TEST(Lab, OracleUnavailableWithoutProjection) {
  auto sc = orthant_scenario();
  sc.project = nullptr;
  sc.exact_bmu_distance = nullptr;
  std::mt19937_64 rng(4);
  EXPECT_THROW(limit_check(sc, sc.sample_start(rng), default_s_grid()), NumericalError);
}

TEST(Lab, OrthantFlowInvariant) {
  const auto r = flow_invariance_check(orthant_scenario(), 100);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_violation, 1e-8);
  EXPECT_LE(r.max_tangency_error, 1e-10);
  EXPECT_LE(r.max_mass_error, 1e-12);
}

TEST(Lab, QuarterCircleExactlyInvariant) {
  const auto r = flow_invariance_check(quarter_circle_scenario(), 20);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_violation, 1e-14);
}

TEST(Lab, LeakViolationsAreLocalised) {
  const auto r = flow_invariance_check(leaky_orthant_scenario(), 60);
  EXPECT_FALSE(r.pass);
  ASSERT_FALSE(r.violating_starts.empty());
  for (int s : r.violating_starts)
    EXPECT_NE(std::find(r.flagged_starts.begin(), r.flagged_starts.end(), s), r.flagged_starts.end()) << s;
}

TEST(Lab, PolarCapRichardsonRatio) {
  const auto r = flow_invariance_check(polar_cap_scenario(), 10);
  ASSERT_TRUE(std::isfinite(r.richardson_ratio));
  EXPECT_GE(r.richardson_ratio, 1.7);
  EXPECT_LE(r.richardson_ratio, 2.3);
}

TEST(Lab, ConvexAndScalingOracles) {
  for (const auto& sc : {orthant_scenario(), halfspace_scenario(), cone_neighbourhood_scenario()}) {
    EXPECT_EQ(convexity_check(sc).violations, 0) << sc.name;
    EXPECT_EQ(scaling_check(sc).violations, 0) << sc.name;
    EXPECT_EQ(g_membership_check(sc, 2000).violations, 0) << sc.name;
  }
  EXPECT_GT(scaling_check(shifted_ball_scenario(), 2000).violations, 0);
}

TEST(Lab, MirrorPdeScenarioGuards) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), 32);
  const auto big = assemble_uniform(interval_graph(std::numbers::pi), 100);
  const double mu = 1e-3, nu = 1e-3;
  EXPECT_TRUE(mirror_pde_scenario(d, 7.0, mu, nu, 1.0, 1.0).warnings.empty());
  EXPECT_FALSE(mirror_pde_scenario(d, 7.0, mu, nu, 1e-4, 1.0).warnings.empty());
  EXPECT_FALSE(mirror_pde_scenario(d, 7.0, mu, nu, 1.0, 1e-4).warnings.empty());
  EXPECT_THROW(mirror_pde_scenario(big, 7.0, mu, nu, 1.0, 1.0), ConfigError);
}

TEST(Lab, GConeCheckInRegime) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), 32);
  const double p = 7.0, mu = 1e-3;
  const auto k = estimate_K(d, p, 32);
  const ProblemParams prm{p, mu, std::numbers::pi};
  const auto thr = compute_thresholds(prm, k.K, eigenpairs(d, 3), {2});
  ASSERT_LE(mu, thr.mu_tilde.value);
  const double nu = default_nu_cap(mu);
  for (int sign : {-1, +1}) {
    const auto r = g_cone_check(d, p, mu, nu, thr.rho_star, thr.mu_tilde.value, sign, 500);
    EXPECT_TRUE(r.in_regime);
    EXPECT_GT(r.checks, 0);
    EXPECT_EQ(r.failures, 0);
    EXPECT_EQ(r.negative_lambda, 0);
    EXPECT_TRUE(r.pass);
  }
}
