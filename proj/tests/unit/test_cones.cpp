#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qgnls/cones.hpp"
#include "qgnls/discretization.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/spectrum.hpp"

using namespace qgnls;

namespace {

const Discretization& interval_d() {
  static const Discretization d = assemble_uniform(interval_graph(std::numbers::pi), 64);
  return d;
}

}  // namespace

TEST(Cones, SplitPartsIsExact) {
  const auto& d = interval_d();
  const Vec u = random_field(d, 1, 0);
  const auto [pos, neg] = split_parts(u);
  EXPECT_EQ(pos - neg, u);
  EXPECT_GE(pos.minCoeff(), 0.0);
  EXPECT_GE(neg.minCoeff(), 0.0);
  EXPECT_EQ(pos.cwiseProduct(neg).cwiseAbs().maxCoeff(), 0.0);
  const auto [kp, kn] = split_parts(constant_state(d, 0.5));
  EXPECT_EQ(kn.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Cones, OddModeHasBalancedParts) {
  const auto& d = interval_d();
  const auto s = eigenpairs(d, 2);
  const Vec u = std::sqrt(0.1) * s.phi(2);
  const auto r = cone_classify(d, u, 1e-6);
  EXPECT_NEAR(r.dist_plus, r.dist_minus, 1e-8 * r.dist_plus);
  EXPECT_EQ(r.classification, ConeClass::InSStar);
  const auto wide = cone_classify(d, u, 2.0 * r.dist_plus);
  EXPECT_NE(wide.classification, ConeClass::InSStar);
}

TEST(Cones, ClassificationOfSignedStates) {
  const auto& d = interval_d();
  const Vec k = constant_state(d, 0.2);
  EXPECT_EQ(cone_classify(d, k, 1e-9).classification, ConeClass::InPNu);
  EXPECT_EQ(cone_classify(d, -k, 1e-9).classification, ConeClass::InMinusPNu);
  EXPECT_EQ(cone_classify(d, k, 1e-9).dist_plus, 0.0);
  EXPECT_TRUE(in_cone_neighbourhood(d, k, +1, 1e-9));
  EXPECT_FALSE(in_cone_neighbourhood(d, k, -1, 1e-9));
}

TEST(Cones, SmallDipStaysInCone) {
  const auto& d = interval_d();
  Vec u = constant_state(d, 0.2);
  u[d.meshes()[0].dofs[10]] = -1e-4;
  const auto r = cone_classify(d, u, 1e-2);
  EXPECT_GT(r.dist_plus, 0.0);
  EXPECT_EQ(r.classification, ConeClass::InPNu);
}

TEST(Cones, SeparationEstimateBoundsSamples) {
  const auto& d = interval_d();
  const auto s = eigenpairs(d, 6);
  const double mu = 0.05, rho = 10.0;
  const auto sep = separation_delta(d, s, mu, rho, 2, 100, 11);
  ASSERT_FALSE(sep.empty_set);
  EXPECT_GT(sep.delta, 0.0);
  EXPECT_NEAR(choose_nu(sep, 1.0), 0.5 * sep.delta, 1e-15);
  EXPECT_NEAR(choose_nu(sep, 1e-9), 1e-9, 1e-24);
  EXPECT_NEAR(std::min(sep.dist_plus_at_min, sep.dist_minus_at_min), sep.delta, 1e-15);
  // The sampled set is symmetric under u -> -u, which swaps the two distances.
  const auto flipped = cone_classify(d, -sep.minimizer, 1.0);
  EXPECT_EQ(flipped.dist_plus, sep.dist_minus_at_min);
  EXPECT_EQ(flipped.dist_minus, sep.dist_plus_at_min);
  for (int j = 2; j <= 6; ++j) {
    const Vec u = std::sqrt(mu) * s.phi(j);
    if (d.kinetic(u) >= rho) continue;
    const auto r = cone_classify(d, u, 1.0);
    EXPECT_GE(std::min(r.dist_plus, r.dist_minus), sep.delta * (1.0 - 1e-12));
  }
}

TEST(Cones, EmptySeparationSetGivesInfiniteDelta) {
  const auto& d = interval_d();
  const auto s = eigenpairs(d, 4);
  const auto sep = separation_delta(d, s, 0.05, 1e-6, 2, 20, 11);
  EXPECT_TRUE(sep.empty_set);
  EXPECT_EQ(choose_nu(sep, 0.3), 0.3);
}
