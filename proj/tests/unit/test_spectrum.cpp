#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qgnls/discretization.hpp"
#include "qgnls/error.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/spectrum.hpp"

using namespace qgnls;

TEST(Spectrum, IntervalNeumannOracle) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), 256);
  const auto s = eigenpairs(d, 6);
  EXPECT_NEAR(s.lambda(1), 0.0, 1e-10);
  for (int k = 2; k <= 6; ++k) EXPECT_NEAR(s.lambda(k) / ((k - 1.0) * (k - 1.0)), 1.0, 1e-4);
}

TEST(Spectrum, GroundStateConstant) {
  const auto d = assemble_uniform(star_graph(3, 1.0), 32);
  const auto s = eigenpairs(d, 3);
  const Vec phi1 = s.phi(1);
  EXPECT_NEAR(phi1.minCoeff(), 1.0 / std::sqrt(3.0), 1e-8);
  EXPECT_NEAR(phi1.maxCoeff(), 1.0 / std::sqrt(3.0), 1e-8);
}

TEST(Spectrum, OrthonormalAndRayleighConsistent) {
  const auto d = assemble_uniform(tadpole_graph(2.0 * std::numbers::pi, 1.0), 64);
  const auto s = eigenpairs(d, 8);
  const Mat G = s.eigenfunctions.transpose() * d.mass_matrix() * s.eigenfunctions;
  EXPECT_LE((G - Mat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
  for (int k = 1; k <= 8; ++k) {
    const Vec f = s.phi(k);
    EXPECT_LE(std::abs(d.kinetic(f) - s.lambda(k)), 1e-8 * std::max(1.0, s.lambda(k)));
    if (k > 1) {
      EXPECT_GE(s.lambda(k), s.lambda(k - 1));
    }
  }
}

TEST(Spectrum, ConsistentMassConvergesFromAboveAtSecondOrder) {
  double prev = 0.0;
  for (int cells : {32, 64, 128}) {
    const auto d = assemble_uniform(interval_graph(std::numbers::pi), cells, 5, MassScheme::Consistent);
    const auto s = eigenpairs(d, 3);
    const double err = s.lambda(3) - 4.0;
    EXPECT_GT(err, 0.0);
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
      EXPECT_LT(prev / err, 4.5);
    }
    prev = err;
  }
}

TEST(Spectrum, BlendedMassIsFourthOrder) {
  double prev = 0.0;
  for (int cells : {16, 32, 64}) {
    const auto d = assemble_uniform(interval_graph(std::numbers::pi), cells);
    const double err = std::abs(eigenpairs(d, 3).lambda(3) - 4.0);
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 12.0);
    }
    prev = err;
  }
}

TEST(Spectrum, LoopDoublePairsAndGapIndices) {
  const auto d = assemble_uniform(loop_graph(2.0 * std::numbers::pi), 256);
  const auto s = eigenpairs(d, 7);
  for (int k : {2, 4, 6}) EXPECT_LT(std::abs(s.lambda(k + 1) - s.lambda(k)) / s.lambda(k), 1e-6);
  EXPECT_EQ(spectral_gap_indices(s), (std::vector<int>{2, 4, 6}));
  EXPECT_FALSE(is_admissible(s, 3));
}

TEST(Spectrum, IntervalAllIndicesAdmissible) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), 64);
  EXPECT_EQ(spectral_gap_indices(eigenpairs(d, 5)), (std::vector<int>{2, 3, 4, 5}));
}

TEST(Spectrum, BlockInteriorExcluded) {
  Vec ev(5);
  ev << 0.0, 1.0, 1.0, 1.0, 2.0;
  EXPECT_EQ(spectral_gap_indices(ev), (std::vector<int>{2, 5}));
}

TEST(Spectrum, SignConventionAndDeterminism) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), 64);
  const auto a = eigenpairs(d, 4), b = eigenpairs(d, 4);
  EXPECT_EQ(a.eigenfunctions, b.eigenfunctions);
  for (int k = 2; k <= 4; ++k) {
    const Vec f = a.phi(k);
    for (Eigen::Index i = 0; i < f.size(); ++i)
      if (std::abs(f[i]) > 1e-10) {
        EXPECT_GT(f[i], 0.0) << "k = " << k;
        break;
      }
  }
}
