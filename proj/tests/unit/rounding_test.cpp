#include <gtest/gtest.h>

#include <cmath>

#include "sdl/errors.hpp"
#include "sdl/model.hpp"
#include "sdl/rounding.hpp"
#include "support/oracles.hpp"

using namespace sdl;
using sdl::testing::gaussian_matrix;
using sdl::testing::gaussian_vector;
using sdl::testing::l1_rounding_enumeration;

TEST(LpRound, IdentityData) {
  const DenseMatrix y = DenseMatrix::Identity(4, 4);
  const auto res = lp_round<double>(y, Vector::Unit(4, 2));
  EXPECT_LE((res.q_scaled - Vector::Unit(4, 2)).norm(), 1e-12);
  EXPECT_NEAR(res.objective, 1.0, 1e-12);
  EXPECT_NEAR(res.dual_value, 1.0, 1e-12);
  EXPECT_NEAR(res.alignment, 1.0, 1e-12);
  EXPECT_FALSE(res.below_threshold);
}

TEST(LpRound, LinearConstraintHolds) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const DenseMatrix y = gaussian_matrix(5, 40, rng);
    const Vector r = gaussian_vector(5, rng);
    const auto res = lp_round<double>(y, r);
    EXPECT_NEAR(r.dot(res.q_scaled), 1.0, 1e-9);
    EXPECT_NEAR(res.q.norm(), 1.0, 1e-14);
    EXPECT_NEAR(res.objective, res.dual_value, 1e-7 * std::max(1.0, res.dual_value));
    EXPECT_GT(res.simplex_iterations, 0);
  }
}

TEST(LpRound, AgreesWithVertexEnumeration) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + t % 3;
    const DenseMatrix y = gaussian_matrix(n, 8, rng);
    const Vector r = gaussian_vector(n, rng);
    const auto ref = l1_rounding_enumeration(y, r);
    ASSERT_TRUE(ref.has_value());
    const auto res = lp_round<double>(y, r);
    EXPECT_NEAR(res.objective, *ref, 1e-9 * std::max(1.0, *ref)) << "trial " << t;
  }
}

TEST(LpRound, ScalingInvariance) {
  Rng rng(3);
  const DenseMatrix y = gaussian_matrix(4, 30, rng);
  const Vector r = gaussian_vector(4, rng);
  const auto base = lp_round<double>(y, r);
  const auto scaled_y = lp_round<double>(DenseMatrix(7.5 * y), r);
  EXPECT_LE((scaled_y.q - base.q).norm(), 1e-10);
  EXPECT_NEAR(scaled_y.objective, 7.5 * base.objective, 1e-9 * scaled_y.objective);
  const auto scaled_r = lp_round<double>(y, Vector(0.2 * r));
  EXPECT_LE((scaled_r.q - base.q).norm(), 1e-10);
  EXPECT_LE((scaled_r.q_scaled - 5.0 * base.q_scaled).norm(), 1e-9 * base.q_scaled.norm());
  EXPECT_NEAR(scaled_r.alignment, base.alignment, 1e-12);
}

TEST(LpRound, RecoversRowOfOrthogonalDictionary) {
  Rng rng(4);
  const Index n = 6;
  const DenseMatrix a0 = sample_orthogonal_dictionary(n, rng);
  const DenseMatrix y = a0 * sample_bg(n, 1500, 0.25, rng);
  // Rows of A0^T are the targets: q = a0.col(j) gives Y^T q = X0^T e_j.
  const Vector target = a0.col(2);
  Vector r = target + 0.05 * sdl::testing::unit_tangent(target, rng);
  const auto res = lp_round<double>(y, r);
  EXPECT_NEAR(std::abs(res.q.dot(target)), 1.0, 1e-10);
  EXPECT_FALSE(res.below_threshold);
}

TEST(LpRound, FlagsLowAlignment) {
  // Every point between e1 and e2 is optimal; the simplex returns a vertex.
  const DenseMatrix y = DenseMatrix::Identity(4, 4);
  Vector r(4);
  r << 1, 1, 0, 0;
  const auto res = lp_round<double>(y, r);
  EXPECT_NEAR(res.objective, 1.0, 1e-12);
  EXPECT_NEAR(res.q.cwiseAbs().maxCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(res.alignment, 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_TRUE(res.below_threshold);
}

TEST(LpRound, DualLpShape) {
  const DenseMatrix y = DenseMatrix::Ones(2, 3);
  const auto lp = rounding_dual_lp<double>(y, Vector::Ones(2));
  EXPECT_EQ(lp.rows(), 2);
  EXPECT_EQ(lp.cols(), 5);
  EXPECT_EQ(lp.upper(0), 2.0);
  EXPECT_TRUE(std::isinf(lp.upper(3)));
  EXPECT_EQ(lp.rhs(0), 3.0);
}

TEST(LpRound, RejectsBadInput) {
  const DenseMatrix y = DenseMatrix::Identity(3, 3);
  EXPECT_THROW(lp_round<double>(y, Vector::Ones(2)), InvalidInput);
  EXPECT_THROW(lp_round<double>(y, Vector::Zero(3)), InvalidInput);
  EXPECT_THROW(lp_round<double>(DenseMatrix(3, 0), Vector::Ones(3)), InvalidInput);
}
