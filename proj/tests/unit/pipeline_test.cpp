#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sdl/errors.hpp"
#include "sdl/linalg.hpp"
#include "sdl/model.hpp"
#include "sdl/pipeline.hpp"
#include "support/oracles.hpp"

using namespace sdl;
using sdl::testing::gaussian_matrix;
using sdl::testing::gaussian_vector;

TEST(Precondition, WhitensRows) {
  Rng rng(1);
  const DenseMatrix y = gaussian_matrix(4, 300, rng);
  const DenseMatrix w = precondition(y);
  EXPECT_LE((w * w.transpose() - DenseMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  const DenseMatrix s = precondition(y, 0.25);
  EXPECT_LE((s * s.transpose() / 75.0 - DenseMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Precondition, RemovesOrthogonalMixing) {
  Rng rng(2);
  const DenseMatrix a = sample_conditioned_dictionary(5, 10.0, rng);
  const DenseMatrix x = sample_bg(5, 400, 0.3, rng);
  const DenseMatrix w = precondition(DenseMatrix(a * x));
  // (A X X^T A^T)^{-1/2} A X = U (X X^T)^{-1/2} X for an orthogonal U.
  const DenseMatrix u = w * x.transpose() * inv_sqrt_psd(DenseMatrix(x * x.transpose()));
  EXPECT_LE((u * u.transpose() - DenseMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Precondition, RejectsBadInput) {
  EXPECT_THROW(precondition(DenseMatrix(0, 0)), InvalidInput);
  EXPECT_THROW(precondition(DenseMatrix::Ones(2, 5)), SingularMatrix);
  EXPECT_THROW(precondition(DenseMatrix::Identity(2, 2), 0.0), InvalidInput);
  EXPECT_THROW(precondition(DenseMatrix::Identity(2, 2), 1.5), InvalidInput);
}

TEST(Deflation, ObjectiveOnComplementIsRestriction) {
  Rng rng(3);
  const DenseMatrix y = gaussian_matrix(6, 50, rng);
  const DenseMatrix v = sample_orthogonal_dictionary(6, rng).leftCols(2);
  const DenseMatrix u = orthonormal_complement_basis(v);
  const Objective<double> full(y, 0.05);
  const Objective<double> reduced(DenseMatrix(u.transpose() * y), 0.05);
  for (int t = 0; t < 5; ++t) {
    const Vector w = SpherePoint<double>(gaussian_vector(4, rng)).vector();
    EXPECT_NEAR(objective_value(reduced, w), objective_value(full, Vector(u * w)), 1e-14);
    const Vector gr = euclid_grad(reduced, w);
    EXPECT_LE((gr - u.transpose() * euclid_grad(full, Vector(u * w))).norm(), 1e-13);
  }
}

TEST(RecoverAll, SingleDimension) {
  DenseMatrix y(1, 5);
  y << 1, -2, 0, 3, 0.5;
  const auto res = recover_all(y, 0.01);
  ASSERT_TRUE(res.complete) << res.failure;
  EXPECT_NEAR(std::abs(res.q_stars(0, 0)), 1.0, 1e-15);
  ASSERT_EQ(res.steps.size(), 1u);
  EXPECT_FALSE(res.steps[0].solve.has_value());
  EXPECT_LE(res.residual, 1e-14);
}

TEST(RecoverAll, OrthogonalDictionary) {
  Rng rng(4);
  const Index n = 5;
  const DenseMatrix a0 = sample_orthogonal_dictionary(n, rng);
  const DenseMatrix x0 = sample_bg(n, five_n2_log_n(n) * 4, 0.2, rng);
  const DenseMatrix y = a0 * x0;
  RecoveryOptions opts;
  opts.seed = 5;
  const auto res = recover_all(y, 0.01, opts);
  ASSERT_TRUE(res.complete) << res.failure;
  EXPECT_EQ(res.steps.size(), static_cast<std::size_t>(n));
  EXPECT_EQ(res.flagged_steps(), 0);
  for (std::size_t l = 0; l < res.steps.size(); ++l) {
    EXPECT_EQ(res.steps[l].dim, n - static_cast<Index>(l));
    EXPECT_TRUE(res.steps[l].rounded);
  }
  // Rows of Q are orthonormal and Q Y reproduces X0 up to a signed permutation.
  EXPECT_LE((res.q_stars * res.q_stars.transpose() - DenseMatrix::Identity(n, n)).cwiseAbs().maxCoeff(),
            1e-8);
  const auto match = match_signed_permutation(res.x_hat, x0);
  EXPECT_LE(match.max_rel_err, 1e-8);
  EXPECT_LE(dictionary_match_error(res.a_hat, a0, match), 1e-8);
  EXPECT_LE(res.residual, 1e-12);

  std::ostringstream report;
  write_run_report(report, res, match, 0.0);
  const std::string text = report.str();
  for (const char* key : {"n=5\n", "complete=1\n", "steps=5\n", "flagged_steps=0\n",
                          "step0.dim=5\n", "step4.dim=1\n", "max_row_error=", "permutation=",
                          "signs=", "max_dictionary_column_error=0\n"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(RecoverAll, WithoutRoundingStillDeflates) {
  Rng rng(6);
  const DenseMatrix y = sample_bg(4, 600, 0.2, rng);
  RecoveryOptions opts;
  opts.round = false;
  const auto res = recover_all(y, 0.01, opts);
  ASSERT_TRUE(res.complete) << res.failure;
  for (const auto& s : res.steps) EXPECT_FALSE(s.rounded);
  EXPECT_LE((res.q_stars * res.q_stars.transpose() - DenseMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(RecoverAll, ReportsPartialFailure) {
  Rng rng(7);
  const DenseMatrix y = sample_bg(3, 100, 0.3, rng);
  RecoveryOptions opts;
  opts.simplex.max_iterations = 0;
  const auto res = recover_all(y, 0.01, opts);
  EXPECT_FALSE(res.complete);
  EXPECT_EQ(res.steps.size(), 1u);
  EXPECT_NE(res.failure.find("step 0"), std::string::npos);
  std::ostringstream report;
  write_run_report(report, res);
  EXPECT_NE(report.str().find("complete=0\n"), std::string::npos);
  EXPECT_NE(report.str().find("failure=step 0"), std::string::npos);
  EXPECT_THROW(recover_all(y, 0.0), InvalidInput);
}

TEST(Reconstruct, ExactForInvertibleCoefficients) {
  Rng rng(8);
  const DenseMatrix a = gaussian_matrix(3, 3, rng);
  const DenseMatrix x = gaussian_matrix(3, 20, rng);
  const auto fit = reconstruct_dictionary(DenseMatrix(a * x), x);
  EXPECT_LE((fit.a_hat - a).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(fit.residual, 1e-14);
  EXPECT_THROW(reconstruct_dictionary(DenseMatrix(a * x), DenseMatrix::Ones(3, 20)), SingularMatrix);
  EXPECT_THROW(reconstruct_dictionary(DenseMatrix::Ones(3, 4), DenseMatrix::Ones(3, 5)), InvalidInput);
}

TEST(SignedPermutation, ReversedAndNegatedRows) {
  Rng rng(9);
  const DenseMatrix truth = gaussian_matrix(4, 30, rng);
  DenseMatrix hat(4, 30);
  for (Index i = 0; i < 4; ++i) hat.row(i) = (i % 2 ? -1.0 : 1.0) * truth.row(3 - i);
  const auto m = match_signed_permutation(hat, truth);
  EXPECT_EQ(m.perm, (std::vector<Index>{3, 2, 1, 0}));
  EXPECT_EQ(m.signs(0), 1.0);
  EXPECT_EQ(m.signs(1), -1.0);
  EXPECT_LE(m.max_rel_err, 1e-15);

  DenseMatrix a_true = gaussian_matrix(3, 4, rng);
  DenseMatrix a_hat(3, 4);
  for (Index i = 0; i < 4; ++i) a_hat.col(i) = m.signs(i) * a_true.col(m.perm[static_cast<std::size_t>(i)]);
  EXPECT_LE(dictionary_match_error(a_hat, a_true, m), 1e-15);
}

TEST(SignedPermutation, ScaledRows) {
  Rng rng(10);
  const DenseMatrix truth = gaussian_matrix(3, 25, rng);
  const DenseMatrix hat = 2.0 * truth;
  const auto m = match_signed_permutation(hat, truth);
  EXPECT_NEAR(m.max_rel_err, 1.0, 1e-14);
  EXPECT_LE(m.max_rel_err_scaled, 1e-14);
  EXPECT_THROW(match_signed_permutation(hat, DenseMatrix(truth.topRows(2))), InvalidInput);
}

TEST(SignedPermutation, PrefersGlobalAssignment) {
  // Greedy row-by-row matching would give row 0 to truth 0 and leave row 1
  // with a weak match.
  DenseMatrix truth(2, 3);
  truth << 1, 0, 0, 0, 1, 0;
  DenseMatrix hat(2, 3);
  hat << 0.8, 0.6, 0, 1, 0.05, 0;
  const auto m = match_signed_permutation(hat, truth);
  EXPECT_EQ(m.perm, (std::vector<Index>{1, 0}));
}
