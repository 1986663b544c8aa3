#include <gtest/gtest.h>

#include <cmath>

#include "sdl/errors.hpp"
#include "sdl/trs.hpp"
#include "sdl/trs_oracle.hpp"
#include "support/oracles.hpp"

using namespace sdl;
using sdl::testing::gaussian_matrix;
using sdl::testing::gaussian_vector;

namespace {

TrsModel<double> make_model(const DenseMatrix& h, const Vector& b, double radius) {
  TrsModel<double> m;
  m.h = h;
  m.b = b;
  m.radius = radius;
  return m;
}

DenseMatrix symmetric_with_spectrum(const Vector& eigs, Rng& rng) {
  const Index n = eigs.size();
  Eigen::HouseholderQR<DenseMatrix> qr(gaussian_matrix(n, n, rng));
  const DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, n);
  DenseMatrix h = q * eigs.asDiagonal() * q.transpose();
  return 0.5 * (h + h.transpose());
}

void expect_kkt(const TrsModel<double>& model, const TrsSolution<double>& sol) {
  const auto k = kkt_residuals(model, sol);
  EXPECT_LE(k.stationarity, 1e-10);
  EXPECT_GE(k.min_eigenvalue, -1e-10);
  EXPECT_LE(k.complementarity, 1e-10);
  EXPECT_LE(k.feasibility, 1e-12);
  EXPECT_GE(sol.lambda, 0.0);
}

}  // namespace

TEST(TrsExact, InteriorNewtonStep) {
  DenseMatrix h(2, 2);
  h << 2, 0, 0, 4;
  Vector b(2);
  b << -1, 2;
  const auto model = make_model(h, b, 10.0);
  const auto sol = solve_trs_exact(model);
  EXPECT_EQ(sol.status, TrsStatus::Interior);
  EXPECT_FALSE(sol.on_boundary);
  EXPECT_NEAR(sol.xi(0), 0.5, 1e-15);
  EXPECT_NEAR(sol.xi(1), -0.5, 1e-15);
  EXPECT_NEAR(sol.model_value, -0.75, 1e-15);
  EXPECT_NEAR(sol.model_decrease, 0.75, 1e-15);
  expect_kkt(model, sol);
}

TEST(TrsExact, OneDimensional) {
  const auto neg = make_model(DenseMatrix::Constant(1, 1, -1.0), Vector::Constant(1, 1.0), 2.0);
  const auto s = solve_trs_exact(neg);
  EXPECT_NEAR(s.xi(0), -2.0, 1e-12);
  expect_kkt(neg, s);
  const auto zero_h = make_model(DenseMatrix::Zero(1, 1), Vector::Constant(1, -3.0), 0.5);
  EXPECT_NEAR(solve_trs_exact(zero_h).xi(0), 0.5, 1e-12);
}

TEST(TrsExact, ZeroGradientIndefiniteIsHardCase) {
  DenseMatrix h(2, 2);
  h << 1, 0, 0, -2;
  const auto model = make_model(h, Vector::Zero(2), 0.7);
  const auto sol = solve_trs_exact(model);
  EXPECT_EQ(sol.status, TrsStatus::HardCase);
  EXPECT_NEAR(std::abs(sol.xi(1)), 0.7, 1e-12);
  EXPECT_NEAR(sol.xi(0), 0.0, 1e-12);
  EXPECT_NEAR(sol.model_value, -0.49, 1e-12);
  expect_kkt(model, sol);
}

TEST(TrsExact, HardCaseWithGradient) {
  DenseMatrix h(3, 3);
  h << -1, 0, 0, 0, 1, 0, 0, 0, 3;
  Vector b(3);
  b << 0, 0.5, 1.0;
  // Pseudo-inverse step (0, -0.25, -0.25) has norm ~0.354 < radius.
  const auto model = make_model(h, b, 1.0);
  const auto sol = solve_trs_exact(model);
  EXPECT_EQ(sol.status, TrsStatus::HardCase);
  EXPECT_NEAR(sol.lambda, 1.0, 1e-12);
  EXPECT_NEAR(sol.xi.norm(), 1.0, 1e-12);
  EXPECT_NEAR(sol.xi(1), -0.25, 1e-12);
  EXPECT_NEAR(sol.xi(2), -0.25, 1e-12);
  expect_kkt(model, sol);
}

TEST(TrsExact, RandomModelsSatisfyKkt) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Index m = 2 + t % 9;
    Vector eigs = gaussian_vector(m, rng);
    const auto model = make_model(symmetric_with_spectrum(eigs, rng), gaussian_vector(m, rng),
                                  0.1 + rng.uniform());
    const auto sol = solve_trs_exact(model);
    expect_kkt(model, sol);
    EXPECT_LE(sol.model_value, 0.0);
  }
}

TEST(TrsExact, AgreesWithBruteForceOracle) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const Index m = 2 + t % 2;
    const auto model = make_model(symmetric_with_spectrum(gaussian_vector(m, rng), rng),
                                  gaussian_vector(m, rng), 0.5 + rng.uniform());
    const auto sol = solve_trs_exact(model);
    const auto oracle = trs_brute_oracle(model, m == 2 ? 1e-4 : 1e-2);
    EXPECT_LE(sol.model_value, oracle.value + 1e-12);
    EXPECT_LE(oracle.value - sol.model_value, 1e-3 * std::max(1.0, std::abs(sol.model_value)));
  }
}

TEST(TrsExact, RejectsBadModels) {
  EXPECT_THROW(solve_trs_exact(make_model(DenseMatrix::Identity(2, 2), Vector::Ones(3), 1.0)),
               InvalidInput);
  EXPECT_THROW(solve_trs_exact(make_model(DenseMatrix::Identity(2, 2), Vector::Ones(2), 0.0)),
               InvalidInput);
  DenseMatrix h(2, 2);
  h << 1, 1, 0, 1;
  EXPECT_THROW(solve_trs_exact(make_model(h, Vector::Ones(2), 1.0)), InvalidInput);
}

TEST(TrsTcg, SolvesPositiveDefiniteInterior) {
  Rng rng(3);
  Vector eigs = Vector::LinSpaced(8, 1.0, 5.0);
  const DenseMatrix h = symmetric_with_spectrum(eigs, rng);
  const Vector b = 0.01 * gaussian_vector(8, rng);
  TcgOptions<double> opts;
  opts.max_iter = 50;
  opts.probe_threshold = 0.0;
  const auto sol = solve_trs_tcg<double>([&](const Vector& v) { return Vector(h * v); }, b, 10.0, opts);
  EXPECT_EQ(sol.status, TrsStatus::Interior);
  // CG stops once the residual is below |b| * min(kappa, |b|).
  EXPECT_LE((h * sol.xi + b).norm(), b.squaredNorm() * (1.0 + 1e-9));
  opts.kappa = 1e-12;
  opts.theta = 10.0;
  const auto tight = solve_trs_tcg<double>([&](const Vector& v) { return Vector(h * v); }, b, 10.0, opts);
  const Vector exact = -h.ldlt().solve(b);
  EXPECT_LE((tight.xi - exact).norm(), 1e-10 * exact.norm());
}

TEST(TrsTcg, IterateNormsNondecrease) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const DenseMatrix h = symmetric_with_spectrum(gaussian_vector(10, rng), rng);
    const Vector b = gaussian_vector(10, rng);
    TcgTrace<double> trace;
    const auto sol = solve_trs_tcg<double>([&](const Vector& v) { return Vector(h * v); }, b, 1.0,
                                           {}, &trace);
    ASSERT_GE(trace.iterate_norms.size(), 2u);
    for (std::size_t i = 1; i < trace.iterate_norms.size(); ++i) {
      EXPECT_GE(trace.iterate_norms[i], trace.iterate_norms[i - 1] - 1e-14);
    }
    EXPECT_LE(sol.xi.norm(), 1.0 + 1e-12);
    EXPECT_GT(trace.hess_vec_calls, 0);
  }
}

TEST(TrsTcg, CloseToExactOnRandomModels) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Vector eigs = gaussian_vector(10, rng).cwiseAbs().array() + 0.1;
    const auto model = make_model(symmetric_with_spectrum(eigs, rng), gaussian_vector(10, rng),
                                  0.2 + rng.uniform());
    const auto exact = solve_trs_exact(model);
    TcgOptions<double> opts;
    opts.max_iter = 30;
    const auto tcg = solve_trs_tcg<double>([&](const Vector& v) { return Vector(model.h * v); },
                                           model.b, model.radius, opts);
    EXPECT_GE(tcg.model_decrease, 0.9 * exact.model_decrease);
    EXPECT_LE(tcg.model_decrease, exact.model_decrease + 1e-12);
  }
}

TEST(TrsTcg, ProbeFindsNegativeCurvatureAtCriticalPoint) {
  DenseMatrix h = DenseMatrix::Identity(5, 5);
  h(3, 3) = -0.5;
  TcgTrace<double> trace;
  const auto sol = solve_trs_tcg<double>([&](const Vector& v) { return Vector(h * v); },
                                         Vector::Zero(5), 0.2, {}, &trace);
  EXPECT_TRUE(trace.probe_ran);
  EXPECT_TRUE(trace.used_negative_curvature);
  EXPECT_EQ(sol.status, TrsStatus::TcgNegCurv);
  EXPECT_NEAR(sol.min_eigenvalue, -0.5, 1e-6);
  EXPECT_NEAR(std::abs(sol.xi(3)), 0.2, 1e-6);
  EXPECT_NEAR(sol.xi.norm(), 0.2, 1e-12);
}

TEST(TrsTcg, ProbeSilentAtMinimum) {
  const DenseMatrix h = DenseMatrix::Identity(4, 4);
  TcgTrace<double> trace;
  const auto sol = solve_trs_tcg<double>([&](const Vector& v) { return Vector(h * v); },
                                         Vector::Zero(4), 0.2, {}, &trace);
  EXPECT_TRUE(trace.probe_ran);
  EXPECT_FALSE(trace.used_negative_curvature);
  EXPECT_EQ(sol.xi.norm(), 0.0);
  EXPECT_TRUE(std::isnan(sol.min_eigenvalue));
}

TEST(TrsTcg, ProjectionKeepsIteratesInSubspace) {
  // Model on the plane x_2 = 0 embedded in R^3; H has a spurious negative
  // eigenvalue along the discarded axis.
  DenseMatrix h = DenseMatrix::Identity(3, 3);
  h(2, 2) = -4.0;
  auto proj = [](const Vector& v) {
    Vector w = v;
    w(2) = 0.0;
    return w;
  };
  Vector b(3);
  b << 1e-5, -2e-5, 0.0;
  const auto sol = solve_trs_tcg<double>([&](const Vector& v) { return Vector(h * proj(v)); }, proj,
                                         b, 1.0, {});
  EXPECT_EQ(sol.xi(2), 0.0);
  EXPECT_EQ(sol.status, TrsStatus::Interior);
  EXPECT_NEAR(sol.xi(0), -1e-5, 1e-15);
}

TEST(TrsTcg, RejectsBadRadius) {
  EXPECT_THROW(solve_trs_tcg<double>([](const Vector& v) { return v; }, Vector::Ones(2), -1.0),
               InvalidInput);
}
