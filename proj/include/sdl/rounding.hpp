#pragma once

// LP rounding: minimize ||Y^T q||_1 subject to <r, q> = 1.
//
// The problem is solved through its dual, which has only n equality rows:
//
//   maximize lambda  s.t.  Y s = lambda r,  -1 <= s_k <= 1.
//
// With sigma = s + 1 in [0, 2] and lambda = lambda_plus - lambda_minus this is
// a bounded-variable standard-form LP. The simplex multipliers of its optimal
// basis are an optimal vertex q of the rounding problem, and strong duality
// (||Y^T q||_1 = lambda) is checked before returning.

#include <cmath>
#include <limits>
#include <string>

#include "sdl/errors.hpp"
#include "sdl/simplex.hpp"
#include "sdl/types.hpp"

namespace sdl {

// Rounding is guaranteed to return the target direction once the input lies
// within this cosine of it.
inline constexpr double kRoundingConfidence = 249.0 / 250.0;

template <typename Scalar>
struct RoundingResult {
  Vec<Scalar> q_scaled;   // optimal vertex, <r, q_scaled> = 1
  Vec<Scalar> q;          // q_scaled / ||q_scaled||
  Scalar objective;       // ||Y^T q_scaled||_1
  Scalar dual_value;      // lambda at the optimum
  Scalar alignment;       // |<r / ||r||, q>|
  bool below_threshold;   // alignment < kRoundingConfidence
  long simplex_iterations;
};

template <typename Scalar>
LpStandardForm<Scalar> rounding_dual_lp(const Mat<Scalar>& y_hat, const Vec<Scalar>& r) {
  const Index n = y_hat.rows();
  const Index p = y_hat.cols();
  LpStandardForm<Scalar> lp;
  lp.a.resize(n, p + 2);
  lp.a.leftCols(p) = y_hat;
  lp.a.col(p) = -r;
  lp.a.col(p + 1) = r;
  lp.rhs = y_hat.rowwise().sum();
  lp.cost = Vec<Scalar>::Zero(p + 2);
  lp.cost(p) = Scalar(-1);
  lp.cost(p + 1) = Scalar(1);
  lp.upper = Vec<Scalar>::Constant(p + 2, std::numeric_limits<Scalar>::infinity());
  lp.upper.head(p).setConstant(Scalar(2));
  return lp;
}

template <typename Scalar>
RoundingResult<Scalar> lp_round(const Mat<Scalar>& y_hat, const Vec<Scalar>& r,
                                const SimplexOptions& opts = {}) {
  const Index n = y_hat.rows();
  if (r.size() != n) throw InvalidInput("lp_round: r has the wrong dimension");
  if (y_hat.cols() < 1) throw InvalidInput("lp_round: empty data matrix");
  const Scalar rnorm = r.norm();
  if (!(rnorm > Scalar(0)) || !r.allFinite()) throw InvalidInput("lp_round: r must be nonzero");

  LpSolution<Scalar> sol;
  try {
    sol = simplex_solve(rounding_dual_lp(y_hat, r), opts);
  } catch (const Unbounded&) {
    // An unbounded dual means the rounding problem is infeasible, which only
    // happens for degenerate data.
    throw Unbounded("lp_round: LP is unbounded (degenerate data)");
  }

  RoundingResult<Scalar> out;
  out.q_scaled = sol.duals;
  out.dual_value = -sol.value;
  out.objective = (y_hat.transpose() * out.q_scaled).cwiseAbs().sum();
  out.simplex_iterations = sol.iterations;

  const Scalar scale = std::max(Scalar(1), std::abs(out.dual_value));
  const Scalar gap = std::abs(out.objective - out.dual_value);
  const Scalar constraint = std::abs(r.dot(out.q_scaled) - Scalar(1));
  if (gap > Scalar(1e-7) * scale || constraint > Scalar(1e-9)) {
    throw NumericalFailure("lp_round: optimality certificate failed (gap " +
                           std::to_string(double(gap)) + ", constraint " +
                           std::to_string(double(constraint)) + ")");
  }
  out.q = out.q_scaled / out.q_scaled.norm();
  out.alignment = std::abs(r.dot(out.q)) / rnorm;
  out.below_threshold = out.alignment < Scalar(kRoundingConfidence);
  return out;
}

}  // namespace sdl
