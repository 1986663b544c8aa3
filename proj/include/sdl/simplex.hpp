#pragma once

// Dense two-phase primal simplex for
//
//   minimize c^T x   subject to  A x = b,  0 <= x <= u   (u may be +inf).
//
// Full-tableau implementation with the bounded-variable ratio test, Dantzig
// pricing, and Bland's rule after a run of degenerate pivots. The tableau is
// periodically rebuilt from the original data, and once more before
// optimality is declared, so the reported duals and reduced costs come from
// a fresh factorization of the final basis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "sdl/errors.hpp"
#include "sdl/types.hpp"

namespace sdl {

template <typename Scalar>
struct LpStandardForm {
  Vec<Scalar> cost;
  Mat<Scalar> a;
  Vec<Scalar> rhs;
  Vec<Scalar> upper;  // empty means all +inf

  Index rows() const { return a.rows(); }
  Index cols() const { return a.cols(); }
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;  // reduced-cost threshold for pricing
  double pivot_tol = 1e-9;
  long bland_after = 5000;        // consecutive degenerate pivots
  long max_iterations = -1;       // < 0: 50 (m + N) + 100000
  int refactor_every = 64;
};

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper };

template <typename Scalar>
struct LpSolution {
  Vec<Scalar> x;
  std::vector<Index> basis;    // structural indices; -1 marks a redundant row
  Scalar value = Scalar(0);
  Vec<Scalar> duals;           // y with A^T y + d = c
  Vec<Scalar> reduced_costs;   // d = c - A^T y
  std::vector<VarStatus> status;
  long iterations = 0;
  long degenerate_pivots = 0;
  bool used_bland = false;
};

namespace detail {

template <typename Scalar>
class BoundedSimplex {
 public:
  BoundedSimplex(const LpStandardForm<Scalar>& lp, const SimplexOptions& opts)
      : opts_(opts), m_(lp.rows()), n_(lp.cols()) {
    if (lp.cost.size() != n_ || lp.rhs.size() != m_) {
      throw InvalidInput("simplex_solve: inconsistent LP dimensions");
    }
    if (lp.upper.size() != 0 && lp.upper.size() != n_) {
      throw InvalidInput("simplex_solve: upper bounds have the wrong length");
    }
    if (!lp.a.allFinite() || !lp.rhs.allFinite() || !lp.cost.allFinite()) {
      throw InvalidInput("simplex_solve: non-finite LP data");
    }
    const Index total = n_ + m_;
    a_.resize(m_, total);
    a_.leftCols(n_) = lp.a;
    a_.rightCols(m_).setIdentity();
    b_ = lp.rhs;
    row_sign_ = Vec<Scalar>::Ones(m_);
    for (Index i = 0; i < m_; ++i) {
      if (b_(i) < Scalar(0)) {
        row_sign_(i) = Scalar(-1);
        a_.row(i).head(n_) *= Scalar(-1);
        b_(i) = -b_(i);
      }
    }
    upper_ = Vec<Scalar>::Constant(total, std::numeric_limits<Scalar>::infinity());
    if (lp.upper.size() == n_) {
      for (Index j = 0; j < n_; ++j) {
        if (lp.upper(j) < Scalar(0)) throw InvalidInput("simplex_solve: negative upper bound");
        upper_(j) = lp.upper(j);
      }
    }
    status_.assign(static_cast<std::size_t>(total), VarStatus::AtLower);
    basis_.resize(static_cast<std::size_t>(m_));
    for (Index i = 0; i < m_; ++i) {
      basis_[static_cast<std::size_t>(i)] = n_ + i;
      status_[static_cast<std::size_t>(n_ + i)] = VarStatus::Basic;
    }
    orig_cost_ = lp.cost;
    max_iter_ = opts_.max_iterations >= 0 ? opts_.max_iterations : 50 * (m_ + total) + 100000;
  }

  LpSolution<Scalar> solve() {
    // Phase 1: minimize the sum of artificials.
    cost_ = Vec<Scalar>::Zero(n_ + m_);
    cost_.tail(m_).setOnes();
    refactor();
    iterate();
    Scalar infeasibility(0);
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= n_) infeasibility += std::max(Scalar(0), xb_(i));
    }
    const Scalar bscale = std::max<Scalar>(Scalar(1), b_.size() ? b_.cwiseAbs().maxCoeff() : Scalar(0));
    if (infeasibility > Scalar(opts_.feasibility_tol) * bscale) {
      throw Infeasible("simplex_solve: no feasible point (phase-1 residual " +
                       std::to_string(double(infeasibility)) + ")");
    }
    drive_out_artificials();
    for (Index i = 0; i < m_; ++i) upper_(n_ + i) = Scalar(0);

    // Phase 2.
    cost_ = Vec<Scalar>::Zero(n_ + m_);
    cost_.head(n_) = orig_cost_;
    refactor();
    iterate();
    return extract();
  }

 private:
  void refactor() {
    Mat<Scalar> basis_cols(m_, m_);
    for (Index i = 0; i < m_; ++i) basis_cols.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Mat<Scalar>> lu(basis_cols);
    if (!lu.isInvertible()) throw NumericalFailure("simplex_solve: basis became singular");
    tableau_ = lu.solve(a_);
    Vec<Scalar> rhs = b_;
    for (Index j = 0; j < n_ + m_; ++j) {
      if (status_[static_cast<std::size_t>(j)] == VarStatus::AtUpper) rhs -= upper_(j) * a_.col(j);
    }
    xb_ = lu.solve(rhs);
    Vec<Scalar> cb(m_);
    for (Index i = 0; i < m_; ++i) cb(i) = cost_(basis_[static_cast<std::size_t>(i)]);
    reduced_ = cost_ - tableau_.transpose() * cb;
    since_refactor_ = 0;
  }

  bool eligible(Index j, Scalar& score) const {
    const auto st = status_[static_cast<std::size_t>(j)];
    if (st == VarStatus::Basic || upper_(j) == Scalar(0)) return false;
    const Scalar dj = reduced_(j);
    const Scalar tol = Scalar(opts_.optimality_tol);
    if (st == VarStatus::AtLower && dj < -tol) {
      score = -dj;
      return true;
    }
    if (st == VarStatus::AtUpper && dj > tol) {
      score = dj;
      return true;
    }
    return false;
  }

  Index price() const {
    Index best = -1;
    Scalar best_score(0);
    for (Index j = 0; j < n_ + m_; ++j) {
      Scalar score;
      if (!eligible(j, score)) continue;
      if (bland_) return j;
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void iterate() {
    while (true) {
      if (since_refactor_ >= opts_.refactor_every) refactor();
      Index enter = price();
      if (enter < 0) {
        refactor();
        enter = price();
        if (enter < 0) return;
      }
      if (++iterations_ > max_iter_) {
        throw NumericalFailure("simplex_solve: iteration limit exceeded (cycling guard)");
      }
      step(enter);
    }
  }

  void step(Index enter) {
    const auto col = tableau_.col(enter);
    const Scalar dir = status_[static_cast<std::size_t>(enter)] == VarStatus::AtLower ? Scalar(1)
                                                                                     : Scalar(-1);
    const Scalar ptol = Scalar(opts_.pivot_tol);
    Scalar tmax = upper_(enter);
    Index leave = -1;
    bool leave_upper = false;
    Scalar leave_pivot(0);
    for (Index i = 0; i < m_; ++i) {
      const Scalar a = dir * col(i);
      Scalar t;
      bool to_upper;
      if (a > ptol) {
        t = std::max(Scalar(0), xb_(i)) / a;
        to_upper = false;
      } else if (a < -ptol) {
        const Scalar ub = upper_(basis_[static_cast<std::size_t>(i)]);
        if (!std::isfinite(ub)) continue;
        t = std::max(Scalar(0), ub - xb_(i)) / (-a);
        to_upper = true;
      } else {
        continue;
      }
      const Scalar tie = Scalar(1e-12) * std::max(Scalar(1), t);
      bool take = false;
      if (!std::isfinite(tmax) || t < tmax - tie) {
        take = true;
      } else if (t <= tmax + tie && leave >= 0) {
        take = bland_ ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                      : std::abs(a) > leave_pivot;
      }
      if (take) {
        tmax = std::min(tmax, t);
        leave = i;
        leave_upper = to_upper;
        leave_pivot = std::abs(a);
      }
    }
    if (!std::isfinite(tmax)) throw Unbounded("simplex_solve: objective is unbounded below");
    const Scalar t = std::max(Scalar(0), tmax);

    if (t <= Scalar(1e-12)) {
      ++degenerate_;
      ++degenerate_total_;
      if (degenerate_ > opts_.bland_after) {
        bland_ = true;
        used_bland_ = true;
      }
    } else {
      degenerate_ = 0;
      bland_ = false;
    }

    xb_ -= (dir * t) * col;
    const bool from_lower = status_[static_cast<std::size_t>(enter)] == VarStatus::AtLower;
    if (leave < 0) {
      status_[static_cast<std::size_t>(enter)] = from_lower ? VarStatus::AtUpper : VarStatus::AtLower;
      return;
    }
    const Scalar entering_value = from_lower ? t : upper_(enter) - t;
    const Index out = basis_[static_cast<std::size_t>(leave)];
    status_[static_cast<std::size_t>(out)] = leave_upper ? VarStatus::AtUpper : VarStatus::AtLower;
    pivot(leave, enter);
    basis_[static_cast<std::size_t>(leave)] = enter;
    status_[static_cast<std::size_t>(enter)] = VarStatus::Basic;
    xb_(leave) = entering_value;
  }

  void pivot(Index r, Index j) {
    const Scalar piv = tableau_(r, j);
    tableau_.row(r) /= piv;
    for (Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      const Scalar f = tableau_(i, j);
      if (f != Scalar(0)) tableau_.row(i) -= f * tableau_.row(r);
    }
    const Scalar dj = reduced_(j);
    if (dj != Scalar(0)) reduced_ -= dj * tableau_.row(r).transpose();
    ++since_refactor_;
  }

  void drive_out_artificials() {
    for (Index r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < n_) continue;
      Index best = -1;
      Scalar best_abs = Scalar(opts_.pivot_tol);
      for (Index j = 0; j < n_; ++j) {
        if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) continue;
        const Scalar v = std::abs(tableau_(r, j));
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; the artificial stays basic at zero
      const Index out = basis_[static_cast<std::size_t>(r)];
      const Scalar value =
          status_[static_cast<std::size_t>(best)] == VarStatus::AtUpper ? upper_(best) : Scalar(0);
      status_[static_cast<std::size_t>(out)] = VarStatus::AtLower;
      pivot(r, best);
      basis_[static_cast<std::size_t>(r)] = best;
      status_[static_cast<std::size_t>(best)] = VarStatus::Basic;
      xb_(r) = value;
    }
  }

  LpSolution<Scalar> extract() {
    LpSolution<Scalar> sol;
    sol.x = Vec<Scalar>::Zero(n_);
    for (Index j = 0; j < n_; ++j) {
      if (status_[static_cast<std::size_t>(j)] == VarStatus::AtUpper) sol.x(j) = upper_(j);
    }
    Mat<Scalar> basis_cols(m_, m_);
    Vec<Scalar> cb(m_);
    for (Index i = 0; i < m_; ++i) {
      const Index j = basis_[static_cast<std::size_t>(i)];
      basis_cols.col(i) = a_.col(j);
      cb(i) = cost_(j);
      if (j < n_) {
        sol.x(j) = std::clamp(xb_(i), Scalar(0), upper_(j));
        sol.basis.push_back(j);
      } else {
        sol.basis.push_back(-1);
      }
    }
    const Vec<Scalar> y = basis_cols.transpose().fullPivLu().solve(cb);
    sol.duals = row_sign_.cwiseProduct(y);
    sol.reduced_costs = orig_cost_ - a_.leftCols(n_).transpose() * y;
    sol.value = orig_cost_.dot(sol.x);
    sol.status.assign(status_.begin(), status_.begin() + n_);
    sol.iterations = iterations_;
    sol.degenerate_pivots = degenerate_total_;
    sol.used_bland = used_bland_;
    return sol;
  }

  SimplexOptions opts_;
  Index m_;
  Index n_;
  Mat<Scalar> a_;
  Vec<Scalar> b_;
  Vec<Scalar> row_sign_;
  Vec<Scalar> upper_;
  Vec<Scalar> orig_cost_;
  Vec<Scalar> cost_;
  std::vector<Index> basis_;
  std::vector<VarStatus> status_;
  Mat<Scalar> tableau_;
  Vec<Scalar> xb_;
  Vec<Scalar> reduced_;
  long iterations_ = 0;
  long max_iter_ = 0;
  long degenerate_ = 0;
  long degenerate_total_ = 0;
  int since_refactor_ = 0;
  bool bland_ = false;
  bool used_bland_ = false;
};

}  // namespace detail

template <typename Scalar>
LpSolution<Scalar> simplex_solve(const LpStandardForm<Scalar>& lp, const SimplexOptions& opts = {}) {
  return detail::BoundedSimplex<Scalar>(lp, opts).solve();
}

}  // namespace sdl
