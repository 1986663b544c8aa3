#pragma once

// Independent reference computations used by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/LU>

#include "sdl/random.hpp"
#include "sdl/types.hpp"

namespace sdl::testing {

inline Vector gaussian_vector(Index n, Rng& rng) {
  Vector g(n);
  for (Index i = 0; i < n; ++i) g(i) = rng.normal();
  return g;
}

inline DenseMatrix gaussian_matrix(Index r, Index c, Rng& rng) {
  DenseMatrix g(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) g(i, j) = rng.normal();
  return g;
}

inline Vector unit_tangent(const Vector& q, Rng& rng) {
  Vector g = gaussian_vector(q.size(), rng);
  g -= q * q.dot(g);
  return g / g.norm();
}

// Central differences of a scalar function at 0 with two levels of
// Richardson extrapolation (steps h, h/2, h/4).
struct Derivatives {
  double first;
  double second;
};

inline Derivatives finite_differences(const std::function<double(double)>& phi, double h) {
  const double f0 = phi(0.0);
  double d1[3], d2[3];
  for (int i = 0; i < 3; ++i) {
    const double s = h / double(1 << i);
    const double fp = phi(s), fm = phi(-s);
    d1[i] = (fp - fm) / (2.0 * s);
    d2[i] = (fp - 2.0 * f0 + fm) / (s * s);
  }
  auto extrapolate = [](const double* d) {
    const double a = (4.0 * d[1] - d[0]) / 3.0;
    const double b = (4.0 * d[2] - d[1]) / 3.0;
    return (16.0 * b - a) / 15.0;
  };
  return {extrapolate(d1), extrapolate(d2)};
}

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

// Minimum of c^T x over {A x = b, 0 <= x <= u} by enumerating every basis of
// the equality rows together with bound choices for the nonbasic variables.
// Meant for a handful of variables. Returns nullopt when infeasible.
inline std::optional<double> lp_vertex_enumeration(const Vector& c, const DenseMatrix& a,
                                                   const Vector& b, const Vector& u) {
  const Index m = a.rows();
  const Index n = a.cols();
  std::optional<double> best;
  const double tol = 1e-9;
  // Each variable is basic (0), at lower (1) or at upper (2).
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  long combos = 1;
  for (Index j = 0; j < n; ++j) combos *= 3;
  for (long code = 0; code < combos; ++code) {
    long rest = code;
    Index basic = 0;
    bool ok = true;
    for (Index j = 0; j < n; ++j) {
      state[static_cast<std::size_t>(j)] = static_cast<int>(rest % 3);
      rest /= 3;
      if (state[static_cast<std::size_t>(j)] == 0) ++basic;
      if (state[static_cast<std::size_t>(j)] == 2 && !std::isfinite(u(j))) ok = false;
    }
    if (!ok || basic > m) continue;
    Vector x = Vector::Zero(n);
    DenseMatrix ab(m, basic);
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j) {
      if (state[static_cast<std::size_t>(j)] == 2) x(j) = u(j);
      if (state[static_cast<std::size_t>(j)] == 0) {
        ab.col(static_cast<Index>(idx.size())) = a.col(j);
        idx.push_back(j);
      }
    }
    const Vector rhs = b - a * x;
    if (basic > 0) {
      Eigen::FullPivLU<DenseMatrix> lu(ab);
      if (lu.rank() < basic) continue;
      const Vector xb = lu.solve(rhs);
      for (Index i = 0; i < basic; ++i) x(idx[static_cast<std::size_t>(i)]) = xb(i);
    }
    if ((a * x - b).norm() > tol * std::max(1.0, b.norm())) continue;
    bool feasible = true;
    for (Index j = 0; j < n; ++j) {
      if (x(j) < -tol || x(j) > u(j) + tol) feasible = false;
    }
    if (!feasible) continue;
    const double v = c.dot(x);
    if (!best || v < *best) best = v;
  }
  return best;
}

// Minimum of ||Y^T q||_1 over <r, q> = 1 by enumerating the candidate
// vertices: n - 1 columns of Y orthogonal to q together with the constraint.
inline std::optional<double> l1_rounding_enumeration(const DenseMatrix& y, const Vector& r) {
  const Index n = y.rows();
  const Index p = y.cols();
  std::optional<double> best;
  std::vector<Index> pick(static_cast<std::size_t>(std::max<Index>(n - 1, 0)));
  std::function<void(Index, Index)> recurse = [&](Index start, Index depth) {
    if (depth == n - 1) {
      DenseMatrix m(n, n);
      Vector rhs = Vector::Zero(n);
      for (Index i = 0; i < n - 1; ++i) m.row(i) = y.col(pick[static_cast<std::size_t>(i)]).transpose();
      m.row(n - 1) = r.transpose();
      rhs(n - 1) = 1.0;
      Eigen::FullPivLU<DenseMatrix> lu(m);
      if (lu.rank() < n) return;
      const Vector q = lu.solve(rhs);
      const double v = (y.transpose() * q).cwiseAbs().sum();
      if (!best || v < *best) best = v;
      return;
    }
    for (Index k = start; k < p; ++k) {
      pick[static_cast<std::size_t>(depth)] = k;
      recurse(k + 1, depth + 1);
    }
  };
  recurse(0, 0);
  return best;
}

}  // namespace sdl::testing
