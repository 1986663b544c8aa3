#pragma once

// Small dense linear-algebra primitives: symmetric eigendecomposition by
// cyclic Jacobi rotations, inverse square roots of SPD matrices and
// orthonormal complement bases.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Jacobi>

#include "sdl/errors.hpp"
#include "sdl/random.hpp"
#include "sdl/types.hpp"

namespace sdl {

struct LinalgTolerances {
  double symmetry = 1e-10;          // max |m_ij - m_ji| relative to max(1, max|m|)
  double jacobi_off_diagonal = 1e-14;  // stop when off(M) <= this * ||M||_F
  int jacobi_max_sweeps = 100;
  double singular_ratio = 1e-12;    // lambda_min must exceed this * lambda_max
  double orthonormality = 1e-10;
};

inline constexpr std::uint64_t kComplementSeed = 0x5d1c0a3b9e2f4471ULL;

template <typename Scalar>
struct SymEig {
  Vec<Scalar> eigenvalues;   // ascending
  Mat<Scalar> eigenvectors;  // orthonormal columns, matching eigenvalues
};

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, double tol) {
  if (m.rows() != m.cols()) return false;
  using Scalar = typename Derived::Scalar;
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= Scalar(tol) * scale;
}

template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& m,
                                         const LinalgTolerances& tol = {}) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) {
    throw InvalidInput("sym_eig: matrix is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected square");
  }
  if (!m.allFinite()) throw InvalidInput("sym_eig: non-finite entries");
  if (!is_symmetric(m, tol.symmetry)) throw InvalidInput("sym_eig: matrix is not symmetric");

  const Index n = m.rows();
  Mat<Scalar> a = (m + m.transpose()) / Scalar(2);
  Mat<Scalar> v = Mat<Scalar>::Identity(n, n);
  const Scalar frob = a.norm();
  const Scalar target = Scalar(tol.jacobi_off_diagonal) * frob;

  auto off_diagonal = [&a, n]() {
    Scalar sum(0);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
  };

  for (int sweep = 0; sweep < tol.jacobi_max_sweeps; ++sweep) {
    if (off_diagonal() <= target) break;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](Index i, Index j) { return a(i, i) < a(j, j); });

  SymEig<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
  }
  return out;
}

// (M)^{-1/2} for symmetric positive definite M.
template <typename Derived>
Mat<typename Derived::Scalar> inv_sqrt_psd(const Eigen::MatrixBase<Derived>& m,
                                           const LinalgTolerances& tol = {}) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(m, tol);
  const Index n = eig.eigenvalues.size();
  if (n == 0) return Mat<Scalar>(0, 0);
  const Scalar lo = eig.eigenvalues(0);
  const Scalar hi = eig.eigenvalues(n - 1);
  if (!(hi > Scalar(0)) || !(lo > Scalar(tol.singular_ratio) * hi)) {
    throw SingularMatrix("inv_sqrt_psd: smallest eigenvalue " + std::to_string(double(lo)) +
                             " vs largest " + std::to_string(double(hi)),
                         double(lo));
  }
  const Vec<Scalar> scale = eig.eigenvalues.cwiseSqrt().cwiseInverse();
  return eig.eigenvectors * scale.asDiagonal() * eig.eigenvectors.transpose();
}

/// Orthonormal basis of the orthogonal complement of span(V).
///
/// V must have orthonormal columns (n x l, l < n). The basis is built by
/// Gram-Schmidt with a second re-orthogonalization pass on Gaussian columns
/// drawn from an Rng seeded with `seed`, so the result is deterministic.
template <typename Derived>
Mat<typename Derived::Scalar> orthonormal_complement_basis(const Eigen::MatrixBase<Derived>& v,
                                                           std::uint64_t seed = kComplementSeed,
                                                           const LinalgTolerances& tol = {}) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.rows();
  const Index l = v.cols();
  if (l >= n) {
    throw InvalidInput("orthonormal_complement_basis: need fewer columns than rows, got " +
                       std::to_string(l) + " >= " + std::to_string(n));
  }
  if (l > 0) {
    const Mat<Scalar> gram = v.transpose() * v;
    const Scalar err = (gram - Mat<Scalar>::Identity(l, l)).cwiseAbs().maxCoeff();
    if (!(err <= Scalar(tol.orthonormality))) {
      throw InvalidInput("orthonormal_complement_basis: columns are not orthonormal (error " +
                         std::to_string(double(err)) + ")");
    }
  }

  Mat<Scalar> basis(n, n);
  basis.leftCols(l) = v;
  Rng rng(seed);
  Index filled = l;
  int attempts = 0;
  while (filled < n) {
    if (++attempts > 100 * static_cast<int>(n)) {
      throw NumericalFailure("orthonormal_complement_basis: failed to extend basis");
    }
    Vec<Scalar> g(n);
    for (Index i = 0; i < n; ++i) g(i) = Scalar(rng.normal());
    const Scalar initial = g.norm();
    for (int pass = 0; pass < 2; ++pass) {
      const auto current = basis.leftCols(filled);
      g -= current * (current.transpose() * g);
    }
    const Scalar remaining = g.norm();
    if (remaining <= Scalar(1e-6) * initial) continue;
    basis.col(filled++) = g / remaining;
  }
  return basis.rightCols(n - l);
}

}  // namespace sdl
