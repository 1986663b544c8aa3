#pragma once

// Trust-region subproblem solvers for
//
//   minimize  b^T xi + 1/2 xi^T H xi   subject to  |xi| <= radius.
//
// solve_trs_exact: More-Sorensen on the eigendecomposition of H, including
// the hard case. solve_trs_tcg: Steihaug-Toint truncated CG on a
// Hessian-vector operator, with a cheap smallest-eigenvalue probe so that a
// negative-curvature direction is used as the first search direction when
// the gradient is small.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sdl/errors.hpp"
#include "sdl/geometry.hpp"
#include "sdl/linalg.hpp"
#include "sdl/random.hpp"
#include "sdl/types.hpp"

namespace sdl {

enum class TrsStatus { Interior, Boundary, HardCase, TcgTruncated, TcgNegCurv };

inline const char* trs_status_name(TrsStatus s) {
  switch (s) {
    case TrsStatus::Interior: return "interior";
    case TrsStatus::Boundary: return "boundary";
    case TrsStatus::HardCase: return "hard_case";
    case TrsStatus::TcgTruncated: return "tcg_truncated";
    case TrsStatus::TcgNegCurv: return "tcg_neg_curv";
  }
  return "?";
}

template <typename Scalar>
struct TrsSolution {
  Vec<Scalar> xi;
  Scalar lambda = Scalar(0);
  bool on_boundary = false;
  Scalar model_value = Scalar(0);     // b^T xi + 1/2 xi^T H xi (<= 0)
  Scalar model_decrease = Scalar(0);  // -model_value
  TrsStatus status = TrsStatus::Interior;
  int iterations = 0;
  // Smallest eigenvalue of H; exact solver only (NaN for tCG unless probed).
  Scalar min_eigenvalue = std::numeric_limits<Scalar>::quiet_NaN();
};

struct TrsExactOptions {
  double hard_case_tol = 1e-10;  // |b^T v1| <= tol * |b| with lambda_1 < 0
  int max_newton = 200;
  double boundary_tol = 1e-13;   // relative | |xi| - radius |
  LinalgTolerances linalg{};
};

template <typename Scalar>
TrsSolution<Scalar> solve_trs_exact(const TrsModel<Scalar>& model,
                                    const TrsExactOptions& opts = {}) {
  using std::abs, std::sqrt;
  const Index m = model.b.size();
  if (model.h.rows() != m || model.h.cols() != m) {
    throw InvalidInput("solve_trs_exact: Hessian shape does not match gradient");
  }
  if (!(model.radius > Scalar(0))) throw InvalidInput("solve_trs_exact: radius must be positive");
  if (!is_symmetric(model.h, opts.linalg.symmetry)) {
    throw InvalidInput("solve_trs_exact: Hessian is not symmetric");
  }

  TrsSolution<Scalar> sol;
  sol.xi = Vec<Scalar>::Zero(m);
  if (m == 0) return sol;

  const auto eig = sym_eig(model.h, opts.linalg);
  const Vec<Scalar>& lam = eig.eigenvalues;
  const Mat<Scalar>& v = eig.eigenvectors;
  const Vec<Scalar> beta = v.transpose() * model.b;
  const Scalar bnorm = model.b.norm();
  const Scalar radius = model.radius;
  const Scalar lam1 = lam(0);
  sol.min_eigenvalue = lam1;

  auto step_for = [&](Scalar shift) -> Vec<Scalar> {
    Vec<Scalar> coeff(m);
    for (Index i = 0; i < m; ++i) coeff(i) = -beta(i) / (lam(i) + shift);
    return v * coeff;
  };
  auto norm_for = [&](Scalar shift) -> Scalar {
    Scalar s(0);
    for (Index i = 0; i < m; ++i) {
      const Scalar t = beta(i) / (lam(i) + shift);
      s += t * t;
    }
    return sqrt(s);
  };
  auto finish = [&](TrsSolution<Scalar>& s) {
    s.model_value = model.value(s.xi);
    s.model_decrease = std::max(Scalar(0), -s.model_value);
    return s;
  };

  // Interior Newton step.
  if (lam1 > Scalar(0)) {
    if (norm_for(Scalar(0)) <= radius) {
      sol.xi = step_for(Scalar(0));
      sol.status = TrsStatus::Interior;
      return finish(sol);
    }
  }

  // Hard case: b has (numerically) no component in the lambda_1 eigenspace.
  const Scalar spread = std::max<Scalar>(Scalar(1), lam.cwiseAbs().maxCoeff());
  const Scalar cluster_tol = Scalar(1e-12) * spread;
  Index cluster = 0;
  Scalar beta_cluster(0);
  while (cluster < m && lam(cluster) - lam1 <= cluster_tol) {
    beta_cluster += beta(cluster) * beta(cluster);
    ++cluster;
  }
  beta_cluster = sqrt(beta_cluster);
  if (lam1 <= Scalar(0) && beta_cluster <= Scalar(opts.hard_case_tol) * bnorm) {
    Vec<Scalar> coeff = Vec<Scalar>::Zero(m);
    for (Index i = cluster; i < m; ++i) coeff(i) = -beta(i) / (lam(i) - lam1);
    const Scalar pnorm = coeff.norm();
    if (pnorm <= radius) {
      coeff(0) = sqrt(std::max(Scalar(0), radius * radius - pnorm * pnorm));
      sol.xi = v * coeff;
      sol.lambda = -lam1;
      sol.on_boundary = true;
      sol.status = TrsStatus::HardCase;
      return finish(sol);
    }
  }

  // Secular equation |xi(lambda)| = radius on (lo, hi].
  Scalar lo = std::max(Scalar(0), -lam1);
  Scalar hi = lo + bnorm / radius;
  Scalar shift = hi;
  int iter = 0;
  for (; iter < opts.max_newton; ++iter) {
    const Scalar nrm = norm_for(shift);
    if (abs(nrm - radius) <= Scalar(opts.boundary_tol) * radius) break;
    if (nrm > radius) {
      lo = shift;
    } else {
      hi = shift;
    }
    // Newton on phi(lambda) = 1/radius - 1/|xi(lambda)|.
    Scalar cube(0);
    for (Index i = 0; i < m; ++i) {
      const Scalar d = lam(i) + shift;
      cube += beta(i) * beta(i) / (d * d * d);
    }
    const Scalar phi = Scalar(1) / radius - Scalar(1) / nrm;
    const Scalar dphi = -cube / (nrm * nrm * nrm);
    Scalar next = shift - phi / dphi;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = Scalar(0.5) * (lo + hi);
    if (next == shift || hi - lo <= std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), hi)) {
      break;
    }
    shift = next;
  }
  sol.iterations = iter;
  sol.lambda = shift;
  sol.xi = step_for(shift);
  sol.on_boundary = true;
  sol.status = TrsStatus::Boundary;
  return finish(sol);
}

template <typename Scalar>
struct KktResiduals {
  Scalar stationarity;     // |(H + lambda I) xi + b| / max(1, |b|)
  Scalar min_eigenvalue;   // lambda_min(H + lambda I)
  Scalar complementarity;  // lambda * |radius - |xi|| / radius
  Scalar feasibility;      // max(0, |xi| - radius) / radius
};

template <typename Scalar>
KktResiduals<Scalar> kkt_residuals(const TrsModel<Scalar>& model, const TrsSolution<Scalar>& sol) {
  const Index m = model.b.size();
  Mat<Scalar> shifted = model.h;
  shifted.diagonal().array() += sol.lambda;
  KktResiduals<Scalar> r{};
  r.stationarity = (shifted * sol.xi + model.b).norm() / std::max(Scalar(1), model.b.norm());
  r.min_eigenvalue = m > 0 ? sym_eig(shifted).eigenvalues(0) : Scalar(0);
  const Scalar nrm = sol.xi.norm();
  r.complementarity = sol.lambda * std::abs(model.radius - nrm) / model.radius;
  r.feasibility = std::max(Scalar(0), nrm - model.radius) / model.radius;
  return r;
}

template <typename Scalar>
struct TcgOptions {
  int max_iter = -1;           // < 0: 3 * (dim - 1), at least 1
  Scalar kappa = Scalar(0.1);  // linear residual target
  Scalar theta = Scalar(1);    // superlinear exponent
  Scalar eps_curv = Scalar(1e-8);
  Scalar probe_threshold = Scalar(1e-3);  // run the curvature probe when |b| is below
  int probe_iters = 25;
  int scale_iters = 5;
  std::optional<Vec<Scalar>> probe_start;  // otherwise a seeded Gaussian vector
  std::uint64_t probe_seed = 0x7c3a1f55e2d9b801ULL;
};

template <typename Scalar>
struct TcgTrace {
  std::vector<Scalar> iterate_norms;
  bool probe_ran = false;
  bool used_negative_curvature = false;
  Scalar probe_rayleigh = std::numeric_limits<Scalar>::quiet_NaN();
  int hess_vec_calls = 0;
};

namespace detail {

template <typename Scalar>
Scalar step_to_boundary(const Vec<Scalar>& xi, const Vec<Scalar>& d, Scalar radius) {
  const Scalar dd = d.squaredNorm();
  const Scalar xd = xi.dot(d);
  const Scalar rest = std::max(Scalar(0), radius * radius - xi.squaredNorm());
  return (-xd + std::sqrt(xd * xd + dd * rest)) / dd;
}

}  // namespace detail

/// Truncated CG with negative-curvature escape. `hess_vec(v)` returns H v.
/// `project` maps residuals, search directions and probe vectors back onto
/// the subspace the model lives in (the identity for plain R^m models).
template <typename Scalar, typename HessVec, typename Project>
TrsSolution<Scalar> solve_trs_tcg(HessVec&& hess_vec, Project&& project, const Vec<Scalar>& b,
                                  Scalar radius, const TcgOptions<Scalar>& opts = {},
                                  TcgTrace<Scalar>* trace = nullptr) {
  using std::sqrt;
  if (!(radius > Scalar(0))) throw InvalidInput("solve_trs_tcg: radius must be positive");
  const Index m = b.size();
  TcgTrace<Scalar> local;
  TcgTrace<Scalar>& tr = trace ? *trace : local;
  auto apply = [&](const Vec<Scalar>& x) -> Vec<Scalar> {
    ++tr.hess_vec_calls;
    return hess_vec(x);
  };
  const int max_iter = opts.max_iter >= 0 ? opts.max_iter
                                          : std::max<int>(1, 3 * static_cast<int>(m - 1));

  auto finish = [&](Vec<Scalar> xi, const Vec<Scalar>& hxi, TrsStatus status, bool boundary,
                    int iters) {
    TrsSolution<Scalar> s;
    s.model_value = b.dot(xi) + Scalar(0.5) * xi.dot(hxi);
    s.model_decrease = std::max(Scalar(0), -s.model_value);
    s.xi = std::move(xi);
    s.status = status;
    s.on_boundary = boundary;
    s.iterations = iters;
    return s;
  };

  // Steihaug-Toint.
  auto steihaug = [&]() -> TrsSolution<Scalar> {
    Vec<Scalar> xi = Vec<Scalar>::Zero(m);
    Vec<Scalar> hxi = Vec<Scalar>::Zero(m);
    const Scalar r0 = b.norm();
    tr.iterate_norms.assign(1, Scalar(0));
    if (r0 == Scalar(0) || m == 0) return finish(xi, hxi, TrsStatus::Interior, false, 0);
    // The superlinear target r0^(1+theta) is floored at what CG can resolve.
    const Scalar floor = Scalar(1e3) * std::numeric_limits<Scalar>::epsilon();
    const Scalar target = r0 * std::max(std::min(opts.kappa, std::pow(r0, opts.theta)), floor);
    Vec<Scalar> r = project(b);
    Vec<Scalar> d = -r;
    Scalar rr = r.squaredNorm();
    for (int j = 0; j < max_iter; ++j) {
      const Vec<Scalar> hd = apply(d);
      const Scalar dhd = d.dot(hd);
      if (dhd <= Scalar(0)) {
        const Scalar tau = detail::step_to_boundary(xi, d, radius);
        xi += tau * d;
        hxi += tau * hd;
        tr.iterate_norms.push_back(xi.norm());
        return finish(xi, hxi, TrsStatus::TcgNegCurv, true, j + 1);
      }
      const Scalar alpha = rr / dhd;
      const Vec<Scalar> next = xi + alpha * d;
      if (next.norm() >= radius) {
        const Scalar tau = detail::step_to_boundary(xi, d, radius);
        xi += tau * d;
        hxi += tau * hd;
        tr.iterate_norms.push_back(xi.norm());
        return finish(xi, hxi, TrsStatus::Boundary, true, j + 1);
      }
      xi = next;
      hxi += alpha * hd;
      r = project(Vec<Scalar>(r + alpha * hd));
      tr.iterate_norms.push_back(xi.norm());
      const Scalar rr_next = r.squaredNorm();
      if (sqrt(rr_next) <= target || rr_next == Scalar(0)) {
        return finish(xi, hxi, TrsStatus::Interior, false, j + 1);
      }
      d = project(Vec<Scalar>(-r + (rr_next / rr) * d));
      rr = rr_next;
    }
    return finish(xi, hxi, TrsStatus::TcgTruncated, false, max_iter);
  };

  TrsSolution<Scalar> best = steihaug();
  if (m == 0 || !(b.norm() < opts.probe_threshold)) return best;

  // Smallest-eigenvalue probe: power iteration on sigma I - H.
  tr.probe_ran = true;
  Vec<Scalar> x;
  if (opts.probe_start && opts.probe_start->size() == m && opts.probe_start->norm() > Scalar(0)) {
    x = *opts.probe_start;
  } else {
    Rng rng(opts.probe_seed);
    x.resize(m);
    for (Index i = 0; i < m; ++i) x(i) = Scalar(rng.normal());
  }
  x = project(x);
  if (!(x.norm() > Scalar(0))) return best;
  x.normalize();
  const Vec<Scalar> start = x;
  Scalar scale(0);
  for (int i = 0; i < opts.scale_iters; ++i) {
    const Vec<Scalar> y = apply(x);
    scale = y.norm();
    if (scale == Scalar(0)) break;
    x = y / scale;
  }
  if (!(scale > Scalar(0))) return best;
  const Scalar sigma = Scalar(1.1) * scale;
  x = start;
  for (int i = 0; i < opts.probe_iters; ++i) {
    Vec<Scalar> y = project(Vec<Scalar>(sigma * x - apply(x)));
    const Scalar ny = y.norm();
    if (ny == Scalar(0)) break;
    x = y / ny;
  }
  const Vec<Scalar> hx = apply(x);
  const Scalar rayleigh = x.dot(hx);
  tr.probe_rayleigh = rayleigh;
  if (!(rayleigh < -opts.eps_curv)) return best;

  // Eigenstep: the negative-curvature direction as first CG direction leaves
  // through the boundary immediately.
  Vec<Scalar> d = x;
  Vec<Scalar> hd = hx;
  if (d.dot(b) > Scalar(0)) {
    d = -d;
    hd = -hd;
  }
  TrsSolution<Scalar> eig = finish(radius * d, radius * hd, TrsStatus::TcgNegCurv, true, 1);
  eig.min_eigenvalue = rayleigh;
  if (eig.model_value < best.model_value) {
    tr.used_negative_curvature = true;
    tr.iterate_norms = {Scalar(0), radius};
    return eig;
  }
  return best;
}

template <typename Scalar, typename HessVec>
TrsSolution<Scalar> solve_trs_tcg(HessVec&& hess_vec, const Vec<Scalar>& b, Scalar radius,
                                  const TcgOptions<Scalar>& opts = {},
                                  TcgTrace<Scalar>* trace = nullptr) {
  return solve_trs_tcg<Scalar>(std::forward<HessVec>(hess_vec),
                               [](const Vec<Scalar>& v) { return v; }, b, radius, opts, trace);
}

}  // namespace sdl
