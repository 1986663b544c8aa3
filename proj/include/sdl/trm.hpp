#pragma once

// Riemannian trust-region method on S^{n-1} for the smoothed sparsity
// objective. Steps are computed in the tangent space (exactly, or by
// truncated CG) and pulled back with the exponential map.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <type_traits>
#include <vector>

#include "sdl/errors.hpp"
#include "sdl/geometry.hpp"
#include "sdl/random.hpp"
#include "sdl/trs.hpp"
#include "sdl/types.hpp"

namespace sdl {

enum class TrmMode { FixedStep, Adaptive };
enum class Subproblem { Exact, Tcg };
enum class SolveStatus { GradToleranceMet, MaxIters, NoProgress };

inline const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::GradToleranceMet: return "grad_tolerance_met";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::NoProgress: return "no_progress";
  }
  return "?";
}

inline constexpr Index kMaxExactDimension = 512;

template <typename Scalar>
struct TrmOptions {
  TrmMode mode = TrmMode::Adaptive;
  Subproblem subproblem = Subproblem::Tcg;
  Scalar delta0 = Scalar(0.1);
  Scalar delta_max = std::numbers::pi_v<Scalar> / Scalar(4);
  Scalar accept_threshold = Scalar(0.1);
  Scalar expand = Scalar(2);
  Scalar shrink = Scalar(0.25);
  Scalar grad_tol = Scalar(1e-10);
  int max_iters = 500;
  std::uint64_t seed = 0;
  // Convergence also requires no direction of curvature below -curvature_tol.
  Scalar curvature_tol = Scalar(1e-8);
  Scalar min_radius = Scalar(1e-15);
  TcgOptions<Scalar> tcg{};
  TrsExactOptions exact{};

  void validate() const {
    if (!(accept_threshold > Scalar(0) && accept_threshold < Scalar(0.25))) {
      throw InvalidInput("TrmOptions: accept threshold must lie in (0, 0.25)");
    }
    if (!(delta0 > Scalar(0)) || !(delta0 <= delta_max)) {
      throw InvalidInput("TrmOptions: need 0 < delta0 <= delta_max");
    }
    if (!(expand > Scalar(1)) || !(shrink > Scalar(0) && shrink < Scalar(1))) {
      throw InvalidInput("TrmOptions: need expand > 1 and 0 < shrink < 1");
    }
    if (max_iters < 0) throw InvalidInput("TrmOptions: max_iters must be nonnegative");
  }
};

template <typename Scalar>
struct IterateRecord {
  Vec<Scalar> q;
  Scalar f;
  Scalar grad_norm;
  Region region;
  // Step attempted from q (absent on the terminal record).
  bool has_step = false;
  Scalar step_norm = Scalar(0);
  Scalar radius = Scalar(0);
  bool boundary = false;
  Scalar rho = std::numeric_limits<Scalar>::quiet_NaN();
  bool accepted = false;
  TrsStatus trs_status = TrsStatus::Interior;
  Scalar model_decrease = Scalar(0);
};

template <typename Scalar>
struct SolveReport {
  SpherePoint<Scalar> q_final;
  Scalar f_final = Scalar(0);
  Scalar grad_norm_final = Scalar(0);
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<IterateRecord<Scalar>> iterates;

  int steps() const { return static_cast<int>(iterates.size()) - 1; }
  int accepted_steps() const {
    int c = 0;
    for (const auto& r : iterates) c += r.accepted ? 1 : 0;
    return c;
  }
};

template <typename Scalar>
SpherePoint<Scalar> random_sphere_point(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vec<Scalar> g(n);
  for (Index i = 0; i < n; ++i) g(i) = Scalar(rng.normal());
  return SpherePoint<Scalar>(g);
}

template <typename Scalar>
SolveReport<Scalar> trm_solve(const Objective<Scalar>& obj, const TrmOptions<Scalar>& opts,
                              std::optional<SpherePoint<std::type_identity_t<Scalar>>> q0 = std::nullopt) {
  opts.validate();
  const Index n = obj.dim();
  if (opts.subproblem == Subproblem::Exact && n > kMaxExactDimension) {
    throw InvalidInput("trm_solve: exact subproblem limited to n <= 512");
  }
  SpherePoint<Scalar> q = q0 ? *q0 : random_sphere_point<Scalar>(n, opts.seed);
  if (q.dim() != n) throw InvalidInput("trm_solve: initial point has the wrong dimension");

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar radius = opts.delta0;
  SolveReport<Scalar> report;
  auto ev = evaluate(obj, q.vector());

  for (int iter = 0;; ++iter) {
    // Two projection passes: near a critical point the tangent part is tiny
    // next to the radial part of the Euclidean gradient.
    const Vec<Scalar> grad = project_tangent(ev.q, project_tangent(ev.q, ev.egrad));
    const Scalar gnorm = grad.norm();
    IterateRecord<Scalar> rec;
    rec.q = q.vector();
    rec.f = ev.value;
    rec.grad_norm = gnorm;
    rec.region = classify_region(q.vector(), obj.mu()).region;

    if (iter >= opts.max_iters) {
      report.status = SolveStatus::MaxIters;
      report.iterates.push_back(std::move(rec));
      break;
    }

    // Subproblem.
    Vec<Scalar> delta;
    TrsSolution<Scalar> sol;
    if (opts.subproblem == Subproblem::Exact) {
      const auto model = build_trs_model(obj, ev, radius);
      sol = solve_trs_exact(model, opts.exact);
      delta = model.basis * sol.xi;
    } else {
      TcgOptions<Scalar> tcg = opts.tcg;
      if (tcg.max_iter < 0) tcg.max_iter = std::max<int>(1, 3 * static_cast<int>(n - 1));
      if (gnorm < tcg.probe_threshold && !tcg.probe_start) {
        // Random combination of data columns: rotates with the data, so the
        // whole iteration commutes with orthogonal changes of basis.
        Rng rng(derive_seed(opts.seed, 0x9b0e, iter));
        Vec<Scalar> s(obj.samples());
        for (Index k = 0; k < s.size(); ++k) s(k) = Scalar(rng.normal());
        tcg.probe_start = project_tangent(ev.q, Vec<Scalar>(obj.data() * s));
      }
      // Project the input too: roundoff along q would otherwise look like a
      // zero-curvature direction once CG has exhausted the tangent space.
      auto hv = [&](const Vec<Scalar>& v) {
        return riem_hess_vec(obj, ev, project_tangent(ev.q, v));
      };
      auto proj = [&](const Vec<Scalar>& v) { return project_tangent(ev.q, v); };
      sol = solve_trs_tcg<Scalar>(hv, proj, grad, radius, tcg);
      delta = project_tangent(ev.q, sol.xi);
    }

    const bool negative_curvature =
        std::isfinite(sol.min_eigenvalue) && sol.min_eigenvalue < -opts.curvature_tol;
    if (gnorm <= opts.grad_tol && !negative_curvature) {
      report.status = SolveStatus::GradToleranceMet;
      report.iterates.push_back(std::move(rec));
      break;
    }

    const SpherePoint<Scalar> candidate = exp_map(ev.q, delta);
    auto ev_new = evaluate(obj, candidate.vector());
    const Scalar actual = ev.value - ev_new.value;
    const Scalar predicted = sol.model_decrease;
    const Scalar reg = Scalar(1e3) * eps * std::max(Scalar(1), std::abs(ev.value));
    const Scalar rho = (actual + reg) / (predicted + reg);

    rec.has_step = true;
    rec.step_norm = delta.norm();
    rec.radius = radius;
    rec.boundary = sol.on_boundary;
    rec.rho = rho;
    rec.trs_status = sol.status;
    rec.model_decrease = predicted;

    bool stop_no_progress = false;
    if (opts.mode == TrmMode::FixedStep) {
      rec.accepted = actual >= Scalar(0);
      stop_no_progress = !rec.accepted;
    } else {
      rec.accepted = rho >= opts.accept_threshold;
      if (rho < Scalar(0.25)) {
        radius *= opts.shrink;
      } else if (rho > Scalar(0.75) && sol.on_boundary) {
        radius = std::min(opts.expand * radius, opts.delta_max);
      }
      stop_no_progress = radius < opts.min_radius;
    }
    report.iterates.push_back(std::move(rec));
    if (report.iterates.back().accepted) {
      q = candidate;
      ev = std::move(ev_new);
    }
    if (stop_no_progress) {
      IterateRecord<Scalar> last;
      last.q = q.vector();
      last.f = ev.value;
      last.grad_norm = project_tangent(ev.q, project_tangent(ev.q, ev.egrad)).norm();
      last.region = classify_region(q.vector(), obj.mu()).region;
      report.iterates.push_back(std::move(last));
      report.status = SolveStatus::NoProgress;
      break;
    }
  }

  report.q_final = q;
  report.f_final = ev.value;
  report.grad_norm_final = report.iterates.back().grad_norm;
  return report;
}

/// Distance from a unit vector to the nearest signed standard basis vector.
template <typename Derived>
typename Derived::Scalar re_metric(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  if (q.size() < 1) throw InvalidInput("re_metric: empty vector");
  Index axis = 0;
  q.cwiseAbs().maxCoeff(&axis);
  Scalar sum(0);
  for (Index i = 0; i < q.size(); ++i) {
    const Scalar d = i == axis ? std::abs(q(i)) - Scalar(1) : q(i);
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// log|g_{k+1}| / log|g_k| over the final run of accepted interior steps
/// taken inside R_I. Empty unless the solve met its gradient tolerance.
template <typename Scalar>
std::vector<Scalar> quadratic_rate_probe(const SolveReport<Scalar>& report) {
  std::vector<Scalar> ratios;
  if (report.status != SolveStatus::GradToleranceMet || report.iterates.size() < 2) return ratios;
  const auto& it = report.iterates;
  std::size_t start = it.size() - 1;
  while (start > 0) {
    const auto& r = it[start - 1];
    if (!(r.has_step && r.accepted && !r.boundary && r.region == Region::I)) break;
    --start;
  }
  for (std::size_t k = start; k + 1 < it.size(); ++k) {
    const Scalar g0 = it[k].grad_norm;
    const Scalar g1 = it[k + 1].grad_norm;
    if (!(g0 > Scalar(0) && g0 < Scalar(1))) continue;
    ratios.push_back(g1 > Scalar(0) ? std::log(g1) / std::log(g0)
                                    : std::numeric_limits<Scalar>::infinity());
  }
  return ratios;
}

}  // namespace sdl
