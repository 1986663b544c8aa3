#pragma once

// The smoothed sparsity objective on the unit sphere
//
//   f(q; Y) = (1/p) sum_k h_mu(q^T y_k),   h_mu(z) = mu log cosh(z / mu),
//
// its Euclidean and Riemannian derivatives, the sphere's exponential map and
// parallel translation, the second-order tangent model, and the landscape
// diagnostics built on the reparametrization q(w) = (w, sqrt(1 - |w|^2)).

#include <cmath>
#include <numbers>
#include <string>

#include "sdl/errors.hpp"
#include "sdl/linalg.hpp"
#include "sdl/types.hpp"

namespace sdl {

template <typename Scalar>
struct SurrogateValue {
  Scalar value;   // h_mu(z)
  Scalar first;   // tanh(z / mu)
  Scalar second;  // (1 - tanh^2(z / mu)) / mu
};

// Overflow-free for any |z / mu|: log cosh(a) = |a| - log 2 + log1p(exp(-2|a|)).
template <typename Scalar>
SurrogateValue<Scalar> surrogate_eval(Scalar z, Scalar mu) {
  using std::abs, std::exp, std::log1p, std::tanh;
  if (!(mu > Scalar(0))) throw InvalidInput("surrogate_eval: mu must be positive");
  const Scalar a = abs(z) / mu;
  const Scalar e = exp(Scalar(-2) * a);
  const Scalar ln2 = std::numbers::ln2_v<Scalar>;
  const Scalar denom = Scalar(1) + e;
  return {mu * (a + log1p(e) - ln2), tanh(z / mu), Scalar(4) * e / (denom * denom) / mu};
}

/// Unit vector on S^{n-1}; normalized on construction.
template <typename Scalar>
class SpherePoint {
 public:
  SpherePoint() = default;

  template <typename Derived>
  explicit SpherePoint(const Eigen::MatrixBase<Derived>& q) : q_(q) {
    const Scalar norm = q_.norm();
    if (!(norm > Scalar(0)) || !q_.allFinite()) {
      throw InvalidInput("SpherePoint: vector must be finite and nonzero");
    }
    q_ /= norm;
  }

  const Vec<Scalar>& vector() const noexcept { return q_; }
  Index dim() const noexcept { return q_.size(); }
  Scalar operator()(Index i) const { return q_(i); }

 private:
  Vec<Scalar> q_;
};

/// Vector in T_q S^{n-1}. The raw vector is projected onto the tangent space.
template <typename Scalar>
class TangentVector {
 public:
  template <typename Derived>
  TangentVector(SpherePoint<Scalar> base, const Eigen::MatrixBase<Derived>& v)
      : base_(std::move(base)), delta_(v) {
    if (delta_.size() != base_.dim()) {
      throw InvalidInput("TangentVector: dimension " + std::to_string(delta_.size()) +
                         " does not match base point dimension " + std::to_string(base_.dim()));
    }
    const auto& q = base_.vector();
    delta_ -= q * q.dot(delta_);
  }

  const SpherePoint<Scalar>& base() const noexcept { return base_; }
  const Vec<Scalar>& delta() const noexcept { return delta_; }
  Scalar norm() const { return delta_.norm(); }

 private:
  SpherePoint<Scalar> base_;
  Vec<Scalar> delta_;
};

/// f(.; Y_hat) with smoothing mu. Immutable; safe to share between solves.
template <typename Scalar>
class Objective {
 public:
  Objective(Mat<Scalar> y_hat, Scalar mu) : y_(std::move(y_hat)), mu_(mu) {
    if (!(mu_ > Scalar(0))) throw InvalidInput("Objective: mu must be positive");
    if (y_.rows() < 1 || y_.cols() < 1) throw InvalidInput("Objective: data matrix is empty");
    if (!y_.allFinite()) throw InvalidInput("Objective: data matrix has non-finite entries");
  }

  const Mat<Scalar>& data() const noexcept { return y_; }
  Scalar mu() const noexcept { return mu_; }
  Index dim() const noexcept { return y_.rows(); }
  Index samples() const noexcept { return y_.cols(); }

  template <typename Derived>
  void check_dim(const Eigen::MatrixBase<Derived>& v, const char* who) const {
    if (v.size() != dim()) {
      throw InvalidInput(std::string(who) + ": vector has dimension " + std::to_string(v.size()) +
                         ", objective has " + std::to_string(dim()));
    }
  }

 private:
  Mat<Scalar> y_;
  Scalar mu_;
};

/// Everything derived from z = Y_hat^T q at one point; Hessian products stay
/// matrix-free through `curvature` = (1/p) h''(z_k).
template <typename Scalar>
struct PointEvaluation {
  Vec<Scalar> q;
  Scalar value;
  Vec<Scalar> egrad;
  Vec<Scalar> curvature;

  Scalar radial() const { return egrad.dot(q); }
};

template <typename Scalar, typename Derived>
PointEvaluation<Scalar> evaluate(const Objective<Scalar>& obj, const Eigen::MatrixBase<Derived>& q) {
  obj.check_dim(q, "evaluate");
  const Index p = obj.samples();
  const Scalar inv_p = Scalar(1) / Scalar(p);
  const Vec<Scalar> z = obj.data().transpose() * q;
  Vec<Scalar> first(p);
  PointEvaluation<Scalar> ev{q, Scalar(0), Vec<Scalar>(), Vec<Scalar>(p)};
  Scalar sum(0);
  for (Index k = 0; k < p; ++k) {
    const auto s = surrogate_eval(z(k), obj.mu());
    sum += s.value;
    first(k) = s.first;
    ev.curvature(k) = s.second * inv_p;
  }
  ev.value = sum * inv_p;
  ev.egrad = obj.data() * first * inv_p;
  return ev;
}

template <typename Scalar, typename Derived>
Scalar objective_value(const Objective<Scalar>& obj, const Eigen::MatrixBase<Derived>& q) {
  obj.check_dim(q, "objective_value");
  const Vec<Scalar> z = obj.data().transpose() * q;
  Scalar sum(0);
  for (Index k = 0; k < z.size(); ++k) sum += surrogate_eval(z(k), obj.mu()).value;
  return sum / Scalar(obj.samples());
}

template <typename Scalar, typename Derived>
Vec<Scalar> euclid_grad(const Objective<Scalar>& obj, const Eigen::MatrixBase<Derived>& q) {
  return evaluate(obj, q).egrad;
}

// (1/p) sum_k h''(z_k) y_k y_k^T
template <typename Scalar>
Mat<Scalar> euclid_hess(const Objective<Scalar>& obj, const PointEvaluation<Scalar>& ev) {
  const Mat<Scalar> weighted = obj.data() * ev.curvature.asDiagonal();
  Mat<Scalar> h = weighted * obj.data().transpose();
  return (h + h.transpose()) / Scalar(2);
}

template <typename Scalar, typename Derived>
Mat<Scalar> euclid_hess(const Objective<Scalar>& obj, const Eigen::MatrixBase<Derived>& q) {
  return euclid_hess(obj, evaluate(obj, q));
}

template <typename Scalar, typename Derived>
Vec<Scalar> euclid_hess_vec(const Objective<Scalar>& obj, const PointEvaluation<Scalar>& ev,
                            const Eigen::MatrixBase<Derived>& v) {
  const Vec<Scalar> proj = obj.data().transpose() * v;
  return obj.data() * ev.curvature.cwiseProduct(proj);
}

template <typename Scalar, typename D1, typename D2>
Vec<Scalar> euclid_hess_vec(const Objective<Scalar>& obj, const Eigen::MatrixBase<D1>& q,
                            const Eigen::MatrixBase<D2>& v) {
  obj.check_dim(v, "euclid_hess_vec");
  return euclid_hess_vec(obj, evaluate(obj, q), v);
}

template <typename D1, typename D2>
Vec<typename D1::Scalar> project_tangent(const Eigen::MatrixBase<D1>& q,
                                         const Eigen::MatrixBase<D2>& v) {
  return v - q * q.dot(v);
}

template <typename Scalar, typename Derived>
TangentVector<Scalar> riem_grad(const Objective<Scalar>& obj, const Eigen::MatrixBase<Derived>& q) {
  SpherePoint<Scalar> base(q);
  return TangentVector<Scalar>(base, euclid_grad(obj, base.vector()));
}

// P (grad^2 f - <grad f, q> I) v for tangent v.
template <typename Scalar, typename Derived>
Vec<Scalar> riem_hess_vec(const Objective<Scalar>& obj, const PointEvaluation<Scalar>& ev,
                          const Eigen::MatrixBase<Derived>& v) {
  Vec<Scalar> hv = euclid_hess_vec(obj, ev, v) - ev.radial() * v;
  hv -= ev.q * ev.q.dot(hv);
  return hv;
}

/// Reduced trust-region model in tangent coordinates: minimize
/// b^T xi + 1/2 xi^T h xi over |xi| <= radius, with step delta = basis * xi.
/// `basis` may be empty for models built directly in coordinates.
template <typename Scalar>
struct TrsModel {
  Vec<Scalar> b;
  Mat<Scalar> h;
  Mat<Scalar> basis;
  Scalar radius = Scalar(1);

  Index dim() const { return b.size(); }
  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& xi) const {
    return b.dot(xi) + Scalar(0.5) * xi.dot(h * xi);
  }
};

template <typename Derived>
Mat<typename Derived::Scalar> tangent_basis(const Eigen::MatrixBase<Derived>& q) {
  return orthonormal_complement_basis(q);
}

template <typename Scalar>
TrsModel<Scalar> build_trs_model(const Objective<Scalar>& obj, const PointEvaluation<Scalar>& ev,
                                 Scalar radius) {
  if (!(radius > Scalar(0))) throw InvalidInput("build_trs_model: radius must be positive");
  TrsModel<Scalar> model;
  model.basis = tangent_basis(ev.q);
  model.radius = radius;
  model.b = model.basis.transpose() * ev.egrad;
  Mat<Scalar> ambient = euclid_hess(obj, ev);
  ambient.diagonal().array() -= ev.radial();
  Mat<Scalar> h = model.basis.transpose() * ambient * model.basis;
  model.h = (h + h.transpose()) / Scalar(2);
  return model;
}

template <typename Scalar, typename Derived>
TrsModel<Scalar> build_trs_model(const Objective<Scalar>& obj, const Eigen::MatrixBase<Derived>& q,
                                 Scalar radius) {
  return build_trs_model(obj, evaluate(obj, SpherePoint<Scalar>(q).vector()), radius);
}

// f(q) + <grad f, d> + 1/2 d^T (grad^2 f - <grad f, q> I) d
template <typename Scalar>
Scalar quadratic_model_eval(const Objective<Scalar>& obj, const TangentVector<Scalar>& step) {
  const auto ev = evaluate(obj, step.base().vector());
  const auto& d = step.delta();
  const Vec<Scalar> proj = obj.data().transpose() * d;
  const Scalar curv = ev.curvature.dot(proj.cwiseAbs2()) - ev.radial() * d.squaredNorm();
  return ev.value + ev.egrad.dot(d) + Scalar(0.5) * curv;
}

inline constexpr double kExpMapZeroNorm = 1e-14;

// q cos|d| + (d/|d|) sin|d|
template <typename D1, typename D2>
SpherePoint<typename D1::Scalar> exp_map(const Eigen::MatrixBase<D1>& q,
                                         const Eigen::MatrixBase<D2>& delta) {
  using Scalar = typename D1::Scalar;
  using std::cos, std::sin;
  if (q.size() != delta.size()) throw InvalidInput("exp_map: dimension mismatch");
  const Scalar t = delta.norm();
  if (t < Scalar(kExpMapZeroNorm)) return SpherePoint<Scalar>(q);
  return SpherePoint<Scalar>(Vec<Scalar>(q * cos(t) + delta * (sin(t) / t)));
}

template <typename Scalar>
SpherePoint<Scalar> exp_map(const TangentVector<Scalar>& step) {
  return exp_map(step.base().vector(), step.delta());
}

// Transport of tangent v from q to gamma(tau) = exp_q(tau d):
//   v + (cos(tau|d|) - 1) (d^T v / |d|^2) d - sin(tau|d|) (d^T v / |d|) q
template <typename D1, typename D2, typename D3>
Vec<typename D1::Scalar> parallel_translate(const Eigen::MatrixBase<D1>& q,
                                            const Eigen::MatrixBase<D2>& delta,
                                            typename D1::Scalar tau,
                                            const Eigen::MatrixBase<D3>& v) {
  using Scalar = typename D1::Scalar;
  using std::cos, std::sin;
  if (q.size() != delta.size() || q.size() != v.size()) {
    throw InvalidInput("parallel_translate: dimension mismatch");
  }
  const Scalar t = delta.norm();
  if (t < Scalar(kExpMapZeroNorm)) return v;
  const Scalar dv = delta.dot(v);
  const Scalar angle = tau * t;
  return v + delta * ((cos(angle) - Scalar(1)) * dv / (t * t)) - q * (sin(angle) * dv / t);
}

template <typename Scalar>
struct ReparamValue {
  Scalar value;
  Vec<Scalar> gradient;
};

// g(w) = f(q(w)) with q(w) = (w, sqrt(1 - |w|^2)); the last axis is the pole.
template <typename Scalar, typename Derived>
ReparamValue<Scalar> reparam_g(const Objective<Scalar>& obj, const Eigen::MatrixBase<Derived>& w) {
  using std::sqrt;
  if (w.size() + 1 != obj.dim()) throw InvalidInput("reparam_g: w must have dimension n - 1");
  const Scalar w2 = w.squaredNorm();
  if (!(w2 < Scalar(1))) throw InvalidInput("reparam_g: need |w| < 1");
  const Index m = w.size();
  Vec<Scalar> q(m + 1);
  q.head(m) = w;
  q(m) = sqrt(Scalar(1) - w2);
  const auto ev = evaluate(obj, q);
  Vec<Scalar> grad = ev.egrad.head(m) - w * (ev.egrad(m) / q(m));
  return {ev.value, std::move(grad)};
}

enum class Region { I = 1, II = 2, III = 3 };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::I: return "R_I";
    case Region::II: return "R_II";
    case Region::III: return "R_III";
  }
  return "?";
}

template <typename Scalar>
struct RegionInfo {
  Region region;
  Index axis;     // 0-based index of the nearest signed axis
  int sign;       // +1 or -1
  Scalar w_norm;  // distance measure |w| in the equatorial section of that axis

  int signed_axis() const { return sign * static_cast<int>(axis + 1); }
};

// Radii separating strong convexity, large gradient and negative curvature.
template <typename Scalar>
Scalar strong_convexity_radius(Scalar mu) {
  return mu / (Scalar(4) * std::sqrt(Scalar(2)));
}
template <typename Scalar>
Scalar large_gradient_radius() {
  return Scalar(1) / (Scalar(20) * std::sqrt(Scalar(5)));
}

// Ties at a boundary go to the smaller region label.
template <typename Derived>
RegionInfo<typename Derived::Scalar> classify_region(const Eigen::MatrixBase<Derived>& q,
                                                     typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  if (q.size() < 1) throw InvalidInput("classify_region: empty vector");
  Index axis = 0;
  q.cwiseAbs().maxCoeff(&axis);
  const int sign = q(axis) < Scalar(0) ? -1 : 1;
  Scalar w2(0);
  for (Index i = 0; i < q.size(); ++i)
    if (i != axis) w2 += q(i) * q(i);
  const Scalar w_norm = std::sqrt(w2);
  Region region = Region::III;
  if (w_norm <= strong_convexity_radius(mu)) {
    region = Region::I;
  } else if (w_norm <= large_gradient_radius<Scalar>()) {
    region = Region::II;
  }
  return {region, axis, sign, w_norm};
}

}  // namespace sdl
