#pragma once

// Brute-force reference for low-dimensional trust-region subproblems, used
// to check the exact solver. Directions come from a polar grid of the unit
// sphere; along each ray the quadratic in the radius is minimized in closed
// form over [0, radius].

#include <cmath>
#include <numbers>
#include <utility>

#include "sdl/errors.hpp"
#include "sdl/geometry.hpp"
#include "sdl/types.hpp"

namespace sdl {

template <typename Scalar>
struct OracleResult {
  Vec<Scalar> xi;
  Scalar value;
};

template <typename Scalar>
OracleResult<Scalar> trs_brute_oracle(const TrsModel<Scalar>& model, Scalar grid_step) {
  const Index m = model.b.size();
  if (m > 3) throw InvalidInput("trs_brute_oracle: dimension must be at most 3");
  if (!(grid_step > Scalar(0))) throw InvalidInput("trs_brute_oracle: grid step must be positive");
  OracleResult<Scalar> best{Vec<Scalar>::Zero(m), Scalar(0)};
  if (m == 0) return best;

  // Fixed-size copies keep the inner loop free of allocations.
  Scalar hm[3][3] = {};
  Scalar bm[3] = {};
  for (Index i = 0; i < m; ++i) {
    bm[i] = model.b(i);
    for (Index j = 0; j < m; ++j) hm[i][j] = model.h(i, j);
  }
  Scalar u[3] = {};
  Scalar best_r(0);
  Scalar best_u[3] = {};
  auto consider = [&]() {
    Scalar slope(0), curv(0);
    for (Index i = 0; i < m; ++i) {
      slope += bm[i] * u[i];
      Scalar row(0);
      for (Index j = 0; j < m; ++j) row += hm[i][j] * u[j];
      curv += u[i] * row;
    }
    auto eval = [&](Scalar r) {
      const Scalar val = r * slope + Scalar(0.5) * r * r * curv;
      if (val < best.value) {
        best.value = val;
        best_r = r;
        for (Index i = 0; i < m; ++i) best_u[i] = u[i];
      }
    };
    eval(model.radius);
    if (curv > Scalar(0)) {
      const Scalar r = -slope / curv;
      if (r > Scalar(0) && r < model.radius) eval(r);
    }
  };

  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (m == 1) {
    for (Scalar s : {Scalar(1), Scalar(-1)}) {
      u[0] = s;
      consider();
    }
  } else if (m == 2) {
    const long steps = static_cast<long>(std::ceil(Scalar(2) * pi / grid_step));
    for (long i = 0; i < steps; ++i) {
      const Scalar phi = Scalar(2) * pi * Scalar(i) / Scalar(steps);
      u[0] = std::cos(phi);
      u[1] = std::sin(phi);
      consider();
    }
  } else {
    // Rings of constant polar angle with roughly uniform arc spacing.
    const long rings = static_cast<long>(std::ceil(pi / grid_step));
    for (long i = 0; i <= rings; ++i) {
      const Scalar polar = pi * Scalar(i) / Scalar(rings);
      const Scalar sp = std::sin(polar);
      const long steps =
          std::max<long>(1, static_cast<long>(std::ceil(Scalar(2) * pi * sp / grid_step)));
      for (long j = 0; j < steps; ++j) {
        const Scalar az = Scalar(2) * pi * Scalar(j) / Scalar(steps);
        u[0] = sp * std::cos(az);
        u[1] = sp * std::sin(az);
        u[2] = std::cos(polar);
        consider();
      }
    }
  }
  for (Index i = 0; i < m; ++i) best.xi(i) = best_r * best_u[i];
  return best;
}

}  // namespace sdl
