#include "sdl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "sdl/errors.hpp"

namespace sdl {
namespace {

DenseMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  DenseMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

void require_dims(Index n, Index p, const char* who) {
  if (n < 1 || p < 1) {
    throw InvalidInput(std::string(who) + ": dimensions must be positive, got " +
                       std::to_string(n) + "x" + std::to_string(p));
  }
}

}  // namespace

DenseMatrix sample_bg(Index n, Index p, double theta, Rng& rng) {
  require_dims(n, p, "sample_bg");
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw InvalidInput("sample_bg: theta must lie in (0, 1], got " + std::to_string(theta));
  }
  DenseMatrix x = DenseMatrix::Zero(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (rng.bernoulli(theta)) x(i, j) = rng.normal();
    }
  }
  return x;
}

DenseMatrix sample_fixed_k(Index n, Index p, Index k, Rng& rng) {
  require_dims(n, p, "sample_fixed_k");
  if (k < 1 || k > n) {
    throw InvalidInput("sample_fixed_k: need 1 <= k <= n, got k=" + std::to_string(k) +
                       ", n=" + std::to_string(n));
  }
  DenseMatrix x = DenseMatrix::Zero(n, p);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index j = 0; j < p; ++j) {
    std::iota(rows.begin(), rows.end(), Index{0});
    for (Index t = 0; t < k; ++t) {
      const auto pick = t + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - t)));
      std::swap(rows[static_cast<std::size_t>(t)], rows[static_cast<std::size_t>(pick)]);
    }
    for (Index t = 0; t < k; ++t) x(rows[static_cast<std::size_t>(t)], j) = rng.normal();
  }
  return x;
}

DenseMatrix sample_orthogonal_dictionary(Index n, Rng& rng) {
  if (n < 1) throw InvalidInput("sample_orthogonal_dictionary: n must be positive");
  const DenseMatrix g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, n);
  const DenseMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  return q;
}

DenseMatrix sample_conditioned_dictionary(Index n, double kappa, Rng& rng) {
  if (n < 1) throw InvalidInput("sample_conditioned_dictionary: n must be positive");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw InvalidInput("sample_conditioned_dictionary: kappa must be >= 1, got " +
                       std::to_string(kappa));
  }
  const DenseMatrix u = sample_orthogonal_dictionary(n, rng);
  const DenseMatrix v = sample_orthogonal_dictionary(n, rng);
  Vector sigma(n);
  for (Index i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    sigma(i) = std::pow(kappa, -t);
  }
  return u * sigma.asDiagonal() * v.transpose();
}

ProblemInstance make_instance(DenseMatrix a0, DenseMatrix x0, SparsitySpec sparsity,
                              std::uint64_t seed) {
  if (a0.rows() != a0.cols()) {
    throw InvalidInput("make_instance: dictionary must be square, got " +
                       std::to_string(a0.rows()) + "x" + std::to_string(a0.cols()));
  }
  if (a0.cols() != x0.rows()) {
    throw InvalidInput("make_instance: dictionary has " + std::to_string(a0.cols()) +
                       " columns but coefficients have " + std::to_string(x0.rows()) + " rows");
  }
  ProblemInstance inst;
  inst.y = a0 * x0;
  inst.a0 = std::move(a0);
  inst.x0 = std::move(x0);
  inst.sparsity = sparsity;
  inst.seed = seed;
  return inst;
}

ProblemInstance generate_instance(const InstanceSpec& spec) {
  Rng rng(spec.seed);
  DenseMatrix a0;
  switch (spec.dictionary) {
    case DictionaryKind::Identity:
      if (spec.n < 1) throw InvalidInput("generate_instance: n must be positive");
      a0 = DenseMatrix::Identity(spec.n, spec.n);
      break;
    case DictionaryKind::Orthogonal:
      a0 = sample_orthogonal_dictionary(spec.n, rng);
      break;
    case DictionaryKind::Conditioned:
      a0 = sample_conditioned_dictionary(spec.n, spec.kappa, rng);
      break;
  }
  DenseMatrix x0 = std::visit(
      [&](const auto& s) -> DenseMatrix {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BernoulliRate>) {
          return sample_bg(spec.n, spec.p, s.theta, rng);
        } else {
          return sample_fixed_k(spec.n, spec.p, s.k, rng);
        }
      },
      spec.sparsity);
  return make_instance(std::move(a0), std::move(x0), spec.sparsity, spec.seed);
}

Index five_n2_log_n(Index n) {
  const double nd = static_cast<double>(n);
  return std::max<Index>(1, static_cast<Index>(std::ceil(5.0 * nd * nd * std::log(nd))));
}

}  // namespace sdl
