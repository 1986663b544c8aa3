#pragma once

// Synthetic dictionary-learning instances: sparse coefficient samplers,
// orthogonal and conditioned complete dictionaries, and Y = A0 X0.

#include <cstdint>
#include <variant>

#include "sdl/random.hpp"
#include "sdl/types.hpp"

namespace sdl {

struct BernoulliRate {
  double theta;
};

struct FixedSparsity {
  Index k;
};

using SparsitySpec = std::variant<BernoulliRate, FixedSparsity>;

struct ProblemInstance {
  DenseMatrix a0;  // n x n dictionary
  DenseMatrix x0;  // n x p coefficients
  DenseMatrix y;   // n x p observations, y = a0 * x0
  SparsitySpec sparsity = BernoulliRate{0.0};
  std::uint64_t seed = 0;

  Index n() const { return a0.rows(); }
  Index p() const { return x0.cols(); }
};

// Each entry Omega * Z with Omega ~ Ber(theta), Z ~ N(0, 1). Entries are
// drawn column by column. theta must lie in (0, 1].
DenseMatrix sample_bg(Index n, Index p, double theta, Rng& rng);

// Every column has exactly k nonzeros on a uniformly random support with
// i.i.d. N(0, 1) values (partial Fisher-Yates shuffle per column).
DenseMatrix sample_fixed_k(Index n, Index p, Index k, Rng& rng);

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// signs of R's diagonal folded into Q.
DenseMatrix sample_orthogonal_dictionary(Index n, Rng& rng);

// U diag(sigma) V^T with U, V Haar and sigma log-spaced from 1 down to 1/kappa.
DenseMatrix sample_conditioned_dictionary(Index n, double kappa, Rng& rng);

ProblemInstance make_instance(DenseMatrix a0, DenseMatrix x0, SparsitySpec sparsity,
                              std::uint64_t seed);

enum class DictionaryKind { Identity, Orthogonal, Conditioned };

struct InstanceSpec {
  Index n = 10;
  Index p = 1000;
  SparsitySpec sparsity = BernoulliRate{0.25};
  DictionaryKind dictionary = DictionaryKind::Identity;
  double kappa = 1.0;  // only for Conditioned
  std::uint64_t seed = 0;
};

// Draws the dictionary first, then the coefficients, from one Rng(seed).
ProblemInstance generate_instance(const InstanceSpec& spec);

// ceil(5 n^2 log n), the sample size used by the single-vector experiments.
Index five_n2_log_n(Index n);

}  // namespace sdl
