#pragma once

// End-to-end recovery: precondition, then for each remaining dimension solve
// on the sphere of the orthogonal complement, round with an LP, and deflate.
// Finally reconstruct the dictionary and score against ground truth.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdl/rounding.hpp"
#include "sdl/trm.hpp"
#include "sdl/types.hpp"

namespace sdl {

// sqrt(p theta) (Y Y^T)^{-1/2} Y.
DenseMatrix precondition(const DenseMatrix& y, double theta);
// (Y Y^T)^{-1/2} Y; theta only rescales the problem.
DenseMatrix precondition(const DenseMatrix& y);

struct RecoveryOptions {
  TrmOptions<double> trm{};
  SimplexOptions simplex{};
  bool round = true;
  std::uint64_t seed = 0;
};

struct StepTelemetry {
  Index dim = 0;                           // sphere dimension + 1 for this step
  std::optional<SolveReport<double>> solve;  // absent for the forced last direction
  bool rounded = false;
  double rounding_objective = 0.0;
  double rounding_alignment = 0.0;
  bool below_threshold = false;
};

struct SignedPermutationMatch {
  std::vector<Index> perm;  // hat row i matches true row perm[i]
  Vector signs;             // +1 or -1
  double max_rel_err = 0.0;         // max_i ||s_i hat_i - true_perm[i]|| / ||true_perm[i]||
  double max_rel_err_scaled = 0.0;  // same after the best scalar fit of each row
};

struct DictionaryFit {
  DenseMatrix a_hat;
  double residual = 0.0;  // ||Y - A_hat X_hat||_F / ||Y||_F
};

struct RecoveryResult {
  DenseMatrix q_stars;  // n x n, row i is the i-th recovered direction
  DenseMatrix x_hat;    // q_stars * Y_hat
  DenseMatrix a_hat;
  double residual = 0.0;
  std::vector<StepTelemetry> steps;
  bool complete = false;
  std::string failure;  // set when a step aborted the run
  Index flagged_steps() const;
};

RecoveryResult recover_all(const DenseMatrix& y_hat, double mu, const RecoveryOptions& opts = {});

// A minimizes ||Y - A X_hat||_F: A = Y X_hat^T (X_hat X_hat^T)^{-1}.
DictionaryFit reconstruct_dictionary(const DenseMatrix& y, const DenseMatrix& x_hat);

// Optimal assignment on |normalized correlation|, signs from the correlation.
SignedPermutationMatch match_signed_permutation(const DenseMatrix& rows_hat,
                                                const DenseMatrix& rows_true);

// Maximum relative error of the columns of a_hat against a_true under the
// permutation and signs found for the coefficient rows.
double dictionary_match_error(const DenseMatrix& a_hat, const DenseMatrix& a_true,
                              const SignedPermutationMatch& match);

// key=value lines, one metric per line.
void write_run_report(std::ostream& out, const RecoveryResult& result,
                      const std::optional<SignedPermutationMatch>& match = std::nullopt,
                      std::optional<double> dictionary_error = std::nullopt);

}  // namespace sdl
