#include "sdl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Cholesky>

#include "sdl/errors.hpp"
#include "sdl/linalg.hpp"
#include "sdl/random.hpp"

namespace sdl {

DenseMatrix precondition(const DenseMatrix& y) {
  if (y.rows() < 1 || y.cols() < 1) throw InvalidInput("precondition: empty matrix");
  const DenseMatrix gram = y * y.transpose();
  return inv_sqrt_psd(gram) * y;
}

DenseMatrix precondition(const DenseMatrix& y, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidInput("precondition: theta must lie in (0, 1]");
  return std::sqrt(double(y.cols()) * theta) * precondition(y);
}

Index RecoveryResult::flagged_steps() const {
  Index c = 0;
  for (const auto& s : steps) c += s.below_threshold ? 1 : 0;
  return c;
}

namespace {

// Component of v orthogonal to the first `cols` columns of basis, normalized.
// Returns false when nothing is left.
bool extend_orthonormal(const DenseMatrix& basis, Index cols, Vector& v) {
  const double initial = v.norm();
  for (int pass = 0; pass < 2; ++pass) {
    const auto current = basis.leftCols(cols);
    v -= current * (current.transpose() * v);
  }
  const double remaining = v.norm();
  if (!(remaining > 1e-8 * initial)) return false;
  v /= remaining;
  return true;
}

}  // namespace

RecoveryResult recover_all(const DenseMatrix& y_hat, double mu, const RecoveryOptions& opts) {
  const Index n = y_hat.rows();
  if (n < 1 || y_hat.cols() < 1) throw InvalidInput("recover_all: empty data matrix");
  if (!(mu > 0.0)) throw InvalidInput("recover_all: mu must be positive");
  opts.trm.validate();

  RecoveryResult result;
  result.q_stars = DenseMatrix::Zero(n, n);
  DenseMatrix found(n, n);  // orthonormalized directions, first l columns valid

  for (Index l = 0; l < n; ++l) {
    StepTelemetry step;
    step.dim = n - l;
    try {
      const DenseMatrix u =
          l == 0 ? DenseMatrix(DenseMatrix::Identity(n, n))
                 : orthonormal_complement_basis(found.leftCols(l), derive_seed(opts.seed, 0xc0, l));
      Vector r;
      if (n - l == 1) {
        r = u.col(0);
      } else {
        Objective<double> obj(u.transpose() * y_hat, mu);
        TrmOptions<double> trm = opts.trm;
        trm.seed = derive_seed(opts.seed, 0x7a, l);
        step.solve = trm_solve(obj, trm);
        r = u * step.solve->q_final.vector();
      }

      Vector q = r;
      if (opts.round) {
        const auto rounded = lp_round(y_hat, r, opts.simplex);
        q = rounded.q;
        step.rounded = true;
        step.rounding_objective = rounded.objective;
        step.rounding_alignment = rounded.alignment;
        step.below_threshold = rounded.below_threshold;
      }
      result.q_stars.row(l) = q.transpose();

      Vector next = q;
      if (!extend_orthonormal(found, l, next)) {
        next = r;
        extend_orthonormal(found, l, next);
      }
      found.col(l) = next;
    } catch (const Error& e) {
      result.failure = "step " + std::to_string(l) + ": " + e.what();
      result.steps.push_back(std::move(step));
      return result;
    }
    result.steps.push_back(std::move(step));
  }

  result.x_hat = result.q_stars * y_hat;
  try {
    auto fit = reconstruct_dictionary(y_hat, result.x_hat);
    result.a_hat = std::move(fit.a_hat);
    result.residual = fit.residual;
  } catch (const Error& e) {
    result.failure = std::string("reconstruction: ") + e.what();
    return result;
  }
  result.complete = true;
  return result;
}

DictionaryFit reconstruct_dictionary(const DenseMatrix& y, const DenseMatrix& x_hat) {
  if (y.cols() != x_hat.cols()) {
    throw InvalidInput("reconstruct_dictionary: Y and X_hat have different sample counts");
  }
  const DenseMatrix gram = x_hat * x_hat.transpose();
  const auto eig = sym_eig(gram);
  const Index m = eig.eigenvalues.size();
  if (m == 0 || !(eig.eigenvalues(0) > 1e-12 * eig.eigenvalues(m - 1))) {
    throw SingularMatrix("reconstruct_dictionary: X_hat X_hat^T is singular",
                         m == 0 ? 0.0 : eig.eigenvalues(0));
  }
  DictionaryFit fit;
  // gram is symmetric, so A^T = gram^{-1} X_hat Y^T.
  fit.a_hat = gram.ldlt().solve(x_hat * y.transpose()).transpose();
  const double ynorm = y.norm();
  const double res = (y - fit.a_hat * x_hat).norm();
  fit.residual = ynorm > 0.0 ? res / ynorm : res;
  return fit;
}

namespace {

// Minimum-cost perfect assignment (Hungarian method with potentials).
// Returns assignment[row] = column.
std::vector<Index> hungarian(const DenseMatrix& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> assignment(n);
  for (Index j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

SignedPermutationMatch match_signed_permutation(const DenseMatrix& rows_hat,
                                                const DenseMatrix& rows_true) {
  if (rows_hat.rows() != rows_true.rows() || rows_hat.cols() != rows_true.cols()) {
    throw InvalidInput("match_signed_permutation: shapes differ");
  }
  const Index n = rows_hat.rows();
  SignedPermutationMatch m;
  if (n == 0) return m;
  const Vector nh = rows_hat.rowwise().norm();
  const Vector nt = rows_true.rowwise().norm();
  DenseMatrix corr = rows_hat * rows_true.transpose();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double d = nh(i) * nt(j);
      corr(i, j) = d > 0.0 ? corr(i, j) / d : 0.0;
    }
  }
  m.perm = hungarian(-corr.cwiseAbs());
  m.signs.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Index j = m.perm[static_cast<std::size_t>(i)];
    m.signs(i) = corr(i, j) < 0.0 ? -1.0 : 1.0;
    const auto truth = rows_true.row(j);
    const double tn = nt(j) > 0.0 ? nt(j) : 1.0;
    const double raw = (m.signs(i) * rows_hat.row(i) - truth).norm() / tn;
    const double hn2 = rows_hat.row(i).squaredNorm();
    const double c = hn2 > 0.0 ? rows_hat.row(i).dot(truth) / hn2 : 0.0;
    const double scaled = (c * rows_hat.row(i) - truth).norm() / tn;
    m.max_rel_err = std::max(m.max_rel_err, raw);
    m.max_rel_err_scaled = std::max(m.max_rel_err_scaled, scaled);
  }
  return m;
}

double dictionary_match_error(const DenseMatrix& a_hat, const DenseMatrix& a_true,
                              const SignedPermutationMatch& match) {
  if (a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols() ||
      static_cast<Index>(match.perm.size()) != a_hat.cols()) {
    throw InvalidInput("dictionary_match_error: shapes differ");
  }
  double err = 0.0;
  for (Index i = 0; i < a_hat.cols(); ++i) {
    const auto truth = a_true.col(match.perm[static_cast<std::size_t>(i)]);
    const double tn = truth.norm() > 0.0 ? truth.norm() : 1.0;
    err = std::max(err, (match.signs(i) * a_hat.col(i) - truth).norm() / tn);
  }
  return err;
}

void write_run_report(std::ostream& out, const RecoveryResult& result,
                      const std::optional<SignedPermutationMatch>& match,
                      std::optional<double> dictionary_error) {
  out << "n=" << result.q_stars.rows() << '\n';
  out << "samples=" << result.x_hat.cols() << '\n';
  out << "complete=" << (result.complete ? 1 : 0) << '\n';
  if (!result.failure.empty()) out << "failure=" << result.failure << '\n';
  out << "steps=" << result.steps.size() << '\n';
  out << "flagged_steps=" << result.flagged_steps() << '\n';
  long iters = 0;
  for (const auto& s : result.steps) iters += s.solve ? s.solve->steps() : 0;
  out << "trm_iterations_total=" << iters << '\n';
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const auto& s = result.steps[i];
    out << "step" << i << ".dim=" << s.dim << '\n';
    if (s.solve) {
      out << "step" << i << ".status=" << solve_status_name(s.solve->status) << '\n';
      out << "step" << i << ".iterations=" << s.solve->steps() << '\n';
      out << "step" << i << ".f_final=" << s.solve->f_final << '\n';
    }
    if (s.rounded) {
      out << "step" << i << ".rounding_alignment=" << s.rounding_alignment << '\n';
      out << "step" << i << ".below_threshold=" << (s.below_threshold ? 1 : 0) << '\n';
    }
  }
  if (result.complete) out << "reconstruction_residual=" << result.residual << '\n';
  if (match) {
    out << "max_row_error=" << match->max_rel_err << '\n';
    out << "max_row_error_scaled=" << match->max_rel_err_scaled << '\n';
    out << "permutation=";
    for (std::size_t i = 0; i < match->perm.size(); ++i) out << (i ? "," : "") << match->perm[i];
    out << '\n';
    out << "signs=";
    for (Index i = 0; i < match->signs.size(); ++i) out << (i ? "," : "") << (match->signs(i) < 0 ? '-' : '+');
    out << '\n';
  }
  if (dictionary_error) out << "max_dictionary_column_error=" << *dictionary_error << '\n';
}

}  // namespace sdl
