// Command-line front end: instance generation, single solves, full
// recoveries, LP rounding and phase-transition sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdl/errors.hpp"
#include "sdl/experiment.hpp"
#include "sdl/matrix_io.hpp"
#include "sdl/model.hpp"
#include "sdl/pipeline.hpp"
#include "sdl/rounding.hpp"
#include "sdl/trm.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct SolverFlags {
  std::string mode = "adaptive";
  std::string subproblem = "tcg";
  double delta0 = 0.1;
  double grad_tol = 1e-10;
  int max_iters = 500;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "adaptive or fixed")->check(CLI::IsMember({"adaptive", "fixed"}));
    app->add_option("--subproblem", subproblem, "tcg or exact")->check(CLI::IsMember({"tcg", "exact"}));
    app->add_option("--delta0", delta0, "initial trust-region radius");
    app->add_option("--grad-tol", grad_tol, "Riemannian gradient tolerance");
    app->add_option("--max-iters", max_iters, "iteration limit");
  }

  sdl::TrmOptions<double> options(std::uint64_t seed) const {
    sdl::TrmOptions<double> o;
    o.mode = mode == "fixed" ? sdl::TrmMode::FixedStep : sdl::TrmMode::Adaptive;
    o.subproblem = subproblem == "exact" ? sdl::Subproblem::Exact : sdl::Subproblem::Tcg;
    o.delta0 = delta0;
    o.delta_max = std::max(o.delta_max, delta0);
    o.grad_tol = grad_tol;
    o.max_iters = max_iters;
    o.seed = seed;
    return o;
  }
};

std::uint64_t effective_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("SDL_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw sdl::InvalidInput(std::string("SDL_SEED is not an unsigned integer: ") + env);
    }
  }
  return flag;
}

void open_output(std::ofstream& out, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  out.open(path, std::ios::binary);
  if (!out) throw sdl::IoError("cannot open " + path.string() + " for writing");
}

void print_vector(std::ostream& out, const char* key, const sdl::Vector& v) {
  out << key << '=';
  for (sdl::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << v(i);
  out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complete dictionary recovery over the sphere"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic instance (A0, X0, Y)");
  sdl::Index gen_n = 10, gen_p = 1000, gen_k = 0;
  double gen_theta = 0.0, gen_kappa = 1.0;
  std::string gen_dict = "identity", gen_format = "sdlm", gen_dir = ".";
  std::uint64_t gen_seed = 0;
  gen->add_option("--n", gen_n, "dimension")->required();
  gen->add_option("--p", gen_p, "number of samples")->required();
  auto* gen_k_opt = gen->add_option("--k", gen_k, "nonzeros per column (fixed sparsity)");
  auto* gen_theta_opt = gen->add_option("--theta", gen_theta, "Bernoulli-Gaussian rate");
  gen_k_opt->excludes(gen_theta_opt);
  gen->add_option("--dictionary", gen_dict, "identity, orthogonal or conditioned")
      ->check(CLI::IsMember({"identity", "orthogonal", "conditioned"}));
  gen->add_option("--kappa", gen_kappa, "condition number for --dictionary conditioned");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--format", gen_format, "sdlm or csv")->check(CLI::IsMember({"sdlm", "csv"}));
  gen->add_option("--out-dir", gen_dir, "output directory");

  // solve
  auto* solve = app.add_subcommand("solve", "run one trust-region solve on Y");
  std::string solve_y, solve_q_out;
  double solve_mu = 0.01;
  std::optional<double> solve_max_re;
  std::uint64_t solve_seed = 0;
  bool solve_verbose = false;
  SolverFlags solve_flags;
  solve->add_option("--y", solve_y, "data matrix file")->required();
  solve->add_option("--mu", solve_mu, "smoothing parameter");
  solve->add_option("--seed", solve_seed, "seed for the initial point");
  solve->add_option("--max-re", solve_max_re, "exit with status 1 if RE exceeds this value");
  solve->add_option("--q-out", solve_q_out, "write the final point as an n x 1 matrix");
  solve->add_flag("--verbose", solve_verbose, "print every iterate");
  solve_flags.add(solve);

  // recover
  auto* recover = app.add_subcommand("recover", "run the full recovery pipeline");
  std::string rec_y, rec_a0, rec_x0, rec_report, rec_out_dir;
  bool rec_orthogonal = false, rec_precondition = false;
  std::optional<double> rec_kappa, rec_max_err;
  sdl::Index rec_n = 10, rec_p = 0;
  double rec_theta = 0.25, rec_mu = 0.01;
  std::uint64_t rec_seed = 0;
  SolverFlags rec_flags;
  recover->add_option("--y", rec_y, "data matrix file (otherwise an instance is generated)");
  recover->add_option("--a0", rec_a0, "ground-truth dictionary file for scoring");
  recover->add_option("--x0", rec_x0, "ground-truth coefficient file for scoring");
  auto* rec_orth_opt = recover->add_flag("--orthogonal", rec_orthogonal, "generate with a Haar orthogonal dictionary");
  recover->add_option("--kappa", rec_kappa, "generate with a conditioned dictionary")->excludes(rec_orth_opt);
  recover->add_option("--n", rec_n, "dimension of the generated instance");
  recover->add_option("--p", rec_p, "samples of the generated instance (default ceil(5 n^2 log n))");
  recover->add_option("--theta", rec_theta, "Bernoulli-Gaussian rate");
  recover->add_option("--mu", rec_mu, "smoothing parameter");
  recover->add_option("--seed", rec_seed, "RNG seed");
  recover->add_flag("--precondition", rec_precondition, "precondition Y before recovery");
  recover->add_option("--max-row-error", rec_max_err, "exit with status 1 if the match error exceeds this");
  recover->add_option("--report", rec_report, "write the run report to this file");
  recover->add_option("--out-dir", rec_out_dir, "write Q, X_hat and A_hat here");
  rec_flags.add(recover);

  // round
  auto* round = app.add_subcommand("round", "LP rounding of a direction against Y");
  std::string round_y, round_r, round_out;
  std::optional<sdl::Index> round_axis;
  round->add_option("--y", round_y, "data matrix file")->required();
  auto* round_r_opt = round->add_option("--r", round_r, "input direction file (n x 1)");
  round->add_option("--r-axis", round_axis, "use the standard basis vector e_i as input")->excludes(round_r_opt);
  round->add_option("--out", round_out, "write the unit result as an n x 1 matrix");

  // phase
  auto* phase = app.add_subcommand("phase", "phase-transition sweep");
  sdl::ExperimentConfig cfg;
  std::string phase_out, phase_heatmap;
  bool phase_no_timestamp = false;
  phase->add_option("--setting", cfg.setting, "1: vary (n, k) at p = 5 n^2 log n; 2: vary (n, p) at k = ceil(0.2 n)");
  phase->add_option("--n-list", cfg.n_values, "dimensions")->delimiter(',');
  phase->add_option("--k-list", cfg.k_values, "sparsity levels (setting 1)")->delimiter(',');
  phase->add_option("--p-list", cfg.p_values, "sample sizes (setting 2)")->delimiter(',');
  phase->add_option("--trials", cfg.trials, "trials per cell");
  phase->add_option("--mu", cfg.mu, "smoothing parameter");
  phase->add_option("--seed", cfg.base_seed, "base seed");
  phase->add_option("--jobs", cfg.jobs, "worker threads");
  phase->add_option("--out", phase_out, "CSV output path")->required();
  phase->add_option("--heatmap", phase_heatmap, "also write the text heatmap here");
  phase->add_flag("--no-timestamp", phase_no_timestamp, "omit the generation-time comment line");
  SolverFlags phase_flags;
  phase_flags.add(phase);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) {
      if (gen->count("--k") == 0 && gen->count("--theta") == 0) {
        throw sdl::InvalidInput("gen: one of --k or --theta is required");
      }
      sdl::InstanceSpec spec;
      spec.n = gen_n;
      spec.p = gen_p;
      spec.sparsity = gen->count("--k") ? sdl::SparsitySpec(sdl::FixedSparsity{gen_k})
                                        : sdl::SparsitySpec(sdl::BernoulliRate{gen_theta});
      spec.dictionary = gen_dict == "orthogonal"    ? sdl::DictionaryKind::Orthogonal
                        : gen_dict == "conditioned" ? sdl::DictionaryKind::Conditioned
                                                    : sdl::DictionaryKind::Identity;
      spec.kappa = gen_kappa;
      spec.seed = effective_seed(gen_seed);
      const auto inst = sdl::generate_instance(spec);
      const fs::path dir(gen_dir);
      fs::create_directories(dir);
      const std::string ext = gen_format == "csv" ? ".csv" : ".sdlm";
      sdl::save_matrix(dir / ("A0" + ext), inst.a0);
      sdl::save_matrix(dir / ("X0" + ext), inst.x0);
      sdl::save_matrix(dir / ("Y" + ext), inst.y);
      std::cout << "wrote " << (dir / ("A0" + ext)).string() << ", " << (dir / ("X0" + ext)).string()
                << ", " << (dir / ("Y" + ext)).string() << '\n';
      return kExitOk;
    }

    if (*solve) {
      const auto y = sdl::load_matrix(solve_y);
      sdl::Objective<double> obj(y, solve_mu);
      const auto report = sdl::trm_solve(obj, solve_flags.options(effective_seed(solve_seed)));
      if (solve_verbose) {
        for (std::size_t i = 0; i < report.iterates.size(); ++i) {
          const auto& r = report.iterates[i];
          std::cout << "iter=" << i << " f=" << r.f << " grad=" << r.grad_norm
                    << " region=" << sdl::region_name(r.region);
          if (r.has_step) {
            std::cout << " step=" << r.step_norm << " radius=" << r.radius << " rho=" << r.rho
                      << " boundary=" << r.boundary << " accepted=" << r.accepted;
          }
          std::cout << '\n';
        }
      }
      const double re = sdl::re_metric(report.q_final.vector());
      std::cout << "status=" << sdl::solve_status_name(report.status) << '\n'
                << "iterations=" << report.steps() << '\n'
                << "accepted_steps=" << report.accepted_steps() << '\n'
                << "f_final=" << report.f_final << '\n'
                << "grad_norm_final=" << report.grad_norm_final << '\n'
                << "RE=" << re << '\n';
      print_vector(std::cout, "q", report.q_final.vector());
      if (!solve_q_out.empty()) sdl::save_matrix(solve_q_out, sdl::DenseMatrix(report.q_final.vector()));
      if (solve_max_re && !(re <= *solve_max_re)) {
        std::cerr << "RE " << re << " exceeds " << *solve_max_re << '\n';
        return kExitCheckFailed;
      }
      return kExitOk;
    }

    if (*recover) {
      std::optional<sdl::DenseMatrix> a0, x0;
      sdl::DenseMatrix y;
      if (!rec_y.empty()) {
        y = sdl::load_matrix(rec_y);
        if (!rec_a0.empty()) a0 = sdl::load_matrix(rec_a0);
        if (!rec_x0.empty()) x0 = sdl::load_matrix(rec_x0);
      } else {
        sdl::InstanceSpec spec;
        spec.n = rec_n;
        spec.p = rec_p > 0 ? rec_p : sdl::five_n2_log_n(rec_n);
        spec.sparsity = sdl::BernoulliRate{rec_theta};
        spec.dictionary = rec_kappa       ? sdl::DictionaryKind::Conditioned
                          : rec_orthogonal ? sdl::DictionaryKind::Orthogonal
                                           : sdl::DictionaryKind::Identity;
        spec.kappa = rec_kappa.value_or(1.0);
        spec.seed = effective_seed(rec_seed);
        auto inst = sdl::generate_instance(spec);
        y = std::move(inst.y);
        a0 = std::move(inst.a0);
        x0 = std::move(inst.x0);
      }
      const sdl::DenseMatrix y_hat = rec_precondition ? sdl::precondition(y, rec_theta) : y;
      sdl::RecoveryOptions ropts;
      ropts.trm = rec_flags.options(0);
      ropts.seed = effective_seed(rec_seed);
      const auto result = sdl::recover_all(y_hat, rec_mu, ropts);

      std::optional<sdl::SignedPermutationMatch> match;
      std::optional<double> dict_err;
      if (result.complete && x0) {
        match = sdl::match_signed_permutation(result.x_hat, *x0);
        if (a0) dict_err = sdl::dictionary_match_error(result.a_hat, *a0, *match);
      }
      std::ostringstream rep;
      sdl::write_run_report(rep, result, match, dict_err);
      std::cout << rep.str();
      if (!rec_report.empty()) {
        std::ofstream f;
        open_output(f, rec_report);
        f << rep.str();
      }
      if (!rec_out_dir.empty() && result.complete) {
        const fs::path dir(rec_out_dir);
        fs::create_directories(dir);
        sdl::save_matrix(dir / "Q.sdlm", result.q_stars);
        sdl::save_matrix(dir / "X_hat.sdlm", result.x_hat);
        sdl::save_matrix(dir / "A_hat.sdlm", result.a_hat);
      }
      if (!result.complete) {
        std::cerr << "recovery incomplete: " << result.failure << '\n';
        return kExitCheckFailed;
      }
      if (rec_max_err) {
        if (!match) throw sdl::InvalidInput("recover: --max-row-error needs ground truth");
        const double err = std::max(match->max_rel_err, dict_err.value_or(0.0));
        if (!(err <= *rec_max_err)) {
          std::cerr << "match error " << err << " exceeds " << *rec_max_err << '\n';
          return kExitCheckFailed;
        }
      }
      return kExitOk;
    }

    if (*round) {
      const auto y = sdl::load_matrix(round_y);
      sdl::Vector r;
      if (round_axis) {
        if (*round_axis < 0 || *round_axis >= y.rows()) throw sdl::InvalidInput("round: --r-axis out of range");
        r = sdl::Vector::Unit(y.rows(), *round_axis);
      } else if (!round_r.empty()) {
        const auto rm = sdl::load_matrix(round_r);
        if (rm.cols() != 1 && rm.rows() != 1) throw sdl::InvalidInput("round: --r must be a vector");
        r = rm.reshaped();
      } else {
        throw sdl::InvalidInput("round: one of --r or --r-axis is required");
      }
      const auto res = sdl::lp_round(y, r);
      std::cout << "objective=" << res.objective << '\n'
                << "alignment=" << res.alignment << '\n'
                << "below_threshold=" << (res.below_threshold ? 1 : 0) << '\n'
                << "simplex_iterations=" << res.simplex_iterations << '\n'
                << "RE=" << sdl::re_metric(res.q) << '\n';
      print_vector(std::cout, "q", res.q);
      if (!round_out.empty()) sdl::save_matrix(round_out, sdl::DenseMatrix(res.q));
      return kExitOk;
    }

    if (*phase) {
      cfg.base_seed = effective_seed(cfg.base_seed);
      cfg.trm = phase_flags.options(0);
      cfg.validate();
      std::ofstream out;
      open_output(out, phase_out);
      const auto grid = sdl::run_phase_sweep(cfg);
      sdl::write_phase_csv(out, grid, !phase_no_timestamp);
      if (!out) throw sdl::IoError("failed writing " + phase_out);
      const std::string map = sdl::render_heatmap(grid);
      std::cout << map;
      if (!phase_heatmap.empty()) {
        std::ofstream hm;
        open_output(hm, phase_heatmap);
        hm << map;
      }
      return kExitOk;
    }
  } catch (const sdl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const sdl::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const sdl::InvalidInput& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sdl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}
