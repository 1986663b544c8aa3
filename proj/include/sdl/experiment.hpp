#pragma once

// Phase-transition sweeps for single-vector recovery with A0 = I and
// fixed-sparsity coefficients. Every trial is seeded from (base seed, cell,
// trial index) only, so results do not depend on execution order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdl/trm.hpp"
#include "sdl/types.hpp"

namespace sdl {

enum class SampleRule { Fixed, FiveN2LogN };

struct ExperimentConfig {
  // 1: p = ceil(5 n^2 log n), grid over (n, k).
  // 2: k = ceil(0.2 n), grid over (n, p).
  int setting = 1;
  std::vector<Index> n_values{5, 10, 15, 20, 25, 30};
  std::vector<Index> k_values{1, 2, 3, 4, 5, 6, 8, 10, 12};
  std::vector<Index> p_values{100, 250, 500, 1000, 2000, 4000};
  double mu = 0.01;
  int trials = 5;
  std::uint64_t base_seed = 0;
  TrmOptions<double> trm{};
  int jobs = 1;

  SampleRule sample_rule() const { return setting == 1 ? SampleRule::FiveN2LogN : SampleRule::Fixed; }
  const std::vector<Index>& column_values() const { return setting == 1 ? k_values : p_values; }
  void validate() const;
};

struct TrialRecord {
  Index n = 0;
  Index k_or_p = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double re = 0.0;
  double f_final = 0.0;
  int iters = 0;
  bool success = false;
  std::string status;
};

struct PhaseGrid {
  std::vector<Index> n_values;
  std::vector<Index> column_values;  // k (setting 1) or p (setting 2)
  int setting = 1;
  int trials = 0;
  std::vector<int> successes;        // row-major over (n, column); -1 for skipped cells
  std::vector<TrialRecord> records;  // ordered by cell, then trial

  int at(std::size_t row, std::size_t col) const { return successes[row * column_values.size() + col]; }
};

// One trial: instance with A0 = I and k nonzeros per column, a TRM solve
// from a random start, and RE <= mu as the success rule.
TrialRecord run_trial(Index n, Index k, Index p, double mu, std::uint64_t seed,
                      const TrmOptions<double>& trm);

std::uint64_t trial_seed(std::uint64_t base, int setting, Index n, Index k_or_p, int trial);

PhaseGrid run_phase_sweep(const ExperimentConfig& cfg);

// Header row then one row per trial. The optional first line is a comment
// carrying the generation time.
void write_phase_csv(std::ostream& out, const PhaseGrid& grid, bool timestamp);

// Plain-text grid, one character per cell by success-fraction quintile.
std::string render_heatmap(const PhaseGrid& grid);

}  // namespace sdl
