#include "sdl/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "sdl/errors.hpp"
#include "sdl/model.hpp"
#include "sdl/random.hpp"

namespace sdl {

void ExperimentConfig::validate() const {
  if (setting != 1 && setting != 2) {
    throw InvalidInput("experiment: setting must be 1 or 2, got " + std::to_string(setting));
  }
  if (n_values.empty()) throw InvalidInput("experiment: n range is empty");
  if (column_values().empty()) {
    throw InvalidInput(setting == 1 ? "experiment: k range is empty" : "experiment: p range is empty");
  }
  for (Index n : n_values) {
    if (n < 2) throw InvalidInput("experiment: every n must be at least 2");
  }
  for (Index v : column_values()) {
    if (v < 1) throw InvalidInput("experiment: k and p values must be positive");
  }
  if (trials < 1) throw InvalidInput("experiment: trials must be at least 1");
  if (!(mu > 0.0)) throw InvalidInput("experiment: mu must be positive");
  if (jobs < 1) throw InvalidInput("experiment: jobs must be at least 1");
  trm.validate();
}

std::uint64_t trial_seed(std::uint64_t base, int setting, Index n, Index k_or_p, int trial) {
  return derive_seed(base, setting, n, k_or_p, trial);
}

TrialRecord run_trial(Index n, Index k, Index p, double mu, std::uint64_t seed,
                      const TrmOptions<double>& trm) {
  TrialRecord rec;
  rec.n = n;
  rec.seed = seed;
  try {
    InstanceSpec spec;
    spec.n = n;
    spec.p = p;
    spec.sparsity = FixedSparsity{k};
    spec.dictionary = DictionaryKind::Identity;
    spec.seed = seed;
    const ProblemInstance inst = generate_instance(spec);
    Objective<double> obj(inst.y, mu);
    TrmOptions<double> opts = trm;
    opts.seed = derive_seed(seed, 0x51);
    const auto report = trm_solve(obj, opts);
    rec.re = re_metric(report.q_final.vector());
    rec.f_final = report.f_final;
    rec.iters = report.steps();
    rec.success = rec.re <= mu;
    rec.status = solve_status_name(report.status);
  } catch (const Error& e) {
    rec.re = std::numeric_limits<double>::quiet_NaN();
    rec.f_final = std::numeric_limits<double>::quiet_NaN();
    rec.success = false;
    rec.status = std::string("error: ") + e.what();
  }
  return rec;
}

PhaseGrid run_phase_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  PhaseGrid grid;
  grid.setting = cfg.setting;
  grid.n_values = cfg.n_values;
  grid.column_values = cfg.column_values();
  grid.trials = cfg.trials;
  const std::size_t rows = grid.n_values.size();
  const std::size_t cols = grid.column_values.size();

  struct Task {
    std::size_t cell;
    Index n, k, p, column;
    int trial;
  };
  std::vector<Task> tasks;
  grid.successes.assign(rows * cols, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    const Index n = grid.n_values[i];
    for (std::size_t j = 0; j < cols; ++j) {
      const Index v = grid.column_values[j];
      const Index k = cfg.setting == 1 ? v : static_cast<Index>(std::ceil(0.2 * double(n)));
      const Index p = cfg.setting == 1 ? five_n2_log_n(n) : v;
      if (k > n) {
        grid.successes[i * cols + j] = -1;
        continue;
      }
      for (int t = 0; t < cfg.trials; ++t) tasks.push_back({i * cols + j, n, k, p, v, t});
    }
  }

  std::vector<TrialRecord> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t idx = next++; idx < tasks.size(); idx = next++) {
      const Task& t = tasks[idx];
      const auto seed = trial_seed(cfg.base_seed, cfg.setting, t.n, t.column, t.trial);
      TrialRecord rec = run_trial(t.n, t.k, t.p, cfg.mu, seed, cfg.trm);
      rec.k_or_p = t.column;
      rec.trial = t.trial;
      results[idx] = std::move(rec);
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), tasks.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
    if (results[idx].success) ++grid.successes[tasks[idx].cell];
  }
  grid.records = std::move(results);
  return grid;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_phase_csv(std::ostream& out, const PhaseGrid& grid, bool timestamp) {
  if (timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# generated " << buf << '\n';
  }
  out << "n,k_or_p,trial,seed,RE,f_final,iters,success,status\n";
  for (const auto& r : grid.records) {
    out << r.n << ',' << r.k_or_p << ',' << r.trial << ',' << r.seed << ',' << format_double(r.re)
        << ',' << format_double(r.f_final) << ',' << r.iters << ',' << (r.success ? 1 : 0) << ','
        << csv_field(r.status) << '\n';
  }
}

std::string render_heatmap(const PhaseGrid& grid) {
  static const char levels[] = {' ', '.', ':', '*', '#'};
  std::ostringstream s;
  const char* label = grid.setting == 1 ? "k" : "p";
  s << "rows: n, columns: " << label << ", success fraction by quintile ' .:*#', '-' = not run\n";
  s << "      ";
  for (Index v : grid.column_values) s << ' ' << v;
  s << '\n';
  for (std::size_t i = 0; i < grid.n_values.size(); ++i) {
    std::string n = std::to_string(grid.n_values[i]);
    s << std::string(n.size() < 6 ? 6 - n.size() : 0, ' ') << n;
    for (std::size_t j = 0; j < grid.column_values.size(); ++j) {
      const int c = grid.at(i, j);
      const std::size_t width = std::to_string(grid.column_values[j]).size();
      char ch = '-';
      if (c >= 0) {
        const double frac = double(c) / double(grid.trials);
        ch = levels[std::min(4, static_cast<int>(frac * 5.0))];
      }
      s << std::string(width, ' ') << ch;
    }
    s << '\n';
  }
  return s.str();
}

}  // namespace sdl
