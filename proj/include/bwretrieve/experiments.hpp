#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwretrieve/config.hpp"
#include "bwretrieve/sensing.hpp"
#include "bwretrieve/solver.hpp"
#include "bwretrieve/verify.hpp"

namespace bwretrieve {

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  int n = 0;
  Method method = Method::Bwgd;
  InitKind init = InitKind::Spectral;
  /// Error below err_tol within the cap. Implies final_error < err_tol.
  bool success = false;
  std::int64_t iterations = 0;
  double final_error = 0.0;
  double final_epsilon = 0.0;
  std::int64_t degenerate_count = 0;
  TerminalStatus status = TerminalStatus::MaxIters;
};

/// One synthetic problem: whitened ensemble, measurements of the constant
/// unit signal, and the initial point in whitened space.
struct Problem {
  SensingEnsemble ensemble;
  Measurements y;
  Vector init;
};

/// Per-trial seed derived from (master_seed, trial).
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

/// Builds the problem for trial seed `seed` at sample size n. Independent of
/// every other trial.
Problem make_problem(const HarnessConfig& config, int n, std::uint64_t seed);

RunOptions run_options(const HarnessConfig& config, bool ignore_error_tolerance = false);

/// Runs `count` tasks on at most `threads` workers (0 = hardware
/// concurrency). Tasks are claimed in index order; `task(i)` must only touch
/// state owned by index i.
void parallel_for(int count, int threads, const std::function<void(int)>& task);

struct TraceResult {
  Method method;
  ConvergenceTrace trace;
};

/// One run per configured method on a shared problem (trial 0, config.n).
std::vector<TraceResult> run_traces(const HarnessConfig& config);

/// All (n, trial, method) runs of the sweep, ordered by n, then trial, then
/// the configured method order.
std::vector<TrialResult> run_sweep(const HarnessConfig& config);

struct SuccessRow {
  int n;
  Method method;
  int trials;
  int successes;
  double success_rate;
  std::optional<double> mean_iterations_successful;
};

struct IterationRow {
  int n;
  Method method;
  int trials;
  int successes;
  std::optional<double> mean_iterations;
  std::optional<double> median_iterations;
};

std::vector<SuccessRow> success_table(const HarnessConfig& config,
                                      const std::vector<TrialResult>& results);
std::vector<IterationRow> iteration_table(const HarnessConfig& config,
                                          const std::vector<TrialResult>& results);

struct HeatmapRow {
  Method method;
  int n;
  std::int64_t iter;
  double log10_geomean_error;
};

/// Errors per iteration, padded with the last value up to cap+1 entries and
/// floored at 1e-16, averaged in log10 over trials.
std::vector<HeatmapRow> run_heatmap(const HarnessConfig& config);

inline constexpr double kHeatmapFloor = 1e-16;

// --- Commands: write CSVs (plus a .meta.json sidecar) under `out` ---------

struct CommandOptions {
  std::filesystem::path out = "out";
  bool deterministic = false;
  std::optional<std::string> suite;
  bool desk = false;
};

/// Returns the written CSV path.
std::filesystem::path cmd_trace(const HarnessConfig& config, const CommandOptions& options);
std::filesystem::path cmd_sweep_success(const HarnessConfig& config,
                                        const CommandOptions& options);
std::filesystem::path cmd_sweep_iterations(const HarnessConfig& config,
                                           const CommandOptions& options);
std::filesystem::path cmd_heatmap(const HarnessConfig& config, const CommandOptions& options);

struct VerifyOutcome {
  std::filesystem::path report;
  std::vector<verify::CheckResult> checks;
  bool all_passed;
};

/// Throws InvalidConfiguration for an unknown suite name.
VerifyOutcome cmd_verify(const HarnessConfig& config, const CommandOptions& options);

}  // namespace bwretrieve
