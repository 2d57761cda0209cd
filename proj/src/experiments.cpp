#include "bwretrieve/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "bwretrieve/csv.hpp"
#include "bwretrieve/error.hpp"
#include "bwretrieve/rng.hpp"

namespace bwretrieve {

using nlohmann::json;

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(trial)});
}

Problem make_problem(const HarnessConfig& config, int n, std::uint64_t seed) {
  const auto n64 = static_cast<std::uint64_t>(n);
  auto ensemble = whiten(generate_ensemble(
      config.d, n, derive_seed(seed, {n64, static_cast<std::uint64_t>(Stream::Ensemble)})));
  auto y = synthesize_measurements(ensemble, constant_unit_signal(config.d));
  Vector init;
  if (config.init == InitKind::Spectral) {
    SpectralOptions opts;
    opts.weighting = config.spectral_weighting;
    opts.space = config.spectral_space;
    opts.eigen.seed = derive_seed(seed, {n64, static_cast<std::uint64_t>(Stream::Init)});
    init = spectral_init(ensemble, y, opts);
  } else {
    init = random_init(ensemble, y,
                       derive_seed(seed, {n64, static_cast<std::uint64_t>(Stream::Init)}));
  }
  return {std::move(ensemble), std::move(y), std::move(init)};
}

RunOptions run_options(const HarnessConfig& config, bool ignore_error_tolerance) {
  RunOptions o;
  o.paper_compat_unwhiten = config.paper_compat_unwhiten;
  o.ignore_error_tolerance = ignore_error_tolerance;
  return o;
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<TraceResult> run_traces(const HarnessConfig& config) {
  config.validate();
  const Problem p = make_problem(config, config.n, trial_seed(config.master_seed, 0));
  std::vector<TraceResult> out(config.methods.size());
  parallel_for(static_cast<int>(config.methods.size()), config.threads, [&](int i) {
    const Method m = config.methods[i];
    out[i] = {m, run(p.ensemble, p.y, p.init, config.schedule_for(m), config.stop,
                     run_options(config))};
  });
  return out;
}

namespace {

TrialResult summarize(const ConvergenceTrace& trace, const HarnessConfig& config, int trial,
                      std::uint64_t seed, int n, Method method) {
  TrialResult r;
  r.trial = trial;
  r.seed = seed;
  r.n = n;
  r.method = method;
  r.init = config.init;
  r.iterations = trace.iterations();
  r.final_error = trace.final_error();
  r.final_epsilon = trace.records.empty() ? 0.0 : trace.records.back().epsilon;
  r.degenerate_count = trace.degenerate_count;
  r.status = trace.status;
  r.success = r.final_error < config.stop.err_tol && r.iterations <= config.stop.cap;
  return r;
}

}  // namespace

std::vector<TrialResult> run_sweep(const HarnessConfig& config) {
  config.validate();
  const int grid = static_cast<int>(config.n_grid.size());
  const int methods = static_cast<int>(config.methods.size());
  std::vector<TrialResult> results(static_cast<std::size_t>(grid) * config.trials * methods);
  parallel_for(grid * config.trials, config.threads, [&](int unit) {
    const int gi = unit / config.trials;
    const int trial = unit % config.trials;
    const int n = config.n_grid[gi];
    const auto seed = trial_seed(config.master_seed, trial);
    const Problem p = make_problem(config, n, seed);
    for (int mi = 0; mi < methods; ++mi) {
      const Method m = config.methods[mi];
      const auto trace =
          run(p.ensemble, p.y, p.init, config.schedule_for(m), config.stop, run_options(config));
      results[static_cast<std::size_t>(unit) * methods + mi] =
          summarize(trace, config, trial, seed, n, m);
    }
  });
  return results;
}

namespace {

std::vector<const TrialResult*> select(const std::vector<TrialResult>& results, int n, Method m) {
  std::vector<const TrialResult*> out;
  for (const auto& r : results) {
    if (r.n == n && r.method == m) out.push_back(&r);
  }
  return out;
}

std::vector<double> successful_iterations(const std::vector<const TrialResult*>& rows) {
  std::vector<double> its;
  for (const auto* r : rows) {
    if (r->success) its.push_back(static_cast<double>(r->iterations));
  }
  return its;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace

std::vector<SuccessRow> success_table(const HarnessConfig& config,
                                      const std::vector<TrialResult>& results) {
  std::vector<SuccessRow> rows;
  for (int n : config.n_grid) {
    for (Method m : config.methods) {
      const auto sel = select(results, n, m);
      const auto its = successful_iterations(sel);
      SuccessRow row{n, m, static_cast<int>(sel.size()), static_cast<int>(its.size()), 0.0, {}};
      row.success_rate = sel.empty() ? 0.0 : static_cast<double>(its.size()) / sel.size();
      if (!its.empty()) row.mean_iterations_successful = mean(its);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<IterationRow> iteration_table(const HarnessConfig& config,
                                          const std::vector<TrialResult>& results) {
  std::vector<IterationRow> rows;
  for (int n : config.n_grid) {
    for (Method m : config.methods) {
      const auto sel = select(results, n, m);
      const auto its = successful_iterations(sel);
      IterationRow row{n, m, static_cast<int>(sel.size()), static_cast<int>(its.size()), {}, {}};
      if (!its.empty()) {
        row.mean_iterations = mean(its);
        row.median_iterations = median(its);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<HeatmapRow> run_heatmap(const HarnessConfig& config) {
  config.validate();
  const int grid = static_cast<int>(config.n_grid.size());
  const int methods = static_cast<int>(config.methods.size());
  const auto len = static_cast<std::size_t>(config.stop.cap + 1);
  // log10 errors per (grid, trial, method), each of length cap+1.
  std::vector<std::vector<double>> logs(static_cast<std::size_t>(grid) * config.trials * methods);
  parallel_for(grid * config.trials, config.threads, [&](int unit) {
    const int n = config.n_grid[unit / config.trials];
    const Problem p = make_problem(config, n, trial_seed(config.master_seed, unit % config.trials));
    for (int mi = 0; mi < methods; ++mi) {
      const auto trace = run(p.ensemble, p.y, p.init, config.schedule_for(config.methods[mi]),
                             config.stop, run_options(config, true));
      std::vector<double> series(len);
      double last = trace.records.front().error;
      for (std::size_t t = 0; t < len; ++t) {
        if (t < trace.records.size()) last = trace.records[t].error;
        double e = std::isfinite(last) ? last : std::numeric_limits<double>::max();
        series[t] = std::log10(std::max(e, kHeatmapFloor));
      }
      logs[static_cast<std::size_t>(unit) * methods + mi] = std::move(series);
    }
  });

  std::vector<HeatmapRow> rows;
  rows.reserve(static_cast<std::size_t>(methods) * grid * len);
  for (int mi = 0; mi < methods; ++mi) {
    for (int gi = 0; gi < grid; ++gi) {
      std::vector<double> acc(len, 0.0);
      for (int trial = 0; trial < config.trials; ++trial) {
        const auto& s = logs[(static_cast<std::size_t>(gi) * config.trials + trial) * methods + mi];
        for (std::size_t t = 0; t < len; ++t) acc[t] += s[t];
      }
      for (std::size_t t = 0; t < len; ++t) {
        rows.push_back({config.methods[mi], config.n_grid[gi], static_cast<std::int64_t>(t),
                        acc[t] / config.trials});
      }
    }
  }
  return rows;
}

namespace {

void write_meta(const std::filesystem::path& csv, const std::string& command,
                const HarnessConfig& config, const CommandOptions& options) {
  // Worker count and output location do not change any result.
  json experiment = to_json(config);
  experiment.erase("threads");
  experiment.erase("output");
  json meta{{"command", command},
            {"config", experiment},
            {"cap", config.stop.cap},
            {"desk", options.desk}};
  if (!options.deterministic) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta["timestamp"] = buf;
  }
  auto path = csv;
  path += ".meta.json";
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os << meta.dump(2) << '\n';
}

std::string str(std::int64_t v) { return std::to_string(v); }

void write_trials(const std::filesystem::path& path, const std::vector<TrialResult>& results) {
  CsvWriter w(path, {"trial", "seed", "n", "method", "init", "success", "iterations",
                     "final_error", "final_epsilon", "degenerate_count", "status"});
  for (const auto& r : results) {
    w.row({str(r.trial), std::to_string(r.seed), str(r.n), to_string(r.method),
           to_string(r.init), r.success ? "1" : "0", str(r.iterations),
           format_double(r.final_error), format_double(r.final_epsilon),
           str(r.degenerate_count), to_string(r.status)});
  }
  w.close();
}

}  // namespace

std::filesystem::path cmd_trace(const HarnessConfig& config, const CommandOptions& options) {
  const auto traces = run_traces(config);
  const auto path = options.out / "trace.csv";
  CsvWriter w(path, {"method", "iter", "error", "log10_error", "loss", "epsilon", "step_size"});
  for (const auto& [method, trace] : traces) {
    for (const auto& r : trace.records) {
      w.row({to_string(method), str(r.iter), format_double(r.error),
             format_double(std::log10(r.error)), format_double(r.loss), format_double(r.epsilon),
             format_double(r.step_size)});
    }
  }
  w.close();
  write_meta(path, "trace", config, options);
  return path;
}

std::filesystem::path cmd_sweep_success(const HarnessConfig& config,
                                        const CommandOptions& options) {
  const auto results = run_sweep(config);
  const auto path = options.out / "sweep_success.csv";
  CsvWriter w(path, {"n", "method", "init", "trials", "successes", "success_rate",
                     "mean_iterations_successful"});
  for (const auto& r : success_table(config, results)) {
    w.row({str(r.n), to_string(r.method), to_string(config.init), str(r.trials),
           str(r.successes), format_double(r.success_rate),
           format_optional(r.mean_iterations_successful)});
  }
  w.close();
  write_meta(path, "sweep-success", config, options);
  write_trials(options.out / "sweep_success_trials.csv", results);
  return path;
}

std::filesystem::path cmd_sweep_iterations(const HarnessConfig& config,
                                           const CommandOptions& options) {
  const auto results = run_sweep(config);
  const auto path = options.out / "sweep_iters.csv";
  CsvWriter w(path, {"n", "method", "init", "trials", "successes", "mean_iterations",
                     "median_iterations"});
  for (const auto& r : iteration_table(config, results)) {
    w.row({str(r.n), to_string(r.method), to_string(config.init), str(r.trials),
           str(r.successes), format_optional(r.mean_iterations),
           format_optional(r.median_iterations)});
  }
  w.close();
  write_meta(path, "sweep-iters", config, options);
  write_trials(options.out / "sweep_iters_trials.csv", results);
  return path;
}

std::filesystem::path cmd_heatmap(const HarnessConfig& config, const CommandOptions& options) {
  const auto rows = run_heatmap(config);
  const auto path = options.out / "heatmap.csv";
  CsvWriter w(path, {"method", "init", "n", "iter", "log10_geomean_error"});
  for (const auto& r : rows) {
    w.row({to_string(r.method), to_string(config.init), str(r.n), str(r.iter),
           format_double(r.log10_geomean_error)});
  }
  w.close();
  write_meta(path, "heatmap", config, options);
  return path;
}

VerifyOutcome cmd_verify(const HarnessConfig& config, const CommandOptions& options) {
  const auto& all = verify::suites();
  if (options.suite) {
    const bool known = std::any_of(all.begin(), all.end(),
                                   [&](const verify::Suite& s) { return s.name == *options.suite; });
    if (!known) {
      throw Error(ErrorKind::InvalidConfiguration, "unknown suite '" + *options.suite + "'");
    }
  }
  verify::SuiteOptions so;
  so.seed = derive_seed(config.master_seed, {static_cast<std::uint64_t>(Stream::Verify)});
  so.gradient_fault = config.verify_gradient_fault;
  so.desk = options.desk;

  VerifyOutcome outcome{options.out / "verify.csv", {}, true};
  for (const auto& suite : all) {
    if (options.suite && suite.name != *options.suite) continue;
    for (auto& c : suite.run(so)) outcome.checks.push_back(std::move(c));
  }
  CsvWriter w(outcome.report, {"suite", "check", "params", "measured", "bound", "pass"});
  for (const auto& c : outcome.checks) {
    w.row({c.suite, c.check, c.params, format_double(c.measured), format_double(c.bound),
           c.pass ? "1" : "0"});
    outcome.all_passed = outcome.all_passed && c.pass;
  }
  w.close();
  write_meta(outcome.report, "verify", config, options);
  return outcome;
}

}  // namespace bwretrieve
