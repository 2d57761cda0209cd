#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bwretrieve/config.hpp"
#include "bwretrieve/csv.hpp"
#include "bwretrieve/error.hpp"
#include "bwretrieve/experiments.hpp"

using namespace bwretrieve;
namespace fs = std::filesystem;

namespace {

HarnessConfig small() {
  HarnessConfig c;
  c.d = 10;
  c.n = 60;
  c.n_grid = {30, 60};
  c.trials = 4;
  c.master_seed = 5;
  c.stop.cap = 300;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bwretrieve_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config round trip") {
    HarnessConfig c = small();
    c.methods = {Method::Oracle, Method::Quantile};
    c.init = InitKind::Random;
    c.spectral_space = SpectralSpace::Raw;
    c.paper_compat_unwhiten = true;
    const auto j = to_json(c);
    CHECK(to_json(config_from_json(j)) == j);
    CHECK(j.contains("stop.cap"));
    CHECK(j.contains("schedule.gamma"));
  }

  TEST_CASE("unknown and malformed keys are rejected") {
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"d", "ten"}}), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"methods", {"gd"}}}), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), Error);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
  }

  TEST_CASE("validation") {
    HarnessConfig c = small();
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small();
    c.n_grid = {60, 30};
    CHECK_THROWS_AS(c.validate(), Error);
    c = small();
    c.n_grid = {10};
    CHECK_THROWS_AS(c.validate(), Error);
    c = small();
    c.gamma = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_NOTHROW(small().validate());
  }

  TEST_CASE("schedule serialization") {
    for (const ScheduleKind& k : {ScheduleKind{FixedSmoothing{0.2}}, ScheduleKind{OracleSmoothing{}},
                                  ScheduleKind{LossHeuristic{3.0}}, ScheduleKind{QuantileHeuristic{0.4}}}) {
      const SmoothingSchedule s{k, 0.5, 1e-16};
      CHECK(schedule_to_json(schedule_from_json(schedule_to_json(s))) == schedule_to_json(s));
    }
  }

  TEST_CASE("desk preset scales the grid") {
    HarnessConfig c;
    c.apply_desk_preset();
    CHECK(c.d == 50);
    CHECK(c.n_grid == std::vector<int>{113, 125, 138, 150, 163});
    CHECK(c.n == 163);
  }

  TEST_CASE("methods list parsing") {
    CHECK(parse_methods("bwgd,quantile") == std::vector<Method>{Method::Bwgd, Method::Quantile});
    CHECK_THROWS_AS(parse_methods(""), Error);
    CHECK_THROWS_AS(parse_methods("bwgd,newton"), Error);
  }

  TEST_CASE("parallel_for covers every index once and rethrows") {
    std::vector<int> hits(100, 0);
    parallel_for(100, 4, [&](int i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_AS(parallel_for(10, 3, [](int i) { if (i == 7) throw std::runtime_error("x"); }),
                    std::runtime_error);
  }

  TEST_CASE("trial results do not depend on the number of trials or threads") {
    HarnessConfig c = small();
    c.threads = 1;
    const auto a = run_sweep(c);
    c.trials = 2;
    c.threads = 3;
    const auto b = run_sweep(c);
    for (const auto& rb : b) {
      const auto it = std::find_if(a.begin(), a.end(), [&](const TrialResult& ra) {
        return ra.n == rb.n && ra.trial == rb.trial && ra.method == rb.method;
      });
      REQUIRE(it != a.end());
      CHECK(it->final_error == rb.final_error);
      CHECK(it->iterations == rb.iterations);
      CHECK(it->seed == rb.seed);
    }
  }

  TEST_CASE("success implies error below tolerance") {
    HarnessConfig c = small();
    for (const auto& r : run_sweep(c)) {
      if (r.success) CHECK(r.final_error < c.stop.err_tol);
    }
  }

  TEST_CASE("trace CSV on a shared problem") {
    HarnessConfig c = small();
    c.n = 200;
    const auto dir = scratch("trace");
    const auto path = cmd_trace(c, {dir, true, {}, false});
    const auto t = read_csv(path);
    CHECK(t.header == std::vector<std::string>{"method", "iter", "error", "log10_error", "loss", "epsilon", "step_size"});
    // Every method starts from the same initial error.
    std::string first_error;
    for (const auto& row : t.rows) {
      if (row[1] != "0") continue;
      if (first_error.empty()) first_error = row[2];
      CHECK(row[2] == first_error);
    }
    CHECK(fs::exists(dir / "trace.csv.meta.json"));
  }

  TEST_CASE("cap zero trace") {
    HarnessConfig c = small();
    c.stop.cap = 0;
    c.methods = {Method::Quantile};
    const auto traces = run_traces(c);
    CHECK(traces[0].trace.records.size() == 1);
    CHECK(traces[0].trace.status == TerminalStatus::MaxIters);
  }

  TEST_CASE("sweep tables") {
    HarnessConfig c = small();
    c.n_grid = {11, 200};
    c.trials = 6;
    const auto results = run_sweep(c);
    const auto succ = success_table(c, results);
    REQUIRE(succ.size() == 6);
    for (const auto& r : succ) {
      if (r.n == 11) CHECK(r.success_rate <= 0.2);
      if (r.n == 200) CHECK(r.success_rate == 1.0);
    }
    const auto its = iteration_table(c, results);
    for (const auto& r : its) {
      CHECK(r.mean_iterations.has_value() == (r.successes > 0));
      CHECK(r.median_iterations.has_value() == (r.successes > 0));
    }
  }

  TEST_CASE("zero successes leave the statistics empty") {
    HarnessConfig c = small();
    c.stop.cap = 1;
    c.n_grid = {11};
    c.methods = {Method::Bwgd};
    const auto dir = scratch("iters");
    const auto t = read_csv(cmd_sweep_iterations(c, {dir, true, {}, false}));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][t.column("successes")] == "0");
    CHECK(t.rows[0][t.column("mean_iterations")].empty());
    CHECK(t.rows[0][t.column("median_iterations")].empty());
  }

  TEST_CASE("heatmap rows") {
    HarnessConfig c = small();
    c.stop.cap = 40;
    c.trials = 3;
    const auto dir = scratch("heatmap");
    const auto t = read_csv(cmd_heatmap(c, {dir, true, {}, false}));
    CHECK(t.header == std::vector<std::string>{"method", "init", "n", "iter", "log10_geomean_error"});
    CHECK(t.rows.size() == c.methods.size() * c.n_grid.size() * 41);
    for (const auto& row : t.rows) CHECK(std::stod(row[4]) >= -16.0);
  }

  TEST_CASE("deterministic outputs are byte identical") {
    HarnessConfig c = small();
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    cmd_sweep_success(c, {a, true, {}, false});
    cmd_sweep_success(c, {b, true, {}, false});
    CHECK(slurp(a / "sweep_success.csv") == slurp(b / "sweep_success.csv"));
    CHECK(slurp(a / "sweep_success.csv.meta.json") == slurp(b / "sweep_success.csv.meta.json"));
    CHECK(slurp(a / "sweep_success.csv.meta.json").find("timestamp") == std::string::npos);
    cmd_sweep_success(c, {b, false, {}, false});
    CHECK(slurp(b / "sweep_success.csv.meta.json").find("timestamp") != std::string::npos);
  }

  TEST_CASE("verify filter and unknown suite") {
    HarnessConfig c = small();
    const auto dir = scratch("verify");
    const auto q = cmd_verify(c, {dir, true, std::string("quantile"), true});
    CHECK(q.all_passed);
    CHECK(std::all_of(q.checks.begin(), q.checks.end(), [](const auto& x) { return x.suite == "quantile"; }));
    CHECK_THROWS_AS(cmd_verify(c, {dir, true, std::string("nope"), true}), Error);
  }

  TEST_CASE("csv formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_optional(std::nullopt).empty());
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS_AS(CsvWriter("/proc/forbidden/x.csv", {"a"}), Error);
  }
}
