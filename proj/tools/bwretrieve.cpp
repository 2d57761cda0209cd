#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bwretrieve/config.hpp"
#include "bwretrieve/error.hpp"
#include "bwretrieve/experiments.hpp"

using namespace bwretrieve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Args {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool desk = false;
  bool deterministic = false;
  std::optional<std::string> methods;
  std::optional<std::string> suite;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config_path, "JSON config file (flat dotted keys)");
  cmd->add_option("--seed", args.seed, "Override master_seed");
  cmd->add_option("--out", args.out, "Output directory");
  cmd->add_flag("--desk", args.desk, "Scale the experiment down to d=50");
  cmd->add_flag("--deterministic", args.deterministic, "Omit timestamps from outputs");
  cmd->add_option("--methods", args.methods, "Comma-separated subset of bwgd,loss,quantile,oracle");
  cmd->add_option("--suite", args.suite, "Run a single verification suite");
}

HarnessConfig resolve(const Args& args) {
  HarnessConfig config = args.config_path.empty() ? HarnessConfig{} : load_config(args.config_path);
  if (args.desk) config.apply_desk_preset();
  if (args.seed) config.master_seed = *args.seed;
  if (args.methods) config.methods = parse_methods(*args.methods);
  if (args.out) config.output = *args.out;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval by Bures-Wasserstein gradient descent with dynamic smoothing"};
  app.require_subcommand(1);
  Args args;
  auto* trace = app.add_subcommand("trace", "Error trace per method on one shared problem");
  auto* success = app.add_subcommand("sweep-success", "Success rate over the n grid");
  auto* iters = app.add_subcommand("sweep-iters", "Iterations to convergence over the n grid");
  auto* heatmap = app.add_subcommand("heatmap", "Geometric-mean error per iteration and n");
  auto* verify = app.add_subcommand("verify", "Run the verification suites");
  for (auto* cmd : {trace, success, iters, heatmap, verify}) add_common(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const HarnessConfig config = resolve(args);
    CommandOptions options;
    options.out = config.output;
    options.deterministic = args.deterministic;
    options.suite = args.suite;
    options.desk = args.desk;

    if (trace->parsed()) {
      std::cout << cmd_trace(config, options).string() << '\n';
    } else if (success->parsed()) {
      std::cout << cmd_sweep_success(config, options).string() << '\n';
    } else if (iters->parsed()) {
      std::cout << cmd_sweep_iterations(config, options).string() << '\n';
    } else if (heatmap->parsed()) {
      std::cout << cmd_heatmap(config, options).string() << '\n';
    } else {
      const auto outcome = cmd_verify(config, options);
      int failed = 0;
      for (const auto& c : outcome.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << '/' << c.check << " ["
                  << c.params << "] measured=" << c.measured << " bound=" << c.bound << '\n';
        failed += !c.pass;
      }
      std::cout << outcome.report.string() << ": " << outcome.checks.size() - failed << '/'
                << outcome.checks.size() << " checks passed\n";
      return outcome.all_passed ? kExitOk : kExitFailure;
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "bwretrieve: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidConfiguration ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "bwretrieve: " << e.what() << '\n';
    return kExitFailure;
  }
}
