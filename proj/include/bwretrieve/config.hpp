#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwretrieve/smoothing.hpp"
#include "bwretrieve/solver.hpp"

namespace bwretrieve {

enum class InitKind { Spectral, Random };
enum class Method { Bwgd, Loss, Quantile, Oracle };

const char* to_string(InitKind kind);
const char* to_string(Method method);
InitKind parse_init(const std::string& text);
Method parse_method(const std::string& text);
std::vector<Method> parse_methods(const std::string& comma_separated);

/// Experiment description. Serialized as a flat JSON object whose keys are
/// the dotted names used in to_json(); unknown keys are rejected.
struct HarnessConfig {
  int d = 200;
  int n = 650;
  std::vector<int> n_grid = {450, 500, 550, 600, 650};
  int trials = 100;
  std::uint64_t master_seed = 1;
  InitKind init = InitKind::Spectral;
  std::vector<Method> methods = {Method::Bwgd, Method::Loss, Method::Quantile};

  double epsilon0 = 1.0;
  double epsilon_min = 0.0;
  double gamma = 0.25;
  double c_loss = 2.0;

  StoppingRule stop{};

  SpectralWeighting spectral_weighting = SpectralWeighting::Exponential;
  SpectralSpace spectral_space = SpectralSpace::Whitened;

  bool paper_compat_unwhiten = false;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;
  std::string output = "out";
  double verify_gradient_fault = 0.0;

  /// Throws InvalidConfiguration.
  void validate() const;

  /// Schedule used by a method under this config.
  SmoothingSchedule schedule_for(Method method) const;

  /// Scales d to 50 and every sample size by the same factor.
  void apply_desk_preset();
};

nlohmann::json to_json(const HarnessConfig& config);
HarnessConfig config_from_json(const nlohmann::json& json);
HarnessConfig load_config(const std::filesystem::path& path);

nlohmann::json schedule_to_json(const SmoothingSchedule& schedule);
SmoothingSchedule schedule_from_json(const nlohmann::json& json);

}  // namespace bwretrieve
