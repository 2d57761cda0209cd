#include "bwretrieve/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bwretrieve/error.hpp"

namespace bwretrieve {

using nlohmann::json;

const char* to_string(InitKind kind) {
  return kind == InitKind::Spectral ? "spectral" : "random";
}

const char* to_string(Method method) {
  switch (method) {
    case Method::Bwgd: return "bwgd";
    case Method::Loss: return "loss";
    case Method::Quantile: return "quantile";
    case Method::Oracle: return "oracle";
  }
  return "unknown";
}

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::InvalidConfiguration, msg);
}

const char* to_string(SpectralWeighting w) {
  return w == SpectralWeighting::Exponential ? "exponential" : "squared";
}

const char* to_string(SpectralSpace s) { return s == SpectralSpace::Whitened ? "whitened" : "raw"; }

}  // namespace

InitKind parse_init(const std::string& text) {
  if (text == "spectral") return InitKind::Spectral;
  if (text == "random") return InitKind::Random;
  config_error("unknown init kind '" + text + "' (expected spectral or random)");
}

Method parse_method(const std::string& text) {
  if (text == "bwgd") return Method::Bwgd;
  if (text == "loss") return Method::Loss;
  if (text == "quantile") return Method::Quantile;
  if (text == "oracle") return Method::Oracle;
  config_error("unknown method '" + text + "' (expected bwgd, loss, quantile or oracle)");
}

std::vector<Method> parse_methods(const std::string& comma_separated) {
  std::vector<Method> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) config_error("empty method list");
  return out;
}

void HarnessConfig::validate() const {
  if (d < 1) config_error("d must be at least 1");
  if (n <= d) config_error("n must exceed d");
  if (trials < 1) config_error("trials must be at least 1");
  if (n_grid.empty()) config_error("n_grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] <= d) config_error("every n_grid entry must exceed d");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) config_error("n_grid must be strictly increasing");
  }
  if (methods.empty()) config_error("methods must not be empty");
  if (threads < 0) config_error("threads must be nonnegative");
  if (stop.cap < 0 || stop.patience < 1 || !(stop.err_tol >= 0) || !(stop.rel_tol >= 0)) {
    config_error("invalid stopping parameters");
  }
  for (Method m : methods) schedule_for(m).validate();
}

SmoothingSchedule HarnessConfig::schedule_for(Method method) const {
  SmoothingSchedule s;
  s.epsilon0 = epsilon0;
  s.epsilon_min = epsilon_min;
  switch (method) {
    case Method::Bwgd: s.kind = FixedSmoothing{0.0}; break;
    case Method::Loss: s.kind = LossHeuristic{c_loss}; break;
    case Method::Quantile: s.kind = QuantileHeuristic{gamma}; break;
    case Method::Oracle: s.kind = OracleSmoothing{}; break;
  }
  return s;
}

void HarnessConfig::apply_desk_preset() {
  const double factor = 50.0 / static_cast<double>(d);
  auto scale = [factor](int v) { return static_cast<int>(std::lround(v * factor)); };
  d = 50;
  n = scale(n);
  for (int& v : n_grid) v = scale(v);
}

json to_json(const HarnessConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  return json{
      {"d", c.d},
      {"n", c.n},
      {"n_grid", c.n_grid},
      {"trials", c.trials},
      {"master_seed", c.master_seed},
      {"init", to_string(c.init)},
      {"methods", methods},
      {"schedule.epsilon0", c.epsilon0},
      {"schedule.epsilon_min", c.epsilon_min},
      {"schedule.gamma", c.gamma},
      {"schedule.c_loss", c.c_loss},
      {"stop.err_tol", c.stop.err_tol},
      {"stop.rel_tol", c.stop.rel_tol},
      {"stop.patience", c.stop.patience},
      {"stop.cap", c.stop.cap},
      {"spectral.weighting", to_string(c.spectral_weighting)},
      {"spectral.space", to_string(c.spectral_space)},
      {"paper_compat_unwhiten", c.paper_compat_unwhiten},
      {"threads", c.threads},
      {"output", c.output},
      {"verify.gradient_fault", c.verify_gradient_fault},
  };
}

HarnessConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  static const std::set<std::string> known = [] {
    std::set<std::string> keys;
    const json defaults = to_json(HarnessConfig{});
    for (const auto& [k, v] : defaults.items()) keys.insert(k);
    return keys;
  }();
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) config_error("unknown config key '" + k + "'");
  }

  HarnessConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("d", c.d);
    get("n", c.n);
    get("n_grid", c.n_grid);
    get("trials", c.trials);
    get("master_seed", c.master_seed);
    if (j.contains("init")) c.init = parse_init(j.at("init").get<std::string>());
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    get("schedule.epsilon0", c.epsilon0);
    get("schedule.epsilon_min", c.epsilon_min);
    get("schedule.gamma", c.gamma);
    get("schedule.c_loss", c.c_loss);
    get("stop.err_tol", c.stop.err_tol);
    get("stop.rel_tol", c.stop.rel_tol);
    get("stop.patience", c.stop.patience);
    get("stop.cap", c.stop.cap);
    if (j.contains("spectral.weighting")) {
      const auto w = j.at("spectral.weighting").get<std::string>();
      if (w == "exponential") c.spectral_weighting = SpectralWeighting::Exponential;
      else if (w == "squared") c.spectral_weighting = SpectralWeighting::Squared;
      else config_error("spectral.weighting must be exponential or squared");
    }
    if (j.contains("spectral.space")) {
      const auto s = j.at("spectral.space").get<std::string>();
      if (s == "whitened") c.spectral_space = SpectralSpace::Whitened;
      else if (s == "raw") c.spectral_space = SpectralSpace::Raw;
      else config_error("spectral.space must be whitened or raw");
    }
    get("paper_compat_unwhiten", c.paper_compat_unwhiten);
    get("threads", c.threads);
    get("output", c.output);
    get("verify.gradient_fault", c.verify_gradient_fault);
  } catch (const json::exception& e) {
    config_error(std::string("malformed config value: ") + e.what());
  }
  return c;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot read config file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    config_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json schedule_to_json(const SmoothingSchedule& s) {
  json j{{"schedule.kind", s.kind_name()},
         {"schedule.epsilon0", s.epsilon0},
         {"schedule.epsilon_min", s.epsilon_min}};
  if (const auto* f = std::get_if<FixedSmoothing>(&s.kind)) j["schedule.epsilon"] = f->epsilon;
  if (const auto* l = std::get_if<LossHeuristic>(&s.kind)) j["schedule.c_loss"] = l->c_loss;
  if (const auto* q = std::get_if<QuantileHeuristic>(&s.kind)) j["schedule.gamma"] = q->gamma;
  return j;
}

SmoothingSchedule schedule_from_json(const json& j) {
  SmoothingSchedule s;
  try {
    const auto kind = j.at("schedule.kind").get<std::string>();
    if (kind == "fixed") s.kind = FixedSmoothing{j.value("schedule.epsilon", 0.0)};
    else if (kind == "oracle") s.kind = OracleSmoothing{};
    else if (kind == "loss") s.kind = LossHeuristic{j.value("schedule.c_loss", 2.0)};
    else if (kind == "quantile") s.kind = QuantileHeuristic{j.value("schedule.gamma", 0.25)};
    else config_error("unknown schedule.kind '" + kind + "'");
    s.epsilon0 = j.value("schedule.epsilon0", 1.0);
    s.epsilon_min = j.value("schedule.epsilon_min", 0.0);
  } catch (const json::exception& e) {
    config_error(std::string("malformed schedule: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace bwretrieve
