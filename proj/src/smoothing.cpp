#include "bwretrieve/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bwretrieve/error.hpp"

namespace bwretrieve {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void SmoothingSchedule::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfiguration, msg); };
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) fail("schedule.epsilon0 must be positive");
  if (!(epsilon_min >= 0.0)) fail("schedule.epsilon_min must be nonnegative");
  if (epsilon0 < epsilon_min) fail("schedule.epsilon0 must be at least schedule.epsilon_min");
  std::visit(Overloaded{
                 [&](const FixedSmoothing& f) {
                   if (!(f.epsilon >= 0.0) || !std::isfinite(f.epsilon))
                     fail("fixed smoothing must be finite and nonnegative");
                 },
                 [](const OracleSmoothing&) {},
                 [&](const LossHeuristic& l) {
                   if (!(l.c_loss > 0.0)) fail("schedule.c_loss must be positive");
                 },
                 [&](const QuantileHeuristic& q) {
                   if (!(q.gamma > 0.0 && q.gamma < 1.0)) fail("schedule.gamma must lie in (0, 1)");
                 },
             },
             kind);
}

double SmoothingSchedule::initial() const {
  if (const auto* f = std::get_if<FixedSmoothing>(&kind)) return std::max(f->epsilon, epsilon_min);
  return epsilon0;
}

std::string SmoothingSchedule::kind_name() const {
  return std::visit(Overloaded{
                        [](const FixedSmoothing&) { return std::string("fixed"); },
                        [](const OracleSmoothing&) { return std::string("oracle"); },
                        [](const LossHeuristic&) { return std::string("loss"); },
                        [](const QuantileHeuristic&) { return std::string("quantile"); },
                    },
                    kind);
}

double quantile(std::span<const double> values, double gamma) {
  if (values.empty()) throw Error(ErrorKind::InvalidInput, "quantile of an empty list");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "quantile level must lie in (0, 1)");
  }
  const auto n = values.size();
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(gamma * static_cast<double>(n))));
  std::vector<double> work(values.begin(), values.end());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k - 1), work.end());
  return work[k - 1];
}

double next_epsilon(const SmoothingSchedule& schedule, double prev_epsilon,
                    const SmoothingInputs& in) {
  const double candidate = std::visit(
      Overloaded{
          [](const FixedSmoothing& f) { return f.epsilon; },
          [&](const OracleSmoothing&) {
            if (!in.dist_to_truth || !in.signal_norm || !(*in.signal_norm > 0.0)) {
              throw Error(ErrorKind::MissingOracle,
                          "oracle smoothing needs the distance to the ground truth");
            }
            return std::min(prev_epsilon, 2.0 * std::sqrt(*in.dist_to_truth / *in.signal_norm));
          },
          [&](const LossHeuristic& l) {
            return std::min(prev_epsilon, l.c_loss * std::pow(std::max(in.loss, 0.0), 0.25));
          },
          [&](const QuantileHeuristic& q) {
            return std::min(prev_epsilon, quantile(in.residuals_sq, q.gamma));
          },
      },
      schedule.kind);
  // NaN candidates (non-finite loss) keep the previous value.
  if (std::isnan(candidate)) return std::max(prev_epsilon, schedule.epsilon_min);
  return std::max(candidate, schedule.epsilon_min);
}

}  // namespace bwretrieve
