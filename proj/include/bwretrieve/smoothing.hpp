#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>

namespace bwretrieve {

struct FixedSmoothing {
  double epsilon = 0.0;
};

/// ε_t = 2 √(‖u_t − u⋆‖ / ‖u⋆‖); needs the ground truth.
struct OracleSmoothing {};

/// ε_t = c · F(u_t)^{1/4}.
struct LossHeuristic {
  double c_loss = 2.0;
};

/// ε_t = q_γ of the squared residuals.
struct QuantileHeuristic {
  double gamma = 0.25;
};

using ScheduleKind =
    std::variant<FixedSmoothing, OracleSmoothing, LossHeuristic, QuantileHeuristic>;

/// Policy for the smoothing sequence. Every adaptive rule is combined with
/// min(ε_{t−1}, ·) and clamped below at epsilon_min, so the emitted sequence
/// is nonincreasing.
struct SmoothingSchedule {
  ScheduleKind kind = QuantileHeuristic{};
  double epsilon0 = 1.0;
  double epsilon_min = 0.0;

  /// Throws InvalidConfiguration on out-of-range parameters.
  void validate() const;

  /// ε in effect before the first update: the fixed value for Fixed,
  /// epsilon0 otherwise.
  double initial() const;

  std::string kind_name() const;
};

/// γ-quantile at an attained order statistic: with b(1) ≤ … ≤ b(n) sorted,
/// returns b(k) for k = max(1, ⌊γ n⌋). Throws InvalidInput on empty input.
double quantile(std::span<const double> values, double gamma);

struct SmoothingInputs {
  /// Unsmoothed loss F(u_t) (loss heuristic).
  double loss = 0.0;
  /// Squared residuals (quantile heuristic).
  std::span<const double> residuals_sq;
  /// ‖u_t − u⋆‖ and ‖u⋆‖ (oracle).
  std::optional<double> dist_to_truth;
  std::optional<double> signal_norm;
};

/// One schedule update. Oracle without dist/signal norm throws MissingOracle.
double next_epsilon(const SmoothingSchedule& schedule, double prev_epsilon,
                    const SmoothingInputs& inputs);

}  // namespace bwretrieve
