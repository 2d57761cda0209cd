#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwretrieve/objective.hpp"
#include "bwretrieve/sensing.hpp"
#include "bwretrieve/smoothing.hpp"
#include "bwretrieve/types.hpp"
#include "bwretrieve/linalg.hpp"

namespace bwretrieve {

struct SolverState {
  Vector u;  // whitened space
  double epsilon = 0.0;
  double step_size = 1.0;
  std::int64_t iter = 0;
  std::int64_t degenerate_count = 0;

  static SolverState start(Vector u, double epsilon);
};

/// One BWGD-DS update with η = 1/(1+ε):
///   u⁺ = (1−η) u + η (1/n) Σ √(y_i²+ε‖ã_i‖²)/√((ã_iᵀu)²+ε‖ã_i‖²) ã_i ã_iᵀu.
/// O(nd). Requires ctx.epsilon() == state.epsilon.
SolverState bwgd_ds_step(const SolverState& state, const ObjectiveContext& ctx);

/// The same update written as u − η ∇F_ε(u).
Vector damped_gradient_step(const ObjectiveContext& ctx, const Vector& u);

struct NewtonStep {
  Vector u;
  std::vector<Index> degenerate;
};

/// u − ∇F(u) on the unsmoothed amplitude loss; on whitened vectors the
/// Hessian is the identity so this is the full Newton step.
NewtonStep newton_step_amplitude(const ObjectiveContext& ctx, const Vector& u);

enum class SpectralWeighting {
  /// 1/2 − exp(−y_i²/λ²), bounded weights.
  Exponential,
  /// y_i².
  Squared,
};

enum class SpectralSpace { Whitened, Raw };

struct SpectralOptions {
  SpectralWeighting weighting = SpectralWeighting::Exponential;
  SpectralSpace space = SpectralSpace::Whitened;
  linalg::TopEigenOptions eigen{};
};

/// Top eigenvector of D = (1/n) Σ w(y_i) v_i v_iᵀ over the given vectors,
/// as a unit vector. Throws InitializationError when every y_i is zero.
linalg::TopEigenpair spectral_direction(const Matrix& vectors, const Vector& y,
                                        const SpectralOptions& options = {});

/// Spectral initialization, returned in whitened space. The estimate is
/// scaled so its original-space norm is √(mean y_i²).
Vector spectral_init(const SensingEnsemble& ensemble, const Measurements& y,
                     const SpectralOptions& options = {});

/// Uniform random direction scaled to √(mean y_i²) in the original space,
/// then mapped to whitened space.
Vector random_init(const SensingEnsemble& ensemble, const Measurements& y, std::uint64_t seed);

struct StoppingRule {
  double err_tol = 1e-9;
  double rel_tol = 1e-12;
  int patience = 3;
  std::int64_t cap = 5000;
};

struct StoppingConfig {
  std::optional<double> err_tol;
  std::optional<double> rel_tol;
  std::optional<int> patience;
  std::optional<std::int64_t> cap;
};

StoppingRule stopping_rule(const StoppingConfig& config = {});

enum class TerminalStatus { Converged, MaxIters, Diverged };

const char* to_string(TerminalStatus status);

struct TraceRecord {
  std::int64_t iter;
  /// Sign-aligned original-space distance to the truth, or the relative
  /// iterate change when no truth is known.
  double error;
  /// Whitened smoothed loss at this record's ε.
  double loss;
  double epsilon;
  double step_size;
  /// Diagnostic (1+ε)/max(1/32 − 2ε, tiny); not a proven constant.
  double kappa_hat;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  TerminalStatus status = TerminalStatus::MaxIters;
  /// Converged through the relative-change test while the error was still
  /// above err_tol.
  bool stalled = false;
  std::int64_t degenerate_count = 0;
  Vector final_whitened;
  Vector estimate;  // original space

  double final_error() const { return records.empty() ? 0.0 : records.back().error; }
  std::int64_t iterations() const { return records.empty() ? 0 : records.back().iter; }
};

struct RunOptions {
  /// Map iterates back with L û = u instead of Lᵀ û = u.
  bool paper_compat_unwhiten = false;
  /// Keep iterating after err_tol is reached (the relative-change and cap
  /// rules still apply). Used by the heat-map experiment.
  bool ignore_error_tolerance = false;
};

/// Sign-aligned error min_s ‖s·û − u⋆‖.
double sign_aligned_error(const Vector& estimate, const Vector& truth);

/// Full BWGD-DS loop: per iteration, update ε, take one step, record.
ConvergenceTrace run(const SensingEnsemble& ensemble, const Measurements& y, const Vector& init,
                     const SmoothingSchedule& schedule, const StoppingRule& stop,
                     const RunOptions& options = {});

}  // namespace bwretrieve
