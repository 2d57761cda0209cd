#include "bwretrieve/solver.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "bwretrieve/error.hpp"
#include "bwretrieve/rng.hpp"

namespace bwretrieve {

SolverState SolverState::start(Vector u, double epsilon) {
  SolverState s;
  s.u = std::move(u);
  s.epsilon = epsilon;
  s.step_size = 1.0 / (1.0 + epsilon);
  return s;
}

namespace {

// Shared body of the step; z = ãᵀu must already be computed.
SolverState step_with_projections(const SolverState& state, const ObjectiveContext& ctx,
                                  const Vector& z) {
  const double eps = ctx.epsilon();
  const Vector& y = ctx.y();
  const Vector& s = ctx.norms_sq();
  const double u_norm = state.u.norm();
  Vector coeff(ctx.n());
  std::int64_t degenerate = 0;
  for (Index i = 0; i < ctx.n(); ++i) {
    if (eps > 0.0) {
      coeff(i) = std::sqrt(y(i) * y(i) + eps * s(i)) / std::sqrt(z(i) * z(i) + eps * s(i)) * z(i);
    } else if (std::abs(z(i)) <= kDegeneracyFloor * std::sqrt(s(i)) * u_norm) {
      coeff(i) = 0.0;
      ++degenerate;
    } else {
      coeff(i) = z(i) > 0.0 ? y(i) : -y(i);
    }
  }
  const double eta = 1.0 / (1.0 + eps);
  SolverState next;
  next.u = (1.0 - eta) * state.u + (eta / static_cast<double>(ctx.n())) * (ctx.vectors() * coeff);
  next.epsilon = eps;
  next.step_size = eta;
  next.iter = state.iter + 1;
  next.degenerate_count = state.degenerate_count + degenerate;
  return next;
}

void require_same_epsilon(const SolverState& state, const ObjectiveContext& ctx) {
  if (state.epsilon != ctx.epsilon()) {
    throw Error(ErrorKind::InvalidInput, "solver state and objective context disagree on epsilon");
  }
  if (state.u.size() != ctx.d()) {
    throw Error(ErrorKind::InvalidInput, "iterate dimension does not match the sensing vectors");
  }
}

}  // namespace

SolverState bwgd_ds_step(const SolverState& state, const ObjectiveContext& ctx) {
  require_same_epsilon(state, ctx);
  const Vector z = ctx.vectors().transpose() * state.u;
  return step_with_projections(state, ctx, z);
}

Vector damped_gradient_step(const ObjectiveContext& ctx, const Vector& u) {
  return u - (1.0 / (1.0 + ctx.epsilon())) * smoothed_grad(ctx, u).gradient;
}

NewtonStep newton_step_amplitude(const ObjectiveContext& ctx, const Vector& u) {
  GradientResult g = amplitude_grad(ctx, u);
  return {u - g.gradient, std::move(g.degenerate)};
}

linalg::TopEigenpair spectral_direction(const Matrix& vectors, const Vector& y,
                                        const SpectralOptions& options) {
  if (y.size() != vectors.cols()) {
    throw Error(ErrorKind::InvalidInput, "measurement count does not match sensing vectors");
  }
  const double mean_sq = y.squaredNorm() / static_cast<double>(y.size());
  if (!(mean_sq > 0.0)) {
    throw InitializationError("spectral initialization: all measurements are zero", 0.0);
  }
  Vector w(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const double y2 = y(i) * y(i);
    w(i) = options.weighting == SpectralWeighting::Exponential ? 0.5 - std::exp(-y2 / mean_sq) : y2;
  }
  Matrix D = vectors * w.asDiagonal() * vectors.transpose();
  D *= 1.0 / static_cast<double>(y.size());
  D = 0.5 * (D + D.transpose());
  return linalg::top_eigenpair(D, options.eigen);
}

Vector spectral_init(const SensingEnsemble& ensemble, const Measurements& y,
                     const SpectralOptions& options) {
  if (!ensemble.is_whitened()) {
    throw Error(ErrorKind::InvalidInput, "spectral_init needs a whitened ensemble");
  }
  const double scale = std::sqrt(y.values.squaredNorm() / static_cast<double>(y.values.size()));
  const Matrix& L = ensemble.cholesky_factor();
  if (options.space == SpectralSpace::Raw) {
    const auto top = spectral_direction(ensemble.raw(), y.values, options);
    return to_whitened(L, scale * top.vector);
  }
  const auto top = spectral_direction(ensemble.whitened(), y.values, options);
  const double raw_norm = unwhiten(L, top.vector).norm();
  return (scale / raw_norm) * top.vector;
}

Vector random_init(const SensingEnsemble& ensemble, const Measurements& y, std::uint64_t seed) {
  if (!ensemble.is_whitened()) {
    throw Error(ErrorKind::InvalidInput, "random_init needs a whitened ensemble");
  }
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal;
  Vector dir(ensemble.d());
  do {
    for (Index k = 0; k < dir.size(); ++k) dir(k) = normal(engine);
  } while (dir.norm() == 0.0);
  const double scale = std::sqrt(y.values.squaredNorm() / static_cast<double>(y.values.size()));
  return to_whitened(ensemble.cholesky_factor(), (scale / dir.norm()) * dir);
}

StoppingRule stopping_rule(const StoppingConfig& config) {
  StoppingRule rule;
  if (config.err_tol) rule.err_tol = *config.err_tol;
  if (config.rel_tol) rule.rel_tol = *config.rel_tol;
  if (config.patience) rule.patience = *config.patience;
  if (config.cap) rule.cap = *config.cap;
  if (rule.cap < 0 || rule.patience < 1 || !(rule.err_tol >= 0.0) || !(rule.rel_tol >= 0.0)) {
    throw Error(ErrorKind::InvalidConfiguration, "invalid stopping rule parameters");
  }
  return rule;
}

const char* to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::Converged: return "converged";
    case TerminalStatus::MaxIters: return "max-iters";
    case TerminalStatus::Diverged: return "diverged";
  }
  return "unknown";
}

double sign_aligned_error(const Vector& estimate, const Vector& truth) {
  return std::min((estimate - truth).norm(), (estimate + truth).norm());
}

namespace {

double kappa_hat(double eps) {
  return (1.0 + eps) / std::max(1.0 / 32.0 - 2.0 * eps, 1e-12);
}

double smoothed_loss_from(const ObjectiveContext& ctx, const Vector& z) {
  const double eps = ctx.epsilon();
  const Vector& y = ctx.y();
  const Vector& s = ctx.norms_sq();
  double sum = 0.0;
  for (Index i = 0; i < ctx.n(); ++i) {
    const double diff = eps == 0.0 ? std::abs(z(i)) - y(i)
                                   : std::sqrt(z(i) * z(i) + eps * s(i)) -
                                         std::sqrt(y(i) * y(i) + eps * s(i));
    sum += diff * diff;
  }
  return 0.5 * sum / static_cast<double>(ctx.n());
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

ConvergenceTrace run(const SensingEnsemble& ensemble, const Measurements& y, const Vector& init,
                     const SmoothingSchedule& schedule, const StoppingRule& stop,
                     const RunOptions& options) {
  schedule.validate();
  const ObjectiveContext base = ObjectiveContext::whitened(ensemble, y, 0.0);
  if (init.size() != ensemble.d()) {
    throw Error(ErrorKind::InvalidInput, "initial point has the wrong dimension");
  }
  const Matrix& L = ensemble.cholesky_factor();
  const std::optional<Vector>& truth = y.ground_truth;
  const double signal_norm = truth ? truth->norm() : 0.0;

  auto to_original = [&](const Vector& u) {
    return options.paper_compat_unwhiten ? unwhiten_literal(L, u) : unwhiten(L, u);
  };
  auto relative_change = [](const Vector& next, const Vector& prev) {
    return (next - prev).norm() / std::max(prev.norm(), std::numeric_limits<double>::min());
  };

  ConvergenceTrace trace;
  SolverState state = SolverState::start(init, schedule.initial());
  Vector z = base.vectors().transpose() * state.u;
  Vector estimate = to_original(state.u);

  auto finish = [&](TerminalStatus status) {
    trace.status = status;
    trace.degenerate_count = state.degenerate_count;
    trace.final_whitened = state.u;
    trace.estimate = estimate;
    return trace;
  };

  double error = truth ? sign_aligned_error(estimate, *truth)
                       : std::numeric_limits<double>::infinity();
  const double initial_loss = smoothed_loss_from(base, z);
  trace.records.push_back({0, error, smoothed_loss_from(base.with_epsilon(state.epsilon), z),
                           state.epsilon, state.step_size, kappa_hat(state.epsilon)});
  if (!all_finite(state.u)) return finish(TerminalStatus::Diverged);
  if (truth && !options.ignore_error_tolerance && error < stop.err_tol) {
    return finish(TerminalStatus::Converged);
  }

  double prev_eps = state.epsilon;
  int still = 0;
  std::vector<double> residuals;
  const bool wants_residuals = std::holds_alternative<QuantileHeuristic>(schedule.kind);
  const bool wants_oracle = std::holds_alternative<OracleSmoothing>(schedule.kind);

  for (std::int64_t t = 0; t < stop.cap; ++t) {
    SmoothingInputs inputs;
    inputs.loss = smoothed_loss_from(base, z);
    if (wants_residuals) {
      residuals.resize(static_cast<std::size_t>(z.size()));
      for (Index i = 0; i < z.size(); ++i) {
        const double r = std::abs(z(i)) - y.values(i);
        residuals[static_cast<std::size_t>(i)] = r * r;
      }
      inputs.residuals_sq = residuals;
    }
    if (truth) {
      inputs.dist_to_truth = sign_aligned_error(estimate, *truth);
      inputs.signal_norm = signal_norm;
    } else if (wants_oracle) {
      throw Error(ErrorKind::MissingOracle, "oracle smoothing requires ground truth");
    }
    const double eps = next_epsilon(schedule, prev_eps, inputs);
    prev_eps = eps;

    state.epsilon = eps;
    const ObjectiveContext ctx = base.with_epsilon(eps);
    SolverState next = step_with_projections(state, ctx, z);
    if (!all_finite(next.u)) {
      state.degenerate_count = next.degenerate_count;
      return finish(TerminalStatus::Diverged);
    }
    const double change = relative_change(next.u, state.u);
    state = std::move(next);
    z.noalias() = base.vectors().transpose() * state.u;
    estimate = to_original(state.u);
    error = truth ? sign_aligned_error(estimate, *truth) : change;

    const double loss_here = smoothed_loss_from(ctx, z);
    trace.records.push_back({state.iter, error, loss_here, eps, state.step_size, kappa_hat(eps)});

    const double amplitude = smoothed_loss_from(base, z);
    if (!std::isfinite(amplitude) || !std::isfinite(error) ||
        (initial_loss > 0.0 && amplitude > 1e6 * initial_loss)) {
      return finish(TerminalStatus::Diverged);
    }
    if (truth && !options.ignore_error_tolerance && error < stop.err_tol) {
      return finish(TerminalStatus::Converged);
    }
    still = change < stop.rel_tol ? still + 1 : 0;
    if (still >= stop.patience) {
      trace.stalled = truth && error >= stop.err_tol;
      return finish(TerminalStatus::Converged);
    }
  }
  return finish(TerminalStatus::MaxIters);
}

}  // namespace bwretrieve
