#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bwretrieve/objective.hpp"
#include "bwretrieve/rng.hpp"
#include "bwretrieve/sensing.hpp"
#include "bwretrieve/solver.hpp"
#include "bwretrieve/types.hpp"

namespace bwretrieve::verify {

// --- Independent oracles -------------------------------------------------

/// Central-difference gradient of smoothed_loss.
Vector fd_gradient(const ObjectiveContext& ctx, const Vector& u, double h);

/// Max over coordinates of |fd_k − g_k| / ‖g‖_∞ with g = smoothed_grad.
/// `perturbation` is added to every analytic component (fault injection).
double fd_gradient_check(const ObjectiveContext& ctx, const Vector& u, double h,
                         double perturbation = 0.0);

/// Central differences of smoothed_grad, symmetrized.
Matrix fd_hessian(const ObjectiveContext& ctx, const Vector& u, double h);

/// Max entrywise |H_fd − H| against smoothed_hessian.
double fd_hessian_check(const ObjectiveContext& ctx, const Vector& u, double h);

/// max{c ∈ values : |{b ≤ c}|/n ≤ γ} by a full scan; the smallest value when
/// no candidate qualifies.
double brute_force_quantile(std::span<const double> values, double gamma);

struct SymmetricWhitening {
  Matrix whitened;   // C^{-1/2} a_i as columns
  Matrix root;       // C^{1/2}
};

/// ã_i = C^{-1/2} a_i through a full eigendecomposition.
SymmetricWhitening symmetric_whitening(const SensingEnsemble& ensemble);

// --- Structural checks ---------------------------------------------------

struct SpectrumReport {
  double epsilon;
  double delta;
  double lambda_min;
  double lambda_max;
  double bound_smooth;       // 1 + ε
  double bound_convex_far;   // 1/32 − 2ε
  double bound_convex_near;  // 1 − 2ε
  double tol;
  bool pass;
};

/// Samples `samples` points uniformly on the sphere of radius δ‖u⋆‖ around
/// Lᵀu⋆ and reports the extreme eigenvalues of the smoothed Hessian with
/// ε = 2√δ (or `epsilon` when given). pass: λ_max ≤ (1+ε)(1+tol) and
/// λ_min ≥ (1/32 − 2ε) − tol. Requires ‖u⋆‖ = 1.
std::vector<SpectrumReport> hessian_spectrum_check(const SensingEnsemble& ensemble,
                                                   const Measurements& y, const Vector& u_star,
                                                   double delta, std::optional<double> epsilon,
                                                   int samples, std::uint64_t seed,
                                                   double tol = 0.05);

struct ContractionReport {
  /// Iterations t with error_t < local_radius·‖u⋆‖ that have a successor.
  int local_iterations = 0;
  /// Of those, how many violate error_{t+1}² ≤ 2 error_t^{5/2}.
  int violations = 0;
  std::vector<std::int64_t> violating_iters;
  double violation_fraction = 0.0;
  /// Increases of the error after it first drops below monotone_radius·‖u⋆‖.
  int monotonicity_violations = 0;
};

ContractionReport contraction_check(const ConvergenceTrace& trace, double signal_norm = 1.0,
                                    double local_radius = 1e-2, double monotone_radius = 0.1);

struct GoodSubsetReport {
  Index removed;
  double min_retained_normalized;
  double lambda_min;
  bool pass;  // lambda_min ≥ 1/32
};

/// Removes the ⌊τ n⌋ vectors least aligned with u (by |ã_iᵀu|/‖ã_i‖) and
/// reports the smallest eigenvalue of (1/n) Σ_retained ã_i ã_iᵀ.
GoodSubsetReport good_subset_check(const SensingEnsemble& ensemble, const Vector& u, double tau);

// --- Suites ---------------------------------------------------------------

struct CheckResult {
  std::string suite;
  std::string check;
  std::string params;
  double measured;
  double bound;
  bool pass;
};

struct SuiteOptions {
  std::uint64_t seed = 20250101;
  /// Added to every analytic gradient component in the fd suite.
  double gradient_fault = 0.0;
  /// Smaller instances for quick runs.
  bool desk = false;
};

using SuiteFn = std::function<std::vector<CheckResult>(const SuiteOptions&)>;

struct Suite {
  std::string name;
  std::string description;
  SuiteFn run;
};

/// All suites in their canonical order: newton, identity-hessian, fd,
/// stationarity, quantile, spectrum, good-subset, contraction.
const std::vector<Suite>& suites();

std::vector<CheckResult> suite_newton(const SuiteOptions&);
std::vector<CheckResult> suite_identity_hessian(const SuiteOptions&);
std::vector<CheckResult> suite_fd(const SuiteOptions&);
std::vector<CheckResult> suite_stationarity(const SuiteOptions&);
std::vector<CheckResult> suite_quantile(const SuiteOptions&);
std::vector<CheckResult> suite_spectrum(const SuiteOptions&);
std::vector<CheckResult> suite_good_subset(const SuiteOptions&);
std::vector<CheckResult> suite_contraction(const SuiteOptions&);

// --- Instance helpers shared by suites, tests and acceptance --------------

struct Instance {
  SensingEnsemble ensemble;  // whitened
  Measurements y;
  Vector u_star;
};

/// Gaussian ensemble, whitened, with measurements of a random unit signal.
Instance random_instance(Index d, Index n, std::uint64_t seed);

/// Random u whose normalized inner products |ã_iᵀu|/(‖ã_i‖‖u‖) all exceed
/// `min_normalized` (rejection sampling).
Vector random_nondegenerate_point(const Matrix& vectors, double min_normalized, Engine& engine);

}  // namespace bwretrieve::verify
