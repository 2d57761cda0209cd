#pragma once

#include "bwretrieve/sensing.hpp"
#include "bwretrieve/types.hpp"

namespace bwretrieve {

/// Symmetric PSD matrix, validated on construction (symmetric to 1e-12,
/// smallest eigenvalue ≥ -1e-10).
class PsdMatrix {
 public:
  explicit PsdMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  Index dim() const { return entries_.rows(); }

  static PsdMatrix outer(const Vector& x);

 private:
  Matrix entries_;
};

/// Squared Bures-Wasserstein distance
///   Tr Σ0 + Tr Σ1 − 2 Tr (Σ0^{1/2} Σ1 Σ0^{1/2})^{1/2}
/// via symmetric eigendecompositions. O(d³); verification scale only.
/// Negative round-off is clamped to 0.
double bw_distance_sq(const PsdMatrix& s0, const PsdMatrix& s1);

/// Closed form for rank-one arguments: d²(xxᵀ, yyᵀ) = ‖x‖² + ‖y‖² − 2|xᵀy|.
double rank_one_bw_sq(const Vector& x, const Vector& y);

/// (1/2n) Σ d²(uuᵀ, y_i ã_i ã_iᵀ) on the whitened vectors.
double barycenter_objective(const Vector& u, const SensingEnsemble& ensemble,
                            const Measurements& y);

/// (1/2n) Σ (|ã_iᵀu| − √y_i)², the square-root loss the barycenter reduces to
/// under whitening (up to an additive constant).
double sqrt_loss(const Vector& u, const SensingEnsemble& ensemble, const Measurements& y);

/// Number of times bw_distance_sq clamped a negative value below −1e-8.
long long bw_clamp_events();

}  // namespace bwretrieve
