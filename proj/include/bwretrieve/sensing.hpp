#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "bwretrieve/types.hpp"

namespace bwretrieve {

/// Sensing vectors a_i (raw) and, once whitened, the vectors ã_i solving
/// L ã_i = a_i where C = (1/n) Σ a_i a_iᵀ = L Lᵀ. Vectors are stored as the
/// columns of d×n matrices. Immutable once built; share freely across threads.
class SensingEnsemble {
 public:
  SensingEnsemble() = default;

  /// Wraps caller-provided vectors (one per column). No n > d requirement, so
  /// that tiny hand-built ensembles can be used in tests.
  static SensingEnsemble from_vectors(Matrix raw, std::uint64_t seed = 0);

  Index n() const { return raw_.cols(); }
  Index d() const { return raw_.rows(); }
  std::uint64_t seed() const { return seed_; }

  const Matrix& raw() const { return raw_; }
  const Matrix& whitened() const { return whitened_; }
  const Matrix& cholesky_factor() const { return cholesky_; }
  bool is_whitened() const { return whitened_.size() != 0; }

  /// Whitened vectors if available, otherwise the raw ones.
  const Matrix& active() const { return is_whitened() ? whitened_ : raw_; }

 private:
  friend SensingEnsemble whiten(const SensingEnsemble&);

  Matrix raw_;
  Matrix whitened_;
  Matrix cholesky_;
  std::uint64_t seed_ = 0;
};

struct Measurements {
  Vector values;
  std::optional<Vector> ground_truth;
};

/// n i.i.d. standard Gaussian vectors in R^d drawn from the stream seeded by
/// `seed`. Requires n > d ≥ 1.
SensingEnsemble generate_ensemble(Index d, Index n, std::uint64_t seed);

/// (1/n) Σ a_i a_iᵀ over the raw vectors.
Matrix empirical_covariance(const SensingEnsemble& ensemble);

/// Cholesky whitening. Throws DegenerateEnsembleError when the covariance is
/// not positive definite.
SensingEnsemble whiten(const SensingEnsemble& ensemble);

/// y_i = |a_iᵀ u⋆| using the raw vectors.
Measurements synthesize_measurements(const SensingEnsemble& ensemble,
                                     const Vector& u_star);

/// Maps a whitened-space vector back to the original space by solving
/// Lᵀ û = u, so that ã_iᵀ u = a_iᵀ û.
Vector unwhiten(const Matrix& cholesky_factor, const Vector& u);

/// Literal variant solving L û = u. Only correct when L is symmetric; kept for
/// side-by-side comparison.
Vector unwhiten_literal(const Matrix& cholesky_factor, const Vector& u);

/// Whitened-space image Lᵀ u of an original-space vector.
Vector to_whitened(const Matrix& cholesky_factor, const Vector& u);

/// The all-equal unit vector 1/√d.
Vector constant_unit_signal(Index d);

/// Binary dump: three little-endian uint64 (d, n, seed) followed by the n raw
/// vectors, one after another, as little-endian float64.
void write_ensemble(const SensingEnsemble& ensemble, const std::filesystem::path& path);
SensingEnsemble read_ensemble(const std::filesystem::path& path);

}  // namespace bwretrieve
