#pragma once

#include <cstdint>

#include "bwretrieve/types.hpp"

namespace bwretrieve::linalg {

/// Lower Cholesky factor of a symmetric positive definite matrix.
/// Throws DegenerateEnsembleError naming the first pivot that is not
/// numerically positive.
Matrix cholesky_lower(const Matrix& spd);

/// Solves L X = B column by column (forward substitution).
Matrix forward_substitute(const Matrix& lower, const Matrix& rhs);

/// Solves L^T x = b (back substitution against the transpose).
/// Throws SingularFactor on a zero diagonal entry.
Vector back_substitute_transpose(const Matrix& lower, const Vector& rhs);

/// Solves L x = b; used only for the literal-unwhitening comparison path.
Vector forward_substitute(const Matrix& lower, const Vector& rhs);

/// Principal square root of a symmetric PSD matrix via eigendecomposition.
/// Eigenvalues are floored at zero.
Matrix symmetric_sqrt(const Matrix& psd);

/// Inverse principal square root of a symmetric positive definite matrix.
Matrix symmetric_inverse_sqrt(const Matrix& spd);

struct ExtremeEigenvalues {
  double min;
  double max;
};

ExtremeEigenvalues extreme_eigenvalues(const Matrix& symmetric);

enum class EigenMethod { Auto, PowerIteration, Dense };

struct TopEigenOptions {
  EigenMethod method = EigenMethod::Auto;
  double tolerance = 1e-10;
  int max_iterations = 5000;
  /// Auto uses the dense solver up to this dimension.
  Index dense_limit = 512;
  std::uint64_t seed = 0;
};

struct TopEigenpair {
  double value;
  Vector vector;  // unit norm
  int iterations;
  double residual;
};

/// Eigenpair for the largest algebraic eigenvalue of a symmetric matrix.
/// Power iteration runs on a spectrum-shifted copy so that the largest
/// algebraic eigenvalue dominates; on non-convergence an
/// InitializationError carrying the final residual is thrown.
TopEigenpair top_eigenpair(const Matrix& symmetric,
                           const TopEigenOptions& options = {});

}  // namespace bwretrieve::linalg
