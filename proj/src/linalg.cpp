#include "bwretrieve/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>

#include "bwretrieve/error.hpp"
#include "bwretrieve/rng.hpp"

namespace bwretrieve {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfiguration: return "invalid-configuration";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateEnsemble: return "degenerate-ensemble";
    case ErrorKind::SingularFactor: return "singular-factor";
    case ErrorKind::MissingOracle: return "missing-oracle";
    case ErrorKind::InitializationFailure: return "initialization-failure";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

DegenerateEnsembleError::DegenerateEnsembleError(std::ptrdiff_t pivot,
                                                 double value)
    : Error(ErrorKind::DegenerateEnsemble,
            "empirical covariance is not positive definite: Cholesky pivot " +
                std::to_string(pivot) + " is " + std::to_string(value)),
      pivot_(pivot),
      value_(value) {}

namespace linalg {

Matrix cholesky_lower(const Matrix& spd) {
  const Index d = spd.rows();
  if (spd.cols() != d) {
    throw Error(ErrorKind::InvalidInput, "cholesky_lower: matrix is not square");
  }
  double scale = 0.0;
  for (Index j = 0; j < d; ++j) scale = std::max(scale, std::abs(spd(j, j)));
  const double floor =
      static_cast<double>(d) * std::numeric_limits<double>::epsilon() * scale;

  Matrix lower = Matrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    const double pivot = spd(j, j) - lower.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) throw DegenerateEnsembleError(j, pivot);
    const double ljj = std::sqrt(pivot);
    lower(j, j) = ljj;
    for (Index i = j + 1; i < d; ++i) {
      const double dot = lower.row(i).head(j).dot(lower.row(j).head(j));
      lower(i, j) = (spd(i, j) - dot) / ljj;
    }
  }
  return lower;
}

Matrix forward_substitute(const Matrix& lower, const Matrix& rhs) {
  return lower.triangularView<Eigen::Lower>().solve(rhs);
}

namespace {

void require_nonsingular(const Matrix& lower) {
  for (Index j = 0; j < lower.rows(); ++j) {
    if (lower(j, j) == 0.0 || !std::isfinite(lower(j, j))) {
      throw Error(ErrorKind::SingularFactor,
                  "triangular factor has zero diagonal entry at " +
                      std::to_string(j));
    }
  }
}

}  // namespace

Vector back_substitute_transpose(const Matrix& lower, const Vector& rhs) {
  if (lower.rows() != rhs.size() || lower.cols() != rhs.size()) {
    throw Error(ErrorKind::InvalidInput, "back_substitute_transpose: dimension mismatch");
  }
  require_nonsingular(lower);
  return lower.transpose().triangularView<Eigen::Upper>().solve(rhs);
}

Vector forward_substitute(const Matrix& lower, const Vector& rhs) {
  if (lower.rows() != rhs.size() || lower.cols() != rhs.size()) {
    throw Error(ErrorKind::InvalidInput, "forward_substitute: dimension mismatch");
  }
  require_nonsingular(lower);
  return lower.triangularView<Eigen::Lower>().solve(rhs);
}

Matrix symmetric_sqrt(const Matrix& psd) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(psd);
  Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

Matrix symmetric_inverse_sqrt(const Matrix& spd) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(spd);
  const Vector& lambda = es.eigenvalues();
  for (Index j = 0; j < lambda.size(); ++j) {
    if (!(lambda(j) > 0.0)) throw DegenerateEnsembleError(j, lambda(j));
  }
  Vector inv_roots = lambda.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_roots.asDiagonal() *
         es.eigenvectors().transpose();
}

ExtremeEigenvalues extreme_eigenvalues(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  const Vector& lambda = es.eigenvalues();
  return {lambda(0), lambda(lambda.size() - 1)};
}

namespace {

TopEigenpair dense_top(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric);
  const Index last = symmetric.rows() - 1;
  Vector v = es.eigenvectors().col(last);
  const double lambda = es.eigenvalues()(last);
  const double residual = (symmetric * v - lambda * v).norm();
  return {lambda, std::move(v), 0, residual};
}

TopEigenpair power_top(const Matrix& symmetric, const TopEigenOptions& opt) {
  const Index d = symmetric.rows();
  // Gershgorin bound on the spectral radius; shifting by it makes the matrix
  // PSD so the dominant eigenvalue is the largest algebraic one.
  double shift = 0.0;
  for (Index i = 0; i < d; ++i) shift = std::max(shift, symmetric.row(i).cwiseAbs().sum());

  Engine engine = make_engine(opt.seed);
  std::normal_distribution<double> normal;
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = normal(engine);
  v.normalize();

  double lambda = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Vector w = symmetric * v;
    lambda = v.dot(w);
    residual = (w - lambda * v).norm();
    if (residual <= opt.tolerance * std::max(1.0, std::abs(lambda))) {
      return {lambda, std::move(v), it, residual};
    }
    w += shift * v;
    const double norm = w.norm();
    if (norm == 0.0 || !std::isfinite(norm)) break;
    v = w / norm;
  }
  throw InitializationError(
      "power iteration did not converge (residual " + std::to_string(residual) + ")",
      residual);
}

}  // namespace

TopEigenpair top_eigenpair(const Matrix& symmetric, const TopEigenOptions& options) {
  if (symmetric.rows() == 0 || symmetric.rows() != symmetric.cols()) {
    throw Error(ErrorKind::InvalidInput, "top_eigenpair: matrix must be square and nonempty");
  }
  const bool dense =
      options.method == EigenMethod::Dense ||
      (options.method == EigenMethod::Auto && symmetric.rows() <= options.dense_limit);
  return dense ? dense_top(symmetric) : power_top(symmetric, options);
}

}  // namespace linalg
}  // namespace bwretrieve
