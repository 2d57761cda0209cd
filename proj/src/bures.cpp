#include "bwretrieve/bures.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

#include <Eigen/SVD>

#include "bwretrieve/error.hpp"
#include "bwretrieve/linalg.hpp"

namespace bwretrieve {

namespace {
std::atomic<long long> clamp_events{0};
}

PsdMatrix::PsdMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw Error(ErrorKind::InvalidInput, "PsdMatrix must be square");
  }
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, entries_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::InvalidInput, "PsdMatrix is not symmetric");
  }
  if (entries_.rows() > 0 && linalg::extreme_eigenvalues(entries_).min < -1e-10) {
    throw Error(ErrorKind::InvalidInput, "PsdMatrix has a negative eigenvalue");
  }
}

PsdMatrix PsdMatrix::outer(const Vector& x) { return PsdMatrix(x * x.transpose()); }

double bw_distance_sq(const PsdMatrix& s0, const PsdMatrix& s1) {
  if (s0.dim() != s1.dim()) {
    throw Error(ErrorKind::InvalidInput, "bw_distance_sq: dimension mismatch");
  }
  // tr((S0^½ S1 S0^½)^½) is the nuclear norm of S1^½ S0^½. Noise in the
  // roots along null directions only enters the singular values at second
  // order, which keeps rank-deficient inputs accurate.
  const Matrix product = linalg::symmetric_sqrt(s1.entries()) * linalg::symmetric_sqrt(s0.entries());
  const double cross = Eigen::JacobiSVD<Matrix>(product).singularValues().sum();
  const double value = s0.entries().trace() + s1.entries().trace() - 2.0 * cross;
  if (value < 0.0) {
    if (value < -1e-8) {
      clamp_events.fetch_add(1, std::memory_order_relaxed);
      std::fprintf(stderr, "bw_distance_sq: clamped %.3e to 0\n", value);
    }
    return 0.0;
  }
  return value;
}

double rank_one_bw_sq(const Vector& x, const Vector& y) {
  return std::max(0.0, x.squaredNorm() + y.squaredNorm() - 2.0 * std::abs(x.dot(y)));
}

namespace {

void require_whitened(const SensingEnsemble& ensemble, const Measurements& y) {
  if (!ensemble.is_whitened()) {
    throw Error(ErrorKind::InvalidInput, "ensemble must be whitened");
  }
  if (y.values.size() != ensemble.n()) {
    throw Error(ErrorKind::InvalidInput, "measurement count does not match ensemble");
  }
}

}  // namespace

double barycenter_objective(const Vector& u, const SensingEnsemble& ensemble,
                            const Measurements& y) {
  require_whitened(ensemble, y);
  const Matrix& a = ensemble.whitened();
  const double u_sq = u.squaredNorm();
  double sum = 0.0;
  for (Index i = 0; i < a.cols(); ++i) {
    // d²(uuᵀ, (√y ã)(√y ã)ᵀ) with the rank-one closed form.
    const double yi = y.values(i);
    const double proj = std::abs(a.col(i).dot(u));
    sum += std::max(0.0, u_sq + yi * a.col(i).squaredNorm() - 2.0 * std::sqrt(yi) * proj);
  }
  return sum / (2.0 * static_cast<double>(a.cols()));
}

double sqrt_loss(const Vector& u, const SensingEnsemble& ensemble, const Measurements& y) {
  require_whitened(ensemble, y);
  const Vector proj = (ensemble.whitened().transpose() * u).cwiseAbs();
  const Vector diff = proj - y.values.cwiseSqrt();
  return diff.squaredNorm() / (2.0 * static_cast<double>(diff.size()));
}

long long bw_clamp_events() { return clamp_events.load(); }

}  // namespace bwretrieve
