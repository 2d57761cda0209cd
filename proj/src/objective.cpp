#include "bwretrieve/objective.hpp"

#include <cmath>

#include "bwretrieve/error.hpp"

namespace bwretrieve {

ObjectiveContext::ObjectiveContext(const Matrix& vectors, const Vector& y, double epsilon)
    : ObjectiveContext(&vectors, &y,
                       std::make_shared<const Vector>(vectors.colwise().squaredNorm().transpose()),
                       epsilon) {
  if (y.size() != vectors.cols()) {
    throw Error(ErrorKind::InvalidInput,
                "measurement count " + std::to_string(y.size()) + " does not match " +
                    std::to_string(vectors.cols()) + " sensing vectors");
  }
}

ObjectiveContext::ObjectiveContext(const Matrix* vectors, const Vector* y,
                                   std::shared_ptr<const Vector> norms_sq, double epsilon)
    : vectors_(vectors), y_(y), norms_sq_(std::move(norms_sq)), epsilon_(epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::InvalidInput, "smoothing parameter must be finite and nonnegative");
  }
}

ObjectiveContext ObjectiveContext::whitened(const SensingEnsemble& ensemble,
                                            const Measurements& y, double epsilon) {
  if (!ensemble.is_whitened()) {
    throw Error(ErrorKind::InvalidInput, "ensemble has not been whitened");
  }
  return ObjectiveContext(ensemble.whitened(), y.values, epsilon);
}

ObjectiveContext ObjectiveContext::raw(const SensingEnsemble& ensemble, const Measurements& y,
                                       double epsilon) {
  return ObjectiveContext(ensemble.raw(), y.values, epsilon);
}

ObjectiveContext ObjectiveContext::with_epsilon(double epsilon) const {
  return ObjectiveContext(vectors_, y_, norms_sq_, epsilon);
}

namespace {

void check_dim(const ObjectiveContext& ctx, const Vector& u) {
  if (u.size() != ctx.d()) {
    throw Error(ErrorKind::InvalidInput, "iterate dimension " + std::to_string(u.size()) +
                                             " does not match " + std::to_string(ctx.d()));
  }
}

double inv_n(const ObjectiveContext& ctx) { return 1.0 / static_cast<double>(ctx.n()); }

// Per-index coefficient c_i such that the gradient is (1/n) Σ c_i v_i.
// c_i = (1 − r_i) z_i with r_i = √(y²+εs)/√(z²+εs); at ε = 0 this is
// (|z| − y) sign(z), and sign(z) := 0 below the floor.
GradientResult gradient_from_projections(const ObjectiveContext& ctx, const Vector& u,
                                         const Vector& z) {
  const double eps = ctx.epsilon();
  const Vector& y = ctx.y();
  const Vector& s = ctx.norms_sq();
  const double u_norm = u.norm();
  Vector coeff(ctx.n());
  GradientResult out;
  for (Index i = 0; i < ctx.n(); ++i) {
    if (eps > 0.0) {
      const double ratio = std::sqrt(y(i) * y(i) + eps * s(i)) / std::sqrt(z(i) * z(i) + eps * s(i));
      coeff(i) = (1.0 - ratio) * z(i);
    } else if (std::abs(z(i)) <= kDegeneracyFloor * std::sqrt(s(i)) * u_norm) {
      coeff(i) = 0.0;
      out.degenerate.push_back(i);
    } else {
      coeff(i) = (std::abs(z(i)) - y(i)) * (z(i) > 0.0 ? 1.0 : -1.0);
    }
  }
  out.gradient = ctx.vectors() * coeff * inv_n(ctx);
  return out;
}

}  // namespace

double amplitude_loss(const ObjectiveContext& ctx, const Vector& u) {
  check_dim(ctx, u);
  const Vector z = ctx.vectors().transpose() * u;
  return (z.cwiseAbs() - ctx.y()).squaredNorm() * 0.5 * inv_n(ctx);
}

GradientResult amplitude_grad(const ObjectiveContext& ctx, const Vector& u) {
  check_dim(ctx, u);
  const Vector z = ctx.vectors().transpose() * u;
  return gradient_from_projections(ctx.with_epsilon(0.0), u, z);
}

double smoothed_loss(const ObjectiveContext& ctx, const Vector& u) {
  check_dim(ctx, u);
  const double eps = ctx.epsilon();
  if (eps == 0.0) return amplitude_loss(ctx, u);
  const Vector z = ctx.vectors().transpose() * u;
  const Vector& y = ctx.y();
  const Vector& s = ctx.norms_sq();
  double sum = 0.0;
  for (Index i = 0; i < ctx.n(); ++i) {
    const double diff =
        std::sqrt(z(i) * z(i) + eps * s(i)) - std::sqrt(y(i) * y(i) + eps * s(i));
    sum += diff * diff;
  }
  return sum * 0.5 * inv_n(ctx);
}

double standard_perturbed_loss(const ObjectiveContext& ctx, const Vector& u) {
  check_dim(ctx, u);
  const double eps = ctx.epsilon();
  if (eps == 0.0) return amplitude_loss(ctx, u);
  const Vector z = ctx.vectors().transpose() * u;
  const Vector& y = ctx.y();
  const double scale = std::sqrt(1.0 + eps);
  double sum = 0.0;
  for (Index i = 0; i < ctx.n(); ++i) {
    const double diff = std::sqrt(z(i) * z(i) + eps * y(i) * y(i)) - y(i) * scale;
    sum += diff * diff;
  }
  return sum * 0.5 * inv_n(ctx);
}

GradientResult smoothed_grad(const ObjectiveContext& ctx, const Vector& u) {
  check_dim(ctx, u);
  const Vector z = ctx.vectors().transpose() * u;
  return gradient_from_projections(ctx, u, z);
}

Matrix smoothed_hessian(const ObjectiveContext& ctx, const Vector& u) {
  check_dim(ctx, u);
  const double eps = ctx.epsilon();
  const Vector z = ctx.vectors().transpose() * u;
  const Vector& y = ctx.y();
  const Vector& s = ctx.norms_sq();
  Vector weight(ctx.n());
  for (Index i = 0; i < ctx.n(); ++i) {
    const double target = std::sqrt(y(i) * y(i) + eps * s(i));
    const double q = z(i) * z(i) + eps * s(i);
    if (q == 0.0) {
      // ε = 0 and z = 0: for z ≠ 0 the two terms below sum to exactly 1.
      weight(i) = 1.0;
      continue;
    }
    const double root = std::sqrt(q);
    const double curvature = target * z(i) * z(i) / (q * root);
    const double scaling = 1.0 - target / root;
    weight(i) = curvature + scaling;
  }
  Matrix h = ctx.vectors() * weight.asDiagonal() * ctx.vectors().transpose();
  h *= inv_n(ctx);
  return 0.5 * (h + h.transpose());
}

Vector residuals_sq(const ObjectiveContext& ctx, const Vector& u) {
  check_dim(ctx, u);
  const Vector z = ctx.vectors().transpose() * u;
  return (z.cwiseAbs() - ctx.y()).array().square().matrix();
}

}  // namespace bwretrieve
