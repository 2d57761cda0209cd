#pragma once

#include <memory>
#include <vector>

#include "bwretrieve/sensing.hpp"
#include "bwretrieve/types.hpp"

namespace bwretrieve {

/// Inner products with |v_iᵀu| ≤ kDegeneracyFloor·‖v_i‖·‖u‖ are treated as
/// zero crossings: the sign factor v_iᵀu/|v_iᵀu| is replaced by 0.
inline constexpr double kDegeneracyFloor = 1e-14;

/// View over a set of sensing vectors (raw or whitened), the measurements and
/// a smoothing value. Holds references: the vectors and measurements must
/// outlive the context. Squared vector norms are computed once and shared
/// between copies made by with_epsilon().
class ObjectiveContext {
 public:
  /// Keeps references to `vectors` and `y`; both must outlive the context.
  ObjectiveContext(const Matrix& vectors, const Vector& y, double epsilon = 0.0);
  ObjectiveContext(const Matrix&&, const Vector&, double = 0.0) = delete;
  ObjectiveContext(const Matrix&, const Vector&&, double = 0.0) = delete;
  ObjectiveContext(const Matrix&&, const Vector&&, double = 0.0) = delete;

  static ObjectiveContext whitened(const SensingEnsemble& ensemble, const Measurements& y,
                                   double epsilon = 0.0);
  static ObjectiveContext raw(const SensingEnsemble& ensemble, const Measurements& y,
                              double epsilon = 0.0);

  ObjectiveContext with_epsilon(double epsilon) const;

  const Matrix& vectors() const { return *vectors_; }
  const Vector& y() const { return *y_; }
  const Vector& norms_sq() const { return *norms_sq_; }
  double epsilon() const { return epsilon_; }
  Index n() const { return vectors_->cols(); }
  Index d() const { return vectors_->rows(); }

 private:
  ObjectiveContext(const Matrix* vectors, const Vector* y,
                   std::shared_ptr<const Vector> norms_sq, double epsilon);

  const Matrix* vectors_;
  const Vector* y_;
  std::shared_ptr<const Vector> norms_sq_;
  double epsilon_;
};

struct GradientResult {
  Vector gradient;
  /// Indices that hit the degeneracy floor (only possible at ε = 0).
  std::vector<Index> degenerate;
};

/// (1/2n) Σ (|v_iᵀu| − y_i)²; ctx.epsilon() is ignored.
double amplitude_loss(const ObjectiveContext& ctx, const Vector& u);

/// (1/n) Σ (|v_iᵀu| − y_i) sign(v_iᵀu) v_i with the floor convention.
GradientResult amplitude_grad(const ObjectiveContext& ctx, const Vector& u);

/// (1/2n) Σ (√((v_iᵀu)² + ε‖v_i‖²) − √(y_i² + ε‖v_i‖²))².
double smoothed_loss(const ObjectiveContext& ctx, const Vector& u);

/// (1/2n) Σ (√((v_iᵀu)² + ε y_i²) − y_i √(1+ε))². No gradient is provided.
double standard_perturbed_loss(const ObjectiveContext& ctx, const Vector& u);

/// (1/n) Σ (1 − √(y_i² + ε‖v_i‖²)/√((v_iᵀu)² + ε‖v_i‖²)) v_i v_iᵀu.
/// At ε = 0 this is amplitude_grad, including its floor convention.
GradientResult smoothed_grad(const ObjectiveContext& ctx, const Vector& u);

/// Dense Hessian of smoothed_loss. O(n d²); never used by the solver.
Matrix smoothed_hessian(const ObjectiveContext& ctx, const Vector& u);

/// (|v_iᵀu| − y_i)² per index (unsmoothed).
Vector residuals_sq(const ObjectiveContext& ctx, const Vector& u);

}  // namespace bwretrieve
