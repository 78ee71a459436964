#ifndef HTSGD_NONLINEARITY_HPP
#define HTSGD_NONLINEARITY_HPP

#include <vector>

#include "htsgd/util.hpp"

namespace htsgd {

enum class NonlinearityKind {
  kSign,
  kComponentClip,
  kQuantize,
  kJointClip,
  kNormalize,
  kIdentity,
};

enum class NonlinearityClass { kComponentWise, kJoint, kBaseline };

// A bounded nonlinear map applied to the stochastic gradient before the
// update. Component-wise kinds act through a scalar map per coordinate;
// joint kinds rescale the whole vector by a function of its norm. The
// identity baseline is unbounded, flagged non-conforming, and exists only
// for divergence-contrast experiments.
//
// The scalar maps of the shipped menu are piece-wise differentiable by
// construction; no operation consumes their derivatives, so that property is
// documented rather than checked numerically.
class Nonlinearity {
 public:
  static Nonlinearity sign();
  static Nonlinearity component_clip(double m);
  // Odd non-decreasing step function: value r_j on (q_j, q_{j+1}] with
  // q_0 = -inf, q_J = +inf. Thresholds are the interior q_1 < ... < q_{J-1};
  // an exact threshold maps to the lower cell's value.
  static Nonlinearity quantize(std::vector<double> thresholds,
                               std::vector<double> values);
  // Three levels {-r, 0, r} with thresholds at +-r/2.
  static Nonlinearity default_quantizer(double r);
  static Nonlinearity joint_clip(double clip_radius);
  static Nonlinearity normalize();
  static Nonlinearity identity_baseline();

  NonlinearityKind kind() const { return kind_; }
  NonlinearityClass classification() const;
  bool conforming() const { return kind_ != NonlinearityKind::kIdentity; }

  double clip_m() const { return m_; }
  double clip_radius() const { return big_m_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<double>& values() const { return values_; }

  // Uniform bound C with ||apply(v)|| <= C for all v: sign -> sqrt(d),
  // component clip -> m sqrt(d), quantize -> max|r_j| sqrt(d),
  // joint clip -> M, normalize -> 1, identity -> +inf.
  double bound(int dim) const;

  // The per-coordinate scalar map of a component-wise kind; throws
  // ClassificationError otherwise. sign(0) = 0 (forced by oddness).
  double scalar_n1(double x) const;
  // The norm-rescaling map of a joint kind; throws otherwise.
  // joint clip: min{1, M/a} (1 at a = 0); normalize: 1/a for a > 0.
  double scalar_n2(double a) const;

 private:
  Nonlinearity() = default;
  NonlinearityKind kind_ = NonlinearityKind::kSign;
  double m_ = 0.0;
  double big_m_ = 0.0;
  std::vector<double> thresholds_;
  std::vector<double> values_;
};

Vector apply(const Nonlinearity& nl, const Eigen::Ref<const Vector>& v);

}  // namespace htsgd

#endif  // HTSGD_NONLINEARITY_HPP
