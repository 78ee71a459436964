#include "htsgd/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "htsgd/errors.hpp"

namespace htsgd {

Nonlinearity Nonlinearity::sign() {
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::kSign;
  return nl;
}

Nonlinearity Nonlinearity::component_clip(double m) {
  if (!(m > 0.0)) throw DomainError("component clip level must be positive");
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::kComponentClip;
  nl.m_ = m;
  return nl;
}

Nonlinearity Nonlinearity::quantize(std::vector<double> thresholds,
                                    std::vector<double> values) {
  const std::size_t j = values.size();
  if (j < 2 || thresholds.size() != j - 1)
    throw DomainError("quantizer needs J >= 2 values and J-1 thresholds");
  for (std::size_t i = 0; i + 1 < thresholds.size(); ++i)
    if (!(thresholds[i] < thresholds[i + 1]))
      throw DomainError("quantizer thresholds must be strictly increasing");
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (values[i] > values[i + 1])
      throw DomainError("quantizer values must be non-decreasing");
  // Oddness of the step function: antisymmetric thresholds and values.
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    if (std::abs(thresholds[i] + thresholds[thresholds.size() - 1 - i]) >
        1e-12 * std::max(1.0, std::abs(thresholds[i])))
      throw DomainError("quantizer thresholds must be symmetric about zero");
  for (std::size_t i = 0; i < j; ++i)
    if (std::abs(values[i] + values[j - 1 - i]) >
        1e-12 * std::max(1.0, std::abs(values[i])))
      throw DomainError("quantizer values must be antisymmetric");
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::kQuantize;
  nl.thresholds_ = std::move(thresholds);
  nl.values_ = std::move(values);
  return nl;
}

Nonlinearity Nonlinearity::default_quantizer(double r) {
  if (!(r > 0.0)) throw DomainError("quantizer level must be positive");
  return quantize({-r / 2.0, r / 2.0}, {-r, 0.0, r});
}

Nonlinearity Nonlinearity::joint_clip(double clip_radius) {
  if (!(clip_radius > 0.0)) throw DomainError("clip radius must be positive");
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::kJointClip;
  nl.big_m_ = clip_radius;
  return nl;
}

Nonlinearity Nonlinearity::normalize() {
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::kNormalize;
  return nl;
}

Nonlinearity Nonlinearity::identity_baseline() {
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::kIdentity;
  return nl;
}

NonlinearityClass Nonlinearity::classification() const {
  switch (kind_) {
    case NonlinearityKind::kSign:
    case NonlinearityKind::kComponentClip:
    case NonlinearityKind::kQuantize:
      return NonlinearityClass::kComponentWise;
    case NonlinearityKind::kJointClip:
    case NonlinearityKind::kNormalize:
      return NonlinearityClass::kJoint;
    case NonlinearityKind::kIdentity:
      return NonlinearityClass::kBaseline;
  }
  return NonlinearityClass::kBaseline;
}

double Nonlinearity::bound(int dim) const {
  const double root_d = std::sqrt(static_cast<double>(dim));
  switch (kind_) {
    case NonlinearityKind::kSign:
      return root_d;
    case NonlinearityKind::kComponentClip:
      return m_ * root_d;
    case NonlinearityKind::kQuantize: {
      double r = 0.0;
      for (double v : values_) r = std::max(r, std::abs(v));
      return r * root_d;
    }
    case NonlinearityKind::kJointClip:
      return big_m_;
    case NonlinearityKind::kNormalize:
      return 1.0;
    case NonlinearityKind::kIdentity:
      return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double Nonlinearity::scalar_n1(double x) const {
  switch (kind_) {
    case NonlinearityKind::kSign:
      return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    case NonlinearityKind::kComponentClip:
      return std::clamp(x, -m_, m_);
    case NonlinearityKind::kQuantize: {
      // value r_j on (q_j, q_{j+1}]; exact thresholds map to the lower cell
      std::size_t j = 0;
      while (j < thresholds_.size() && x > thresholds_[j]) ++j;
      return values_[j];
    }
    default:
      throw ClassificationError("scalar_n1 requires a component-wise kind");
  }
}

double Nonlinearity::scalar_n2(double a) const {
  if (a < 0.0) throw DomainError("scalar_n2 argument must be nonnegative");
  switch (kind_) {
    case NonlinearityKind::kJointClip:
      return a <= big_m_ ? 1.0 : big_m_ / a;
    case NonlinearityKind::kNormalize:
      if (a == 0.0)
        throw DomainError("normalization rescale undefined at zero norm");
      return 1.0 / a;
    default:
      throw ClassificationError("scalar_n2 requires a joint kind");
  }
}

Vector apply(const Nonlinearity& nl, const Eigen::Ref<const Vector>& v) {
  switch (nl.kind()) {
    case NonlinearityKind::kSign:
    case NonlinearityKind::kComponentClip:
    case NonlinearityKind::kQuantize: {
      Vector out(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = nl.scalar_n1(v[i]);
      return out;
    }
    case NonlinearityKind::kJointClip:
    case NonlinearityKind::kNormalize: {
      const double norm = v.norm();
      if (norm == 0.0) return Vector::Zero(v.size());
      return v * nl.scalar_n2(norm);
    }
    case NonlinearityKind::kIdentity:
      return v;
  }
  return v;
}

}  // namespace htsgd
