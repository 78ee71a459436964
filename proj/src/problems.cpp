#include "htsgd/problems.hpp"

#include "htsgd/errors.hpp"

namespace htsgd {

Problem Problem::quadratic(Vector spectrum, Vector x_star) {
  if (spectrum.size() == 0) throw DomainError("quadratic needs a spectrum");
  if (x_star.size() == 0) x_star = Vector::Zero(spectrum.size());
  if (x_star.size() != spectrum.size())
    throw DomainError("spectrum and optimum dimensions differ");
  if (spectrum.minCoeff() <= 0.0)
    throw DomainError("quadratic spectrum must be positive");
  Problem p;
  p.kind_ = ProblemKind::kQuadratic;
  p.dim_ = static_cast<int>(spectrum.size());
  p.smoothness_ = spectrum.maxCoeff();
  p.mu_ = spectrum.minCoeff();
  p.spectrum_ = std::move(spectrum);
  p.x_star_ = std::move(x_star);
  return p;
}

Problem Problem::smooth_nonconvex(int dim, double scale) {
  if (dim < 1) throw DomainError("dimension must be positive");
  if (!(scale > 0.0)) throw DomainError("scale must be positive");
  Problem p;
  p.kind_ = ProblemKind::kSmoothNonconvex;
  p.dim_ = dim;
  p.scale_ = scale;
  p.smoothness_ = 2.0 * scale;  // max |f''| per coordinate, attained at 0
  p.x_star_ = Vector::Zero(dim);
  return p;
}

double Problem::value(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim_) throw DomainError("dimension mismatch in value()");
  if (kind_ == ProblemKind::kQuadratic) {
    const Vector d = x - x_star_;
    return 0.5 * d.cwiseProduct(d).dot(spectrum_);
  }
  double f = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double s = x[i] * x[i];
    f += s / (1.0 + s);
  }
  return scale_ * f;
}

Vector Problem::grad(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim_) throw DomainError("dimension mismatch in grad()");
  if (kind_ == ProblemKind::kQuadratic)
    return spectrum_.cwiseProduct(x - x_star_);
  Vector g(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double denom = 1.0 + x[i] * x[i];
    g[i] = 2.0 * scale_ * x[i] / (denom * denom);
  }
  return g;
}

Vector Problem::noisy_grad(const Eigen::Ref<const Vector>& x,
                           const NoiseModel& noise, Rng& rng) const {
  if (noise.dim() != dim_)
    throw DomainError("noise dimension does not match problem dimension");
  return grad(x) + noise.sample(rng);
}

}  // namespace htsgd
