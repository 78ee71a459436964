#include "htsgd/noise.hpp"

#include <cmath>
#include <limits>

#include "htsgd/errors.hpp"

namespace htsgd {

namespace {

void check_dim(int dim) {
  if (dim < 1) throw DomainError("noise dimension must be positive");
}

}  // namespace

double inverse_cdf_power_law(double kappa, double u) {
  if (!(kappa > 2.0)) throw DomainError("power-law kappa must exceed 2");
  if (!(u > 0.0 && u < 1.0))
    throw DomainError("inverse CDF argument must lie in (0, 1)");
  if (u == 0.5) return 0.0;
  if (u > 0.5) return std::pow(2.0 * (1.0 - u), -1.0 / (kappa - 1.0)) - 1.0;
  return -(std::pow(2.0 * u, -1.0 / (kappa - 1.0)) - 1.0);
}

NoiseModel NoiseModel::gaussian(double sigma, int dim) {
  check_dim(dim);
  if (!(sigma > 0.0)) throw DomainError("gaussian sigma must be positive");
  NoiseModel m;
  m.kind_ = NoiseKind::kGaussian;
  m.sigma_ = sigma;
  m.dim_ = dim;
  return m;
}

NoiseModel NoiseModel::alpha_stable(double alpha, double scale, int dim) {
  check_dim(dim);
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw DomainError("stable alpha must lie in (0, 2]");
  if (!(scale > 0.0)) throw DomainError("stable scale must be positive");
  NoiseModel m;
  m.kind_ = NoiseKind::kAlphaStable;
  m.alpha_ = alpha;
  m.scale_ = scale;
  m.dim_ = dim;
  return m;
}

NoiseModel NoiseModel::power_law(double kappa, int dim) {
  check_dim(dim);
  if (!(kappa > 2.0)) throw DomainError("power-law kappa must exceed 2");
  NoiseModel m;
  m.kind_ = NoiseKind::kPowerLaw;
  m.kappa_ = kappa;
  m.dim_ = dim;
  return m;
}

double NoiseModel::marginal_pdf(double z) const {
  switch (kind_) {
    case NoiseKind::kGaussian: {
      const double u = z / sigma_;
      return std::exp(-0.5 * u * u) / (sigma_ * std::sqrt(2.0 * M_PI));
    }
    case NoiseKind::kPowerLaw:
      return (kappa_ - 1.0) / (2.0 * std::pow(std::abs(z) + 1.0, kappa_));
    case NoiseKind::kAlphaStable:
      throw UnsupportedDensityError(
          "symmetric alpha-stable has no closed-form density; use the "
          "power-law or gaussian model");
  }
  return 0.0;
}

double NoiseModel::marginal_cdf(double z) const {
  switch (kind_) {
    case NoiseKind::kGaussian:
      return 0.5 * std::erfc(-z / (sigma_ * std::sqrt(2.0)));
    case NoiseKind::kPowerLaw: {
      if (z >= 0.0) return 1.0 - 0.5 * std::pow(z + 1.0, 1.0 - kappa_);
      return 0.5 * std::pow(-z + 1.0, 1.0 - kappa_);
    }
    case NoiseKind::kAlphaStable:
      throw UnsupportedDensityError(
          "symmetric alpha-stable has no closed-form CDF");
  }
  return 0.0;
}

double NoiseModel::density_at_zero_joint() const {
  double at0 = marginal_pdf(0.0);  // throws for alpha-stable
  double p0 = 1.0;
  for (int i = 0; i < dim_; ++i) p0 *= at0;
  return p0;
}

double NoiseModel::finite_moment_order() const {
  switch (kind_) {
    case NoiseKind::kGaussian:
      return std::numeric_limits<double>::infinity();
    case NoiseKind::kAlphaStable:
      return alpha_ < 2.0 ? alpha_ : std::numeric_limits<double>::infinity();
    case NoiseKind::kPowerLaw:
      return kappa_ - 1.0;
  }
  return 0.0;
}

double NoiseModel::sample_marginal(Rng& rng) const {
  switch (kind_) {
    case NoiseKind::kGaussian:
      return sigma_ * rng.gaussian();
    case NoiseKind::kPowerLaw:
      return inverse_cdf_power_law(kappa_, rng.uniform_open01());
    case NoiseKind::kAlphaStable: {
      // Chambers-Mallows-Stuck, symmetric case (skewness 0).
      const double v = M_PI * (rng.uniform_open01() - 0.5);
      if (alpha_ == 1.0) return scale_ * std::tan(v);
      const double w = rng.exponential();
      const double s = std::sin(alpha_ * v) /
                       std::pow(std::cos(v), 1.0 / alpha_);
      const double tail = std::pow(std::cos((1.0 - alpha_) * v) / w,
                                   (1.0 - alpha_) / alpha_);
      return scale_ * s * tail;
    }
  }
  return 0.0;
}

Vector NoiseModel::sample(Rng& rng) const {
  Vector z(dim_);
  for (int i = 0; i < dim_; ++i) z[i] = sample_marginal(rng);
  return z;
}

}  // namespace htsgd
