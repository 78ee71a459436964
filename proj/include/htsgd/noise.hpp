#ifndef HTSGD_NOISE_HPP
#define HTSGD_NOISE_HPP

#include "htsgd/rng.hpp"
#include "htsgd/util.hpp"

namespace htsgd {

enum class NoiseKind { kGaussian, kAlphaStable, kPowerLaw };

// Inverse CDF of the marginal power-law density
//   rho(z) = (kappa-1) / (2 (|z|+1)^kappa),  kappa > 2.
// For u > 1/2 returns (2(1-u))^(-1/(kappa-1)) - 1, antisymmetric below 1/2,
// zero at 1/2. Throws DomainError outside (0,1).
double inverse_cdf_power_law(double kappa, double u);

// A symmetric noise model with i.i.d. components. Immutable and freely
// shareable across threads; sampling state lives in the caller's Rng.
class NoiseModel {
 public:
  static NoiseModel gaussian(double sigma, int dim);
  static NoiseModel alpha_stable(double alpha, double scale, int dim);
  static NoiseModel power_law(double kappa, int dim);

  NoiseKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double sigma() const { return sigma_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  double kappa() const { return kappa_; }

  bool has_closed_form_density() const { return kind_ != NoiseKind::kAlphaStable; }

  // Exact marginal density; throws UnsupportedDensityError for alpha-stable.
  double marginal_pdf(double z) const;
  // Exact marginal CDF (gaussian, power-law); throws for alpha-stable.
  double marginal_cdf(double z) const;
  // p0 = product of the marginal densities at zero.
  double density_at_zero_joint() const;

  // Supremum of finite moment orders (exclusive): +inf for gaussian, alpha
  // for stable, kappa-1 for the power law.
  double finite_moment_order() const;

  // All implemented densities have full support; the positivity radius is
  // reported as a large finite sentinel so serialized configs stay finite.
  double positivity_radius() const { return kFullSupportRadius; }
  static constexpr double kFullSupportRadius = 1e9;

  double sample_marginal(Rng& rng) const;
  Vector sample(Rng& rng) const;

 private:
  NoiseModel() = default;
  NoiseKind kind_ = NoiseKind::kGaussian;
  int dim_ = 1;
  double sigma_ = 1.0;   // gaussian
  double alpha_ = 2.0;   // stable
  double scale_ = 1.0;   // stable
  double kappa_ = 3.0;   // power law
};

}  // namespace htsgd

#endif  // HTSGD_NOISE_HPP
