#ifndef HTSGD_PROBLEMS_HPP
#define HTSGD_PROBLEMS_HPP

#include <optional>

#include "htsgd/noise.hpp"
#include "htsgd/util.hpp"

namespace htsgd {

enum class ProblemKind { kQuadratic, kSmoothNonconvex };

// Synthetic costs with exact gradients and analytic constants, so metrics can
// be computed on true gradients while the optimizer only ever sees noisy
// ones.
//
//   quadratic:        f(x) = 1/2 sum_i lambda_i (x_i - x*_i)^2, f* = 0,
//                     mu = min lambda, L = max lambda.
//   smooth-nonconvex: f(x) = s sum_i x_i^2 / (1 + x_i^2), f* = 0 at x = 0,
//                     L = 2s, curvature changes sign at |x_i| = 1/sqrt(3).
class Problem {
 public:
  static Problem quadratic(Vector spectrum, Vector x_star);
  static Problem smooth_nonconvex(int dim, double scale);

  ProblemKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double smoothness() const { return smoothness_; }
  std::optional<double> strong_convexity() const { return mu_; }
  double optimum_value() const { return 0.0; }
  const Vector& optimum_point() const { return x_star_; }
  const Vector& spectrum() const { return spectrum_; }
  double scale() const { return scale_; }

  double value(const Eigen::Ref<const Vector>& x) const;
  Vector grad(const Eigen::Ref<const Vector>& x) const;
  // grad(x) + one noise draw; additive and independent of x.
  Vector noisy_grad(const Eigen::Ref<const Vector>& x, const NoiseModel& noise,
                    Rng& rng) const;

 private:
  Problem() = default;
  ProblemKind kind_ = ProblemKind::kQuadratic;
  int dim_ = 1;
  double smoothness_ = 1.0;
  std::optional<double> mu_;
  double scale_ = 1.0;
  Vector spectrum_;
  Vector x_star_;
};

}  // namespace htsgd

#endif  // HTSGD_PROBLEMS_HPP
