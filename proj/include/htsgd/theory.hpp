#ifndef HTSGD_THEORY_HPP
#define HTSGD_THEORY_HPP

#include <optional>
#include <vector>

#include "htsgd/noise.hpp"
#include "htsgd/nonlinearity.hpp"

namespace htsgd {

// Constants of the drift lower bound <Phi(x), x> >= min{alpha ||x||,
// beta ||x||^2}, where Phi(x) = E[Psi(x + z)].
//   component-wise: alpha = phi'(0) xi / (2 sqrt(d)), beta = phi'(0) / (2d)
//   joint:          alpha = p0 N2(1) / 2,             beta = p0 N2(1)
struct TheoryConstants {
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;      // min{alpha, beta}
  double c_bound = 0.0;  // nonlinearity bound C for this dimension
  int dim = 1;
  NonlinearityClass cls = NonlinearityClass::kComponentWise;
  std::optional<double> phi_prime0;  // component-wise only
  std::optional<double> xi;          // component-wise only
  std::optional<double> p0;          // joint only
  double min_ab_sq() const { return rho * rho; }
};

struct ConstantsOptions {
  long mc_samples = 200000;     // samples for MC phi estimates
  double fd_step = 1e-2;        // central-difference step for phi'(0)
  long xi_grid_points = 1000;   // log grid scanned for xi
  double xi_grid_lo = 1e-4;
  double xi_grid_hi = 1e2;
  double ci_z = kZ99;
  std::uint64_t mc_seed = 0x9E3779B9ULL;
};

// Marginal phi(x) = E[N1(x + z)] in closed form where the CDF admits one
// (sign and quantize under gaussian / power-law noise); empty otherwise.
std::optional<double> phi_scalar_analytic(const Nonlinearity& nl,
                                          const NoiseModel& noise, double x);

TheoryConstants constants_componentwise(const NoiseModel& noise,
                                        const Nonlinearity& nl, int dim,
                                        const ConstantsOptions& opts = {});
TheoryConstants constants_joint(const NoiseModel& noise, const Nonlinearity& nl,
                                int dim);

struct PhiEstimate {
  Vector mean;     // estimate of Phi(x)
  Vector std_err;  // per-component standard error
};

// Monte-Carlo estimate of Phi(x) from n i.i.d. draws. Psi is bounded, so the
// estimator has finite variance regardless of the noise tails.
PhiEstimate phi_mc(const Nonlinearity& nl, const NoiseModel& noise,
                   const Eigen::Ref<const Vector>& x, long n, Rng& rng);

struct DriftPointResult {
  Vector x;
  double inner_mean = 0.0;  // MC estimate of <Phi(x), x>
  double std_err = 0.0;
  double lcb = 0.0;  // lower confidence bound
  double ucb = 0.0;  // upper confidence bound
  double bound = 0.0;  // min{alpha ||x||, beta ||x||^2}
  bool certified = false;  // lcb >= bound
  bool violation = false;  // ucb < bound: data contradicts the bound beyond CI
};

struct DriftBoundReport {
  std::vector<DriftPointResult> points;
  long violations = 0;
  long certified = 0;
  long samples_per_point = 0;
  double ci_z = 0.0;
  TheoryConstants constants;
};

// Checks the drift lower bound on a grid of points at confidence ci_z
// (violations are data, not errors).
DriftBoundReport verify_drift_bound(const Nonlinearity& nl, const NoiseModel& noise,
                          const TheoryConstants& constants,
                          const std::vector<Vector>& grid, long n, Rng& rng,
                          double ci_z = kZ999OneSided);

enum class DecayRegime { kLow, kCritical, kHigh };  // delta in (1/2,3/4), =3/4, (3/4,1)

// A large-deviation upper-bound regime: decay rate n_t and closed-form rate
// function I(x) = coefficient * shape(x), with I(x) = +inf for x < 0.
// shape(x) = min{sqrt(x), x} for the gradient metric, or the piecewise map
// h(x) = x/2 (x <= 1/mu^2), sqrt(x)/mu - 1/(2 mu^2) otherwise, for the
// averaged-iterate metric of strongly convex costs.
struct RateFunction {
  DecayRegime regime = DecayRegime::kCritical;
  double coefficient = 0.0;
  double delta = 0.75;
  double a = 1.0;
  double c_bound = 1.0;
  double smoothness = 1.0;
  double min_ab_sq = 1.0;
  double grad_init_sq = 0.0;
  std::optional<double> mu;  // set for the strongly convex variant

  double operator()(double x) const;
  double decay_rate(long t) const;
};

RateFunction rate_function(double delta, double a, double min_ab_sq, double C,
                           double L, double grad_init_sq);
RateFunction rate_function_strongly_convex(double delta, double a,
                                           double min_ab_sq, double C, double L,
                                           double mu, double grad_init_sq);

// n_t for the three regimes: t^(2 delta - 1), sqrt(t)/ln(t), t^(2(1-delta)).
double decay_rate(double delta, long t);

struct LegendreGrid {
  double lambda_max = 10.0;
  double step = 1e-4;
  double cap = 1e12;  // +inf sentinel threshold for x < 0
};

// Numeric Fenchel-Legendre transform of the one-sided quadratic envelope
// phi(lambda) = c lambda^2 (lambda >= 0), 0 (lambda < 0); converges to
// x^2/(4c) for x >= 0 and reports +inf when the grid supremum exceeds the cap.
double legendre_transform_numeric(double c, double x,
                                  const LegendreGrid& grid = {});

// Pushes a quadratic rate function through g(x) = max{x, x^2}:
// I'(y) = I(min{y, sqrt(y)}) with I(x) = coefficient x^2. Defined for the
// gradient-metric (non strongly-convex) base only.
double contraction_transform(const RateFunction& base, double y);

// Huber loss: x^2/2 for |x| <= lambda, lambda |x| - lambda^2/2 otherwise.
double huber(double lambda, double x);

struct MsePrediction {
  double nonconvex_exponent = 0.0;     // weighted-best metric
  bool nonconvex_log_factor = false;   // true at delta = 1/2
  std::optional<double> strongly_convex_exponent;  // last iterate, delta > 1/2
};

MsePrediction mse_prediction(double delta);

// Explicit burn-in iteration after which the minimum-gradient MSE bound
// applies, for delta in (2/3, 3/4). Evaluates
//   max{ [8(1-d)/(a b) (f_gap_1 + a^2 C^2 (L/2 + 8 g1sq))]^(1/(1-d)),
//        [64 a^3 C^4 L^2 / (b (1-d)(3-4d))]^(1/(3d-2)) }
// rounded up, at least 1. Returned as double: the value can exceed any
// integer type for small beta.
double mse_burnin(double a, double delta, double beta, double C,
                         double L, double f_gap_init, double grad_init_sq);

struct EffectiveNoiseReport {
  long sample_count = 0;
  double empirical_mean_norm = 0.0;
  double max_norm_observed = 0.0;
  double hard_bound = 0.0;        // 2C + 3 * phi_ci
  long hard_violations = 0;
  long mgf_violations = 0;
  long mgf_grid_size = 0;
  double mgf_slack = 0.0;         // multiplicative: 1 + 5/sqrt(n)
  double c_bound = 0.0;
  double phi_ci = 0.0;            // norm of the reference-pass standard errors
  bool mean_within_ci = false;
};

struct AuditOptions {
  long phi_samples = 1000000;  // high-accuracy reference pass for Phi(x)
  double ci_z = kZ99;
};

// Audits the effective noise e_i = Phi(x) - Psi(x + z_i): zero conditional
// mean, hard bound ||e|| <= 2C, and the sub-Gaussian moment-generating bound
// E[exp<v,e>] <= exp(8 C^2 ||v||^2 / 2) on a grid of v with ||v|| <= 1.
EffectiveNoiseReport effective_noise_audit(const Nonlinearity& nl,
                                           const NoiseModel& noise,
                                           const Eigen::Ref<const Vector>& x,
                                           long n, Rng& rng,
                                           const AuditOptions& opts = {});

}  // namespace htsgd

#endif  // HTSGD_THEORY_HPP
