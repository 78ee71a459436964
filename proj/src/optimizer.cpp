#include "htsgd/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "htsgd/errors.hpp"

namespace htsgd {

StepSchedule::StepSchedule(double a_in, double delta_in)
    : a(a_in), delta(delta_in) {
  if (!(a > 0.0)) throw DomainError("step-size parameter a must be positive");
  if (!(delta >= 0.5 && delta < 1.0))
    throw DomainError("step-size exponent delta must lie in [1/2, 1)");
}

double StepSchedule::eta(long t) const {
  return a / std::pow(static_cast<double>(t) + 1.0, delta);
}

void RunConfig::validate() const {
  StepSchedule check(schedule.a, schedule.delta);
  (void)check;
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  if (x_init.size() != problem.dim())
    throw DomainError("x_init dimension does not match the problem");
  if (noise.dim() != problem.dim())
    throw DomainError("noise dimension does not match the problem");
  long prev = 0;
  for (long c : checkpoints) {
    if (c < 1 || c > horizon)
      throw DomainError("checkpoints must lie within [1, horizon]");
    if (c <= prev) throw DomainError("checkpoints must be strictly increasing");
    prev = c;
  }
}

std::vector<long> default_checkpoints(long horizon) {
  std::vector<long> cps;
  if (horizon < 1) return cps;
  const double decades = std::max(1.0, std::log10(static_cast<double>(horizon)));
  const int per_decade =
      std::max(1, std::min(60, static_cast<int>(255.0 / decades)));
  cps.push_back(1);
  for (long k = 1;; ++k) {
    const long t = std::llround(
        std::pow(10.0, static_cast<double>(k) / per_decade));
    if (t > horizon) break;
    if (t > cps.back()) cps.push_back(t);
  }
  if (cps.back() != horizon) cps.push_back(horizon);
  return cps;
}

Vector step(const Eigen::Ref<const Vector>& x, long t, const RunConfig& cfg,
            Rng& rng) {
  if (t < 1) throw DomainError("iterations are counted from 1");
  const double eta = cfg.schedule.eta(t);
  const Vector g = cfg.problem.noisy_grad(x, cfg.noise, rng);
  return x - eta * apply(cfg.nonlinearity, g);
}

TrajectoryRecord run(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<long> cps =
      cfg.checkpoints.empty() ? default_checkpoints(cfg.horizon) : cfg.checkpoints;
  Rng rng(cfg.seed);

  TrajectoryRecord rec;
  rec.rows.reserve(cps.size());

  Vector x = cfg.x_init;
  rec.grad_init_norm = cfg.problem.grad(x).norm();
  const double f_star = cfg.problem.optimum_value();
  const Vector& x_star = cfg.problem.optimum_point();
  const double c_bound = cfg.nonlinearity.bound(cfg.problem.dim());
  const double smoothness = cfg.problem.smoothness();

  KahanSum step_sum;     // N_t
  KahanSum weighted_g;   // sum eta_k G_k
  RunningMean pr_mean;   // Polyak-Ruppert average
  double z_min = std::numeric_limits<double>::infinity();
  double x_min = std::numeric_limits<double>::infinity();
  std::size_t cp_idx = 0;

  for (long t = 1; t <= cfg.horizon && cp_idx < cps.size(); ++t) {
    const Vector grad = cfg.problem.grad(x);
    const double gn = grad.norm();
    const double gn2 = gn * gn;
    const double g_metric = std::min(gn, gn2);
    const double eta = cfg.schedule.eta(t);
    step_sum.add(eta);
    weighted_g.add(eta * g_metric);
    z_min = std::min(z_min, g_metric);
    x_min = std::min(x_min, gn2);
    pr_mean.add(x);

    if (t == cps[cp_idx]) {
      CheckpointRow row;
      row.t = t;
      row.eta = eta;
      row.step_sum = step_sum.value();
      row.f_gap = cfg.problem.value(x) - f_star;
      row.grad_norm = gn;
      row.g_metric = g_metric;
      row.z_min = z_min;
      row.x_min = x_min;
      row.weighted_g = weighted_g.value() / step_sum.value();
      row.pr_gap = (pr_mean.mean() - x_star).squaredNorm();
      rec.rows.push_back(row);
      ++cp_idx;
      if (std::isfinite(c_bound)) {
        const double envelope =
            smoothness * c_bound * row.step_sum + rec.grad_init_norm;
        if (gn > envelope * (1.0 + 1e-9) + 1e-12) rec.envelope_ok = false;
      }
    }

    const Vector z = cfg.noise.sample(rng);
    x -= eta * apply(cfg.nonlinearity, grad + z);
    if (!x.allFinite() || x.norm() > kDivergenceGuard) {
      rec.diverged = true;
      rec.diverged_at = t;
      break;
    }
  }
  return rec;
}

long random_stop_index(const StepSchedule& schedule, long t, Rng& rng) {
  if (t < 1) throw DomainError("random stop needs t >= 1");
  KahanSum total;
  for (long k = 1; k <= t; ++k) total.add(schedule.eta(k));
  const double target = rng.uniform_open01() * total.value();
  KahanSum partial;
  for (long k = 1; k <= t; ++k) {
    partial.add(schedule.eta(k));
    if (partial.value() >= target) return k;
  }
  return t;
}

Vector polyak_ruppert(const std::vector<Vector>& iterates) {
  if (iterates.empty())
    throw DomainError("Polyak-Ruppert average of an empty sequence");
  RunningMean mean;
  for (const Vector& x : iterates) mean.add(x);
  return mean.mean();
}

}  // namespace htsgd
