#ifndef HTSGD_OPTIMIZER_HPP
#define HTSGD_OPTIMIZER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "htsgd/nonlinearity.hpp"
#include "htsgd/problems.hpp"

namespace htsgd {

// eta_t = a / (t+1)^delta, t = 1, 2, ...; delta in [1/2, 1).
struct StepSchedule {
  double a = 1.0;
  double delta = 0.5;

  StepSchedule() = default;
  StepSchedule(double a_in, double delta_in);
  double eta(long t) const;
};

struct RunConfig {
  StepSchedule schedule;
  long horizon = 1000;
  std::uint64_t seed = 0;
  Nonlinearity nonlinearity = Nonlinearity::sign();
  Problem problem = Problem::smooth_nonconvex(1, 1.0);
  NoiseModel noise = NoiseModel::gaussian(1.0, 1);
  Vector x_init;                   // deterministic initial model
  std::vector<long> checkpoints;   // sorted, within [1, horizon]

  void validate() const;
};

struct CheckpointRow {
  long t = 0;
  double eta = 0.0;         // eta_t
  double step_sum = 0.0;    // N_t = sum_{k<=t} eta_k
  double f_gap = 0.0;       // f(x_t) - f*
  double grad_norm = 0.0;   // ||grad f(x_t)||
  double g_metric = 0.0;    // G_t = min{grad_norm, grad_norm^2}
  double z_min = 0.0;       // Z_t = min_{k<=t} G_k
  double x_min = 0.0;       // X_t = min_{k<=t} grad_norm^2
  double weighted_g = 0.0;  // sum_{k<=t} (eta_k / N_t) G_k
  double pr_gap = 0.0;      // ||pr_mean_t - x*||^2
};

struct TrajectoryRecord {
  std::vector<CheckpointRow> rows;
  bool diverged = false;
  long diverged_at = 0;
  // Pathwise envelope ||grad f(x_k)|| <= L C N_k + ||grad f(x_1)||, checked at
  // every checkpoint (trivially true for the unbounded baseline).
  bool envelope_ok = true;
  double grad_init_norm = 0.0;
};

// Log-spaced checkpoints, ~60 per decade, capped at 256 total, always
// containing 1 and horizon.
std::vector<long> default_checkpoints(long horizon);

// One update: x - eta_t * Psi(grad f(x) + z). Movement per step is bounded by
// eta_t * C for conforming nonlinearities.
Vector step(const Eigen::Ref<const Vector>& x, long t, const RunConfig& cfg,
            Rng& rng);

// Executes the full loop, recording metrics at checkpoints with exact
// gradients. Deterministic given cfg.seed. If ||x|| exceeds 1e15 (possible
// only for the identity baseline) the run records a divergence flag and
// stops.
TrajectoryRecord run(const RunConfig& cfg);

// Index k in [1, t] drawn with probability eta_k / N_t (random stopping).
long random_stop_index(const StepSchedule& schedule, long t, Rng& rng);

// Arithmetic mean of iterates.
Vector polyak_ruppert(const std::vector<Vector>& iterates);

inline constexpr double kDivergenceGuard = 1e15;

}  // namespace htsgd

#endif  // HTSGD_OPTIMIZER_HPP
