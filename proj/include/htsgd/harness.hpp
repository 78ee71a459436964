#ifndef HTSGD_HARNESS_HPP
#define HTSGD_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "htsgd/optimizer.hpp"
#include "htsgd/theory.hpp"

namespace htsgd {

inline const std::vector<std::string> kAllMetrics = {
    "f_gap", "grad_norm", "Z_t", "X_t", "weighted_G", "pr_gap"};

struct EnsembleConfig {
  RunConfig base;  // base.seed is ignored; streams derive from base_seed
  int n_trajectories = 2;
  std::uint64_t base_seed = 0;
  std::vector<std::string> metrics = kAllMetrics;
  std::vector<double> thetas;       // tail thresholds for X_t
  double slope_t_min = 0.0;         // 0 => default burn-in rule
  double slope_t_max = 0.0;         // 0 => horizon
  int threads = 0;                  // 0 => hardware concurrency

  void validate() const;
};

struct MetricCurvePoint {
  long t = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;
};

struct TailPoint {
  long t = 0;
  double theta = 0.0;
  double p_hat = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double n_t = 0.0;            // decay rate at t (needs delta in (1/2,1); 0 otherwise)
  double normalized_log = 0.0; // ln(p)/n_t, censored entries use the Wilson upper bound
  bool censored = false;       // no positive counts at this (theta, t)
};

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double r2 = 0.0;
  int n_used = 0;
  int n_excluded = 0;  // nonpositive values dropped from the window
};

struct EnsembleSummary {
  std::map<std::string, std::vector<MetricCurvePoint>> curves;
  std::vector<TailPoint> tails;
  std::map<std::string, SlopeFit> slopes;
  double divergence_fraction = 0.0;
  bool envelope_all_ok = true;  // conforming runs stayed inside the envelope
  int n_trajectories = 0;
  double slope_t_min = 0.0;
  double slope_t_max = 0.0;
  std::vector<TrajectoryRecord> records;  // index order == trajectory index
};

// Runs n trajectories with per-index derived seeds and aggregates in index
// order; the summary is bit-identical for any worker-pool size.
EnsembleSummary run_ensemble(const EnsembleConfig& cfg);

// OLS fit of ln(value) on ln(t) over t in [t_min, t_max]. Nonpositive values
// are excluded (count reported); fewer than 5 usable points is an error.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points,
                          double t_min, double t_max);

// Normalized tail curve {t, ln P(X_t > theta) / n_t(delta)} from an ensemble
// summary; zero-count entries are flagged and use the one-sided Wilson upper
// bound.
std::vector<TailPoint> empirical_ldp_curve(const EnsembleSummary& summary,
                                           double theta, double delta);

struct AsRateReport {
  double exponent = 0.0;          // min{delta-1/2, 1-delta} - epsilon
  int n_trajectories = 0;
  int n_decreased = 0;
  double fraction_decreased = 0.0;
};

// Per trajectory, compares max over the final decade of checkpoints of
// (t+1)^exponent * Z_t against the same statistic one decade earlier and
// reports the fraction of trajectories where it decreased.
AsRateReport as_rate_check(const std::vector<TrajectoryRecord>& records,
                           double delta, double epsilon);

}  // namespace htsgd

#endif  // HTSGD_HARNESS_HPP
