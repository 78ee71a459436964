#include "htsgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "htsgd/errors.hpp"

namespace htsgd {

void EnsembleConfig::validate() const {
  base.validate();
  if (n_trajectories < 2)
    throw DomainError("ensembles need at least 2 trajectories for CIs");
  for (const std::string& m : metrics)
    if (std::find(kAllMetrics.begin(), kAllMetrics.end(), m) ==
        kAllMetrics.end())
      throw ConfigError("unknown metric '" + m + "'");
  for (double theta : thetas)
    if (!(theta > 0.0)) throw DomainError("tail thresholds must be positive");
  if (slope_t_max > 0.0) {
    const std::vector<long> cps = base.checkpoints.empty()
                                      ? default_checkpoints(base.horizon)
                                      : base.checkpoints;
    long inside = 0;
    for (long c : cps)
      if (static_cast<double>(c) >= slope_t_min &&
          static_cast<double>(c) <= slope_t_max)
        ++inside;
    if (inside < 5)
      throw DomainError("slope window must contain at least 5 checkpoints");
  }
}

namespace {

double metric_value(const CheckpointRow& row, const std::string& name) {
  if (name == "f_gap") return row.f_gap;
  if (name == "grad_norm") return row.grad_norm;
  if (name == "Z_t") return row.z_min;
  if (name == "X_t") return row.x_min;
  if (name == "weighted_G") return row.weighted_g;
  if (name == "pr_gap") return row.pr_gap;
  throw ConfigError("unknown metric '" + name + "'");
}

}  // namespace

EnsembleSummary run_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_trajectories;
  std::vector<TrajectoryRecord> records(n);

  int pool = cfg.threads > 0
                 ? cfg.threads
                 : static_cast<int>(std::thread::hardware_concurrency());
  pool = std::max(1, std::min(pool, n));

  // Work-stealing by atomic index; records land in a pre-sized slot per
  // index, so the reduction below never depends on completion order.
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      RunConfig rc = cfg.base;
      rc.seed = mix64(cfg.base_seed + 0x9E3779B97F4A7C15ULL *
                                          (static_cast<std::uint64_t>(i) + 1));
      records[static_cast<std::size_t>(i)] = run(rc);
    }
  };
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int p = 0; p < pool; ++p) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  EnsembleSummary summary;
  summary.n_trajectories = n;
  const std::vector<long> cps = cfg.base.checkpoints.empty()
                                    ? default_checkpoints(cfg.base.horizon)
                                    : cfg.base.checkpoints;

  int diverged = 0;
  for (const TrajectoryRecord& r : records) {
    if (r.diverged) ++diverged;
    if (cfg.base.nonlinearity.conforming() && !r.envelope_ok)
      summary.envelope_all_ok = false;
  }
  summary.divergence_fraction = static_cast<double>(diverged) / n;

  // Sequential reduction in trajectory-index order, Kahan-compensated:
  // thread-count independent by construction. Divergent trajectories carry
  // rows only up to their stopping time; means at a checkpoint use the
  // trajectories that reached it.
  for (const std::string& metric : cfg.metrics) {
    std::vector<MetricCurvePoint> curve;
    for (std::size_t ci = 0; ci < cps.size(); ++ci) {
      KahanSum sum, sum_sq;
      int count = 0;
      for (const TrajectoryRecord& r : records) {
        if (ci >= r.rows.size()) continue;
        const double v = metric_value(r.rows[ci], metric);
        sum.add(v);
        sum_sq.add(v * v);
        ++count;
      }
      if (count == 0) continue;
      MetricCurvePoint pt;
      pt.t = cps[ci];
      pt.n = count;
      pt.mean = sum.value() / count;
      const double var =
          count > 1
              ? std::max(0.0, (sum_sq.value() - count * pt.mean * pt.mean) /
                                  (count - 1))
              : 0.0;
      const double half = kZ95 * std::sqrt(var / count);
      pt.ci_low = pt.mean - half;
      pt.ci_high = pt.mean + half;
      curve.push_back(pt);
    }
    summary.curves[metric] = std::move(curve);
  }

  // Tail probabilities of X_t for each threshold.
  const bool has_decay =
      cfg.base.schedule.delta > 0.5 && cfg.base.schedule.delta < 1.0;
  for (double theta : cfg.thetas) {
    for (std::size_t ci = 0; ci < cps.size(); ++ci) {
      long successes = 0;
      long count = 0;
      for (const TrajectoryRecord& r : records) {
        if (ci >= r.rows.size()) continue;
        ++count;
        if (r.rows[ci].x_min > theta) ++successes;
      }
      if (count == 0) continue;
      TailPoint tp;
      tp.t = cps[ci];
      tp.theta = theta;
      tp.p_hat = static_cast<double>(successes) / count;
      const auto wilson = wilson_interval(successes, count, kZ95);
      tp.wilson_low = wilson.first;
      tp.wilson_high = wilson.second;
      tp.n_t = has_decay && tp.t >= 2 ? decay_rate(cfg.base.schedule.delta, tp.t)
                                      : 0.0;
      tp.censored = successes == 0;
      if (tp.n_t > 0.0) {
        const double p_for_log = tp.censored ? tp.wilson_high : tp.p_hat;
        tp.normalized_log = std::log(p_for_log) / tp.n_t;
      }
      summary.tails.push_back(tp);
    }
  }

  // Slope fits over the configured window (default: first 10% of checkpoints
  // excluded as burn-in; strongly convex runs with delta in (2/3, 3/4) extend
  // the burn-in to the explicit threshold when that is under horizon/2).
  double t_min = cfg.slope_t_min;
  double t_max = cfg.slope_t_max > 0.0 ? cfg.slope_t_max
                                       : static_cast<double>(cfg.base.horizon);
  if (t_min <= 0.0) {
    const std::size_t skip = cps.size() / 10;
    t_min = static_cast<double>(cps[std::min(skip, cps.size() - 1)]);
    const auto mu = cfg.base.problem.strong_convexity();
    const double delta = cfg.base.schedule.delta;
    if (mu && delta > 2.0 / 3.0 && delta < 0.75 &&
        cfg.base.nonlinearity.conforming()) {
      TheoryConstants consts;
      try {
        consts = cfg.base.nonlinearity.classification() ==
                         NonlinearityClass::kJoint
                     ? constants_joint(cfg.base.noise, cfg.base.nonlinearity,
                                       cfg.base.problem.dim())
                     : constants_componentwise(cfg.base.noise,
                                               cfg.base.nonlinearity,
                                               cfg.base.problem.dim());
        const Vector g1 = cfg.base.problem.grad(cfg.base.x_init);
        const double burnin = mse_burnin(
            cfg.base.schedule.a, delta, consts.beta,
            consts.c_bound, cfg.base.problem.smoothness(),
            cfg.base.problem.value(cfg.base.x_init) -
                cfg.base.problem.optimum_value(),
            g1.squaredNorm());
        if (burnin < static_cast<double>(cfg.base.horizon) / 2.0)
          t_min = std::max(t_min, burnin);
      } catch (const Error&) {
        // constants unavailable (e.g. alpha-stable density): keep the default
      }
    }
  }
  summary.slope_t_min = t_min;
  summary.slope_t_max = t_max;
  for (const auto& [metric, curve] : summary.curves) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(curve.size());
    for (const MetricCurvePoint& pt : curve)
      pts.emplace_back(static_cast<double>(pt.t), pt.mean);
    try {
      summary.slopes[metric] = fit_loglog_slope(pts, t_min, t_max);
    } catch (const InsufficientDataError&) {
      // metric has too few positive points in the window; no fit emitted
    }
  }

  summary.records = std::move(records);
  return summary;
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points,
                          double t_min, double t_max) {
  std::vector<std::pair<double, double>> logs;
  int excluded = 0;
  for (const auto& [t, v] : points) {
    if (t < t_min || t > t_max) continue;
    if (!(v > 0.0) || !std::isfinite(v)) {
      ++excluded;
      continue;
    }
    logs.emplace_back(std::log(t), std::log(v));
  }
  if (logs.size() < 5)
    throw InsufficientDataError(
        "slope fit needs at least 5 positive points in the window");
  const double n = static_cast<double>(logs.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  SlopeFit fit;
  fit.n_used = static_cast<int>(logs.size());
  fit.n_excluded = excluded;
  fit.slope = sxy / sxx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.std_error = logs.size() > 2
                      ? std::sqrt(ss_res / (n - 2.0) / sxx)
                      : 0.0;
  return fit;
}

std::vector<TailPoint> empirical_ldp_curve(const EnsembleSummary& summary,
                                           double theta, double delta) {
  if (!(delta > 0.5 && delta < 1.0))
    throw DomainError("normalized tail curves need delta in (1/2, 1)");
  std::vector<TailPoint> curve;
  for (const TailPoint& tp : summary.tails) {
    if (tp.theta != theta || tp.t < 2) continue;
    TailPoint out = tp;
    out.n_t = decay_rate(delta, tp.t);
    const double p_for_log = tp.censored ? tp.wilson_high : tp.p_hat;
    out.normalized_log = std::log(p_for_log) / out.n_t;
    curve.push_back(out);
  }
  return curve;
}

AsRateReport as_rate_check(const std::vector<TrajectoryRecord>& records,
                           double delta, double epsilon) {
  if (!(delta > 0.5 && delta < 1.0))
    throw DomainError("a.s. rate check needs delta in (1/2, 1)");
  const double cap = std::min(delta - 0.5, 1.0 - delta);
  if (!(epsilon > 0.0 && epsilon < cap))
    throw DomainError("epsilon must lie in (0, min{delta-1/2, 1-delta})");
  AsRateReport report;
  report.exponent = cap - epsilon;
  for (const TrajectoryRecord& rec : records) {
    if (rec.rows.empty()) continue;
    const long t_end = rec.rows.back().t;
    const double hi_cut = static_cast<double>(t_end) / 10.0;
    const double lo_cut = static_cast<double>(t_end) / 100.0;
    double last = -1.0, prev = -1.0;
    for (const CheckpointRow& row : rec.rows) {
      const double stat =
          std::pow(static_cast<double>(row.t) + 1.0, report.exponent) *
          row.z_min;
      if (row.t > hi_cut)
        last = std::max(last, stat);
      else if (row.t > lo_cut)
        prev = std::max(prev, stat);
    }
    if (last < 0.0 || prev < 0.0) continue;
    ++report.n_trajectories;
    if (last < prev) ++report.n_decreased;
  }
  if (report.n_trajectories == 0)
    throw InsufficientDataError(
        "a.s. rate check needs trajectories spanning at least two decades");
  report.fraction_decreased =
      static_cast<double>(report.n_decreased) / report.n_trajectories;
  return report;
}

}  // namespace htsgd
