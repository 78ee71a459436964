#include "htsgd/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "htsgd/errors.hpp"

namespace htsgd {

namespace {

// RFC-4180: quote fields containing separators, quotes or newlines.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string num(double v) { return format_double(v); }

// JSON has no inf/nan literals; emit them as strings.
nlohmann::json json_num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string metrics_csv(const EnsembleSummary& summary) {
  std::ostringstream out;
  out << "t,metric,mean,ci_low,ci_high,n\n";
  for (const auto& [metric, curve] : summary.curves) {
    for (const MetricCurvePoint& pt : curve) {
      out << pt.t << ',' << csv_field(metric) << ',' << num(pt.mean) << ','
          << num(pt.ci_low) << ',' << num(pt.ci_high) << ',' << pt.n << '\n';
    }
  }
  return out.str();
}

std::string tails_csv(const EnsembleSummary& summary) {
  std::ostringstream out;
  out << "t,theta,p_hat,wilson_low,wilson_high,n_t,normalized_log,censored\n";
  for (const TailPoint& tp : summary.tails) {
    out << tp.t << ',' << num(tp.theta) << ',' << num(tp.p_hat) << ','
        << num(tp.wilson_low) << ',' << num(tp.wilson_high) << ','
        << num(tp.n_t) << ',' << num(tp.normalized_log) << ','
        << (tp.censored ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const TrajectoryRecord& record) {
  std::ostringstream out;
  out << "t,eta,N_t,f_gap,grad_norm,G_t,Z_t,X_t,weighted_G,pr_gap\n";
  for (const CheckpointRow& row : record.rows) {
    out << row.t << ',' << num(row.eta) << ',' << num(row.step_sum) << ','
        << num(row.f_gap) << ',' << num(row.grad_norm) << ','
        << num(row.g_metric) << ',' << num(row.z_min) << ',' << num(row.x_min)
        << ',' << num(row.weighted_g) << ',' << num(row.pr_gap) << '\n';
  }
  return out.str();
}

nlohmann::json constants_json(const TheoryConstants& c) {
  nlohmann::json j;
  j["alpha"] = json_num(c.alpha);
  j["beta"] = json_num(c.beta);
  j["rho"] = json_num(c.rho);
  j["min_ab_sq"] = json_num(c.min_ab_sq());
  j["C"] = json_num(c.c_bound);
  j["dim"] = c.dim;
  j["class"] = c.cls == NonlinearityClass::kComponentWise ? "component-wise"
               : c.cls == NonlinearityClass::kJoint       ? "joint"
                                                          : "baseline";
  if (c.phi_prime0) j["phi_prime0"] = json_num(*c.phi_prime0);
  if (c.xi) j["xi"] = json_num(*c.xi);
  if (c.p0) j["p0"] = json_num(*c.p0);
  return j;
}

nlohmann::json rate_function_json(const RateFunction& rf) {
  nlohmann::json j;
  j["regime"] = rf.regime == DecayRegime::kLow        ? "low"
                : rf.regime == DecayRegime::kCritical ? "critical"
                                                      : "high";
  j["coefficient"] = json_num(rf.coefficient);
  j["delta"] = rf.delta;
  j["a"] = rf.a;
  j["C"] = json_num(rf.c_bound);
  j["L"] = rf.smoothness;
  j["min_ab_sq"] = json_num(rf.min_ab_sq);
  j["grad_init_sq"] = json_num(rf.grad_init_sq);
  j["decay_rate"] = rf.regime == DecayRegime::kLow ? "t^(2*delta-1)"
                    : rf.regime == DecayRegime::kCritical
                        ? "sqrt(t)/ln(t)"
                        : "t^(2*(1-delta))";
  if (rf.mu) {
    j["mu"] = *rf.mu;
    j["shape"] = "h(x) = x/2 for x <= 1/mu^2, sqrt(x)/mu - 1/(2 mu^2) above";
  } else {
    j["shape"] = "min(sqrt(x), x)";
    j["shape_via_contraction"] = "min(x^2, x)";
    j["shape_note"] =
        "the direct statement and the contraction-derived form disagree for "
        "x != 1; evaluations report both";
  }
  return j;
}

nlohmann::json drift_report_json(const DriftBoundReport& report) {
  nlohmann::json j;
  j["constants"] = constants_json(report.constants);
  j["samples_per_point"] = report.samples_per_point;
  j["ci_z"] = report.ci_z;
  j["violations"] = report.violations;
  j["certified"] = report.certified;
  j["verdict"] = report.violations == 0 ? "pass" : "fail";
  nlohmann::json pts = nlohmann::json::array();
  for (const DriftPointResult& p : report.points) {
    nlohmann::json pj;
    pj["x"] = std::vector<double>(p.x.data(), p.x.data() + p.x.size());
    pj["norm"] = json_num(p.x.norm());
    pj["inner_mean"] = json_num(p.inner_mean);
    pj["std_err"] = json_num(p.std_err);
    pj["lcb"] = json_num(p.lcb);
    pj["ucb"] = json_num(p.ucb);
    pj["bound"] = json_num(p.bound);
    pj["certified"] = p.certified;
    pj["violation"] = p.violation;
    pts.push_back(pj);
  }
  j["points"] = pts;
  return j;
}

nlohmann::json audit_report_json(const EffectiveNoiseReport& report) {
  nlohmann::json j;
  j["sample_count"] = report.sample_count;
  j["empirical_mean_norm"] = json_num(report.empirical_mean_norm);
  j["max_norm_observed"] = json_num(report.max_norm_observed);
  j["hard_bound"] = json_num(report.hard_bound);
  j["hard_violations"] = report.hard_violations;
  j["mgf_violations"] = report.mgf_violations;
  j["mgf_grid_size"] = report.mgf_grid_size;
  j["mgf_slack"] = json_num(report.mgf_slack);
  j["C"] = json_num(report.c_bound);
  j["phi_ci"] = json_num(report.phi_ci);
  j["mean_within_ci"] = report.mean_within_ci;
  j["verdict"] = (report.hard_violations == 0 && report.mgf_violations == 0 &&
                  report.mean_within_ci)
                     ? "pass"
                     : "fail";
  return j;
}

nlohmann::json summary_json(const ExperimentConfig& cfg,
                            const EnsembleSummary& summary) {
  nlohmann::json j;
  j["config"] = cfg.canonical();
  j["config_hash"] = cfg.config_hash();
  j["n_trajectories"] = summary.n_trajectories;
  j["divergence_fraction"] = summary.divergence_fraction;
  j["envelope_all_ok"] = summary.envelope_all_ok;

  const RunConfig& rc = cfg.run;
  const double delta = rc.schedule.delta;
  const Vector g1 = rc.problem.grad(rc.x_init);
  j["grad_init_sq"] = json_num(g1.squaredNorm());

  // MSE rate tags for this schedule.
  const MsePrediction mse = mse_prediction(delta);
  j["mse_prediction"]["nonconvex_exponent"] = mse.nonconvex_exponent;
  j["mse_prediction"]["nonconvex_log_factor"] = mse.nonconvex_log_factor;
  if (mse.strongly_convex_exponent)
    j["mse_prediction"]["strongly_convex_exponent"] =
        *mse.strongly_convex_exponent;

  // Drift constants, a spot verification of the lower bound, and the tail
  // rate function, when computable.
  if (rc.nonlinearity.conforming()) {
    try {
      const TheoryConstants consts =
          rc.nonlinearity.classification() == NonlinearityClass::kJoint
              ? constants_joint(rc.noise, rc.nonlinearity, rc.problem.dim())
              : constants_componentwise(rc.noise, rc.nonlinearity,
                                        rc.problem.dim());
      j["constants"] = constants_json(consts);
      {
        std::vector<Vector> grid;
        for (double r : {0.1, 1.0, 10.0}) {
          Vector x = Vector::Zero(rc.problem.dim());
          x[0] = r;
          grid.push_back(x);
        }
        Rng lemma_rng(fnv1a64(cfg.canonical().data(), cfg.canonical().size()));
        const DriftBoundReport spot = verify_drift_bound(rc.nonlinearity, rc.noise,
                                               consts, grid, 100000, lemma_rng);
        nlohmann::json lv;
        lv["violations"] = spot.violations;
        lv["certified"] = spot.certified;
        lv["points"] = static_cast<long>(spot.points.size());
        lv["samples_per_point"] = spot.samples_per_point;
        lv["verdict"] = spot.violations == 0 ? "pass" : "fail";
        j["lemma_verification"] = lv;
      }
      if (delta > 0.5 && delta < 1.0) {
        const RateFunction rf = rate_function(
            delta, rc.schedule.a, consts.min_ab_sq(), consts.c_bound,
            rc.problem.smoothness(), g1.squaredNorm());
        j["rate_function"] = rate_function_json(rf);
        nlohmann::json checks = nlohmann::json::array();
        for (const TailPoint& tp : summary.tails) {
          if (tp.t != rc.horizon) continue;
          nlohmann::json c;
          c["theta"] = tp.theta;
          c["t"] = tp.t;
          c["normalized_log"] = json_num(tp.normalized_log);
          c["rate_at_theta"] = json_num(rf(tp.theta));
          c["rate_at_theta_via_contraction"] =
              json_num(contraction_transform(rf, tp.theta));
          const double slack =
              2.0 * 0.5 * (tp.wilson_high - tp.wilson_low) / tp.n_t;
          c["slack"] = json_num(slack);
          c["upper_bound_holds"] =
              tp.normalized_log <= -rf(tp.theta) + slack;
          c["censored"] = tp.censored;
          checks.push_back(c);
        }
        if (!checks.empty()) j["tail_bound_checks"] = checks;
      }
    } catch (const Error& e) {
      j["constants_unavailable"] = e.what();
    }
  } else {
    j["constants_unavailable"] = "baseline nonlinearity is unbounded";
  }

  nlohmann::json slopes;
  for (const auto& [metric, fit] : summary.slopes) {
    nlohmann::json f;
    f["slope"] = json_num(fit.slope);
    f["std_error"] = json_num(fit.std_error);
    f["r2"] = json_num(fit.r2);
    f["n_used"] = fit.n_used;
    f["n_excluded"] = fit.n_excluded;
    slopes[metric] = f;
  }
  j["slopes"] = slopes;
  j["slope_window"] = {json_num(summary.slope_t_min),
                       json_num(summary.slope_t_max)};

  nlohmann::json tails = nlohmann::json::array();
  for (const TailPoint& tp : summary.tails) {
    nlohmann::json t;
    t["t"] = tp.t;
    t["theta"] = tp.theta;
    t["p_hat"] = json_num(tp.p_hat);
    t["wilson_low"] = json_num(tp.wilson_low);
    t["wilson_high"] = json_num(tp.wilson_high);
    t["n_t"] = json_num(tp.n_t);
    t["normalized_log"] = json_num(tp.normalized_log);
    t["censored"] = tp.censored;
    tails.push_back(t);
  }
  j["ldp_curves"] = tails;
  return j;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_manifest(const std::string& out_dir,
                    const std::vector<std::string>& file_names,
                    const std::string& config_hash) {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  nlohmann::json files = nlohmann::json::array();
  for (const std::string& name : file_names) {
    nlohmann::json f;
    f["name"] = name;
    f["hash"] =
        fnv1a64_hex(read_file((std::filesystem::path(out_dir) / name).string()));
    files.push_back(f);
  }
  j["files"] = files;
  write_file((std::filesystem::path(out_dir) / "manifest.json").string(),
             j.dump(2) + "\n");
}

}  // namespace htsgd
