#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "htsgd/config.hpp"
#include "htsgd/errors.hpp"
#include "htsgd/io.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  long long seed = -1;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool needs_config) {
  auto* opt = cmd->add_option("--config", args->config_path,
                              "Experiment config file");
  if (needs_config) opt->required();
  cmd->add_option("--out", args->out_dir, "Output directory");
  cmd->add_option("--set", args->overrides,
                  "Override a config key: section.key=value (repeatable)");
  cmd->add_option("--seed", args->seed, "Override run seed / ensemble base seed");
  cmd->add_option("--threads", args->threads,
                  "Worker pool size (default: HTSGD_THREADS or hardware)");
}

htsgd::ExperimentConfig load_config(const CommonArgs& args) {
  htsgd::ConfigTable table = htsgd::ConfigTable::parse_file(args.config_path);
  for (const std::string& ov : args.overrides) table.set_override(ov);
  htsgd::ExperimentConfig cfg = htsgd::ExperimentConfig::from_table(std::move(table));
  if (args.seed >= 0) {
    cfg.run.seed = static_cast<std::uint64_t>(args.seed);
    cfg.ensemble.base_seed = static_cast<std::uint64_t>(args.seed);
    cfg.ensemble.base.seed = cfg.run.seed;
  }
  int threads = args.threads;
  if (threads < 0) {
    if (const char* env = std::getenv("HTSGD_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) cfg.ensemble.threads = threads;
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_run(const CommonArgs& args) {
  htsgd::ExperimentConfig cfg = load_config(args);
  const htsgd::TrajectoryRecord rec = htsgd::run(cfg.run);
  ensure_out_dir(args.out_dir);
  htsgd::write_file(join(args.out_dir, "trajectory.csv"),
                    htsgd::trajectory_csv(rec));
  htsgd::write_manifest(args.out_dir, {"trajectory.csv"}, cfg.config_hash());
  std::cout << "wrote " << join(args.out_dir, "trajectory.csv") << " ("
            << rec.rows.size() << " checkpoints";
  if (rec.diverged) std::cout << ", diverged at t=" << rec.diverged_at;
  std::cout << ")\n";
  return 0;
}

int cmd_ensemble(const CommonArgs& args) {
  htsgd::ExperimentConfig cfg = load_config(args);
  const htsgd::EnsembleSummary summary = htsgd::run_ensemble(cfg.ensemble);
  ensure_out_dir(args.out_dir);
  htsgd::write_file(join(args.out_dir, "metrics.csv"),
                    htsgd::metrics_csv(summary));
  htsgd::write_file(join(args.out_dir, "tails.csv"), htsgd::tails_csv(summary));
  htsgd::write_file(join(args.out_dir, "summary.json"),
                    htsgd::summary_json(cfg, summary).dump(2) + "\n");
  htsgd::write_manifest(args.out_dir,
                        {"metrics.csv", "tails.csv", "summary.json"},
                        cfg.config_hash());
  std::cout << "wrote metrics.csv, tails.csv, summary.json under "
            << args.out_dir << "\n";
  for (const auto& [metric, fit] : summary.slopes)
    std::cout << "  slope[" << metric << "] = " << fit.slope
              << " (r2 = " << fit.r2 << ")\n";
  return 0;
}

std::vector<htsgd::Vector> lemma_grid(int dim, const htsgd::VerifySettings& vs) {
  std::vector<htsgd::Vector> dirs;
  if (dim == 1) {
    htsgd::Vector plus(1), minus(1);
    plus[0] = 1.0;
    minus[0] = -1.0;
    dirs = {plus, minus};
  } else {
    htsgd::Vector axis = htsgd::Vector::Zero(dim);
    axis[0] = 1.0;
    dirs.push_back(axis);
    htsgd::Rng rng(vs.seed);
    for (int k = 1; k < vs.directions; ++k) {
      htsgd::Vector v(dim);
      for (int i = 0; i < dim; ++i) v[i] = rng.gaussian();
      dirs.push_back(v.normalized());
    }
  }
  std::vector<htsgd::Vector> grid;
  for (double r : vs.radii)
    for (const htsgd::Vector& d : dirs) grid.push_back(r * d);
  return grid;
}

int cmd_verify_lemma(const CommonArgs& args) {
  htsgd::ExperimentConfig cfg = load_config(args);
  const htsgd::Nonlinearity& nl = cfg.run.nonlinearity;
  if (!nl.conforming())
    throw htsgd::ConfigError(
        "the identity baseline has no drift constants to verify");
  const int dim = cfg.run.problem.dim();
  const htsgd::TheoryConstants consts =
      nl.classification() == htsgd::NonlinearityClass::kJoint
          ? htsgd::constants_joint(cfg.run.noise, nl, dim)
          : htsgd::constants_componentwise(cfg.run.noise, nl, dim);
  const std::vector<htsgd::Vector> grid = lemma_grid(dim, cfg.verify);
  htsgd::Rng rng(cfg.verify.seed);
  const htsgd::DriftBoundReport report =
      htsgd::verify_drift_bound(nl, cfg.run.noise, consts, grid, cfg.verify.n, rng);
  ensure_out_dir(args.out_dir);
  htsgd::write_file(join(args.out_dir, "lemma.json"),
                    htsgd::drift_report_json(report).dump(2) + "\n");
  htsgd::write_manifest(args.out_dir, {"lemma.json"}, cfg.config_hash());
  std::cout << "lemma verification: " << (report.violations == 0 ? "pass" : "fail")
            << " (" << report.certified << "/" << report.points.size()
            << " certified, " << report.violations << " violations)\n";
  return report.violations == 0 ? 0 : 2;
}

int cmd_audit_noise(const CommonArgs& args) {
  htsgd::ExperimentConfig cfg = load_config(args);
  const int dim = cfg.run.problem.dim();
  nlohmann::json out = nlohmann::json::array();
  bool ok = true;
  for (std::size_t i = 0; i < cfg.audit.x_scales.size(); ++i) {
    htsgd::Vector x = htsgd::Vector::Zero(dim);
    x[0] = cfg.audit.x_scales[i];
    htsgd::Rng rng = htsgd::Rng::for_stream(cfg.audit.seed, i);
    htsgd::AuditOptions opts;
    opts.phi_samples = cfg.audit.phi_samples;
    const htsgd::EffectiveNoiseReport report = htsgd::effective_noise_audit(
        cfg.run.nonlinearity, cfg.run.noise, x, cfg.audit.n, rng, opts);
    nlohmann::json j = htsgd::audit_report_json(report);
    j["x_scale"] = cfg.audit.x_scales[i];
    out.push_back(j);
    ok = ok && report.hard_violations == 0 && report.mgf_violations == 0 &&
         report.mean_within_ci;
  }
  ensure_out_dir(args.out_dir);
  htsgd::write_file(join(args.out_dir, "audit.json"), out.dump(2) + "\n");
  htsgd::write_manifest(args.out_dir, {"audit.json"}, cfg.config_hash());
  std::cout << "effective-noise audit: " << (ok ? "pass" : "fail") << "\n";
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear SGD laboratory under symmetric heavy-tailed noise"};
  app.require_subcommand(1);

  CommonArgs run_args, ens_args, lemma_args, audit_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one seeded trajectory");
  add_common(run_cmd, &run_args, true);
  CLI::App* ens_cmd =
      app.add_subcommand("ensemble", "Run a Monte-Carlo ensemble");
  add_common(ens_cmd, &ens_args, true);
  CLI::App* lemma_cmd = app.add_subcommand(
      "verify-lemma", "Verify the drift lower bound by Monte Carlo");
  add_common(lemma_cmd, &lemma_args, true);
  CLI::App* audit_cmd = app.add_subcommand(
      "audit-noise", "Audit the bounded effective noise");
  add_common(audit_cmd, &audit_args, true);

  double r_delta = 0.75, r_a = 1.0, r_c = 1.0, r_l = 1.0, r_minab2 = 1.0;
  double r_mu = 0.0, r_gradsq = 0.0, r_x = -1.0;
  CLI::App* rates_cmd = app.add_subcommand(
      "rates", "Print the tail decay rate and rate-function coefficient");
  rates_cmd->add_option("--delta", r_delta, "Step exponent in (1/2, 1)")->required();
  rates_cmd->add_option("--a", r_a, "Step scale");
  rates_cmd->add_option("--C", r_c, "Nonlinearity bound");
  rates_cmd->add_option("--L", r_l, "Smoothness constant");
  rates_cmd->add_option("--minab2", r_minab2, "min{alpha^2, beta^2}");
  rates_cmd->add_option("--mu", r_mu, "Strong convexity (averaged-iterate variant)");
  rates_cmd->add_option("--grad-init-sq", r_gradsq,
                        "||grad f(x_1)||^2 (needed for delta > 3/4)");
  rates_cmd->add_option("--x", r_x, "Also evaluate I(x) at this point");

  double b_a = 1.0, b_delta = 0.7, b_beta = 1.0, b_c = 1.0, b_l = 1.0,
         b_fgap = 1.0, b_gradsq = 1.0;
  CLI::App* burnin_cmd =
      app.add_subcommand("burnin", "Print the explicit MSE burn-in iteration");
  burnin_cmd->add_option("--a", b_a, "Step scale")->required();
  burnin_cmd->add_option("--delta", b_delta, "Step exponent in (2/3, 3/4)")->required();
  burnin_cmd->add_option("--beta", b_beta, "Drift constant beta")->required();
  burnin_cmd->add_option("--C", b_c, "Nonlinearity bound")->required();
  burnin_cmd->add_option("--L", b_l, "Smoothness constant")->required();
  burnin_cmd->add_option("--fgap0", b_fgap, "Initial optimality gap")->required();
  burnin_cmd->add_option("--gradsq0", b_gradsq, "Initial gradient norm squared")
      ->required();

  double l_c = 1.0, l_x = 0.0, l_lmax = 10.0, l_step = 1e-4;
  CLI::App* legendre_cmd = app.add_subcommand(
      "legendre", "Numeric Fenchel-Legendre transform of c*lambda^2");
  legendre_cmd->add_option("--c", l_c, "Quadratic coefficient")->required();
  legendre_cmd->add_option("--x", l_x, "Evaluation point")->required();
  legendre_cmd->add_option("--lambda-max", l_lmax, "Grid extent");
  legendre_cmd->add_option("--step", l_step, "Grid step");

  CLI::App* version_cmd = app.add_subcommand("version", "Print version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (ens_cmd->parsed()) return cmd_ensemble(ens_args);
    if (lemma_cmd->parsed()) return cmd_verify_lemma(lemma_args);
    if (audit_cmd->parsed()) return cmd_audit_noise(audit_args);
    if (rates_cmd->parsed()) {
      const htsgd::RateFunction rf =
          r_mu > 0.0 ? htsgd::rate_function_strongly_convex(
                           r_delta, r_a, r_minab2, r_c, r_l, r_mu, r_gradsq)
                     : htsgd::rate_function(r_delta, r_a, r_minab2, r_c, r_l,
                                            r_gradsq);
      const nlohmann::json j = htsgd::rate_function_json(rf);
      std::cout << "regime: " << j["regime"].get<std::string>() << "\n"
                << "decay rate: n_t = " << j["decay_rate"].get<std::string>()
                << "\n"
                << "coefficient: " << htsgd::format_double(rf.coefficient)
                << "\n"
                << "I(x) = coefficient * " << j["shape"].get<std::string>()
                << ", +inf for x < 0\n";
      if (r_x >= 0.0) {
        std::cout << "I(" << htsgd::format_double(r_x)
                  << ") = " << htsgd::format_double(rf(r_x)) << "\n";
        if (!rf.mu)
          std::cout << "I_via_contraction(" << htsgd::format_double(r_x)
                    << ") = "
                    << htsgd::format_double(htsgd::contraction_transform(rf, r_x))
                    << "\n";
      }
      return 0;
    }
    if (burnin_cmd->parsed()) {
      const double burnin = htsgd::mse_burnin(b_a, b_delta, b_beta, b_c,
                                                     b_l, b_fgap, b_gradsq);
      std::cout << "burn-in iteration: " << htsgd::format_double(burnin) << "\n";
      return 0;
    }
    if (legendre_cmd->parsed()) {
      htsgd::LegendreGrid grid;
      grid.lambda_max = l_lmax;
      grid.step = l_step;
      std::cout << htsgd::format_double(
                       htsgd::legendre_transform_numeric(l_c, l_x, grid))
                << "\n";
      return 0;
    }
    if (version_cmd->parsed()) {
      std::cout << "htsgd " << kVersion << "\n";
      return 0;
    }
  } catch (const htsgd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const htsgd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
