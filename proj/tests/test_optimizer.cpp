#include <cmath>

#include "doctest.h"
#include "htsgd/errors.hpp"
#include "htsgd/optimizer.hpp"

using htsgd::NoiseModel;
using htsgd::Nonlinearity;
using htsgd::Problem;
using htsgd::Rng;
using htsgd::RunConfig;
using htsgd::StepSchedule;
using htsgd::TrajectoryRecord;
using htsgd::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

RunConfig zero_noise_quadratic() {
  RunConfig cfg;
  cfg.schedule = StepSchedule(1.0, 0.5);
  cfg.horizon = 200;
  cfg.seed = 1;
  cfg.nonlinearity = Nonlinearity::joint_clip(1.0);
  cfg.problem = Problem::quadratic(vec({1.0}), vec({0.0}));
  cfg.noise = NoiseModel::gaussian(1e-12, 1);
  cfg.x_init = vec({4.0});
  return cfg;
}

}  // namespace

TEST_CASE("schedule validation and monotonicity") {
  CHECK_THROWS_AS(StepSchedule(0.0, 0.5), htsgd::DomainError);
  CHECK_THROWS_AS(StepSchedule(1.0, 0.49), htsgd::DomainError);
  CHECK_THROWS_AS(StepSchedule(1.0, 1.0), htsgd::DomainError);
  const StepSchedule s(2.0, 0.75);
  double prev = std::numeric_limits<double>::infinity();
  double n_t = 0.0, prev_n = 0.0;
  for (long t = 1; t <= 1000; ++t) {
    const double eta = s.eta(t);
    CHECK(eta < prev);
    prev = eta;
    n_t += eta;
    CHECK(n_t > prev_n);
    prev_n = n_t;
  }
}

TEST_CASE("single step examples") {
  RunConfig cfg = zero_noise_quadratic();
  Rng rng(1);
  const Vector x1 = step(vec({4.0}), 1, cfg, rng);
  CHECK(x1[0] == doctest::Approx(3.2928932188134525));

  RunConfig sign_cfg;
  sign_cfg.schedule = StepSchedule(1.0, 0.5);
  sign_cfg.horizon = 10;
  sign_cfg.nonlinearity = Nonlinearity::sign();
  sign_cfg.problem = Problem::quadratic(vec({1.0, 1.0}), vec({0.0, 0.0}));
  sign_cfg.noise = NoiseModel::gaussian(1e-12, 2);
  sign_cfg.x_init = vec({2.0, -3.0});
  Rng rng2(1);
  const Vector x2 = step(vec({2.0, -3.0}), 1, sign_cfg, rng2);
  CHECK(x2[0] == doctest::Approx(1.2928932188134525));
  CHECK(x2[1] == doctest::Approx(-2.2928932188134525));
}

TEST_CASE("movement per step is bounded by eta * C") {
  RunConfig cfg;
  cfg.schedule = StepSchedule(0.7, 0.6);
  cfg.horizon = 50;
  cfg.nonlinearity = Nonlinearity::sign();
  cfg.problem = Problem::smooth_nonconvex(3, 1.0);
  cfg.noise = NoiseModel::power_law(2.5, 3);
  cfg.x_init = vec({1.0, -2.0, 0.5});
  Rng rng(5);
  Vector x = cfg.x_init;
  for (long t = 1; t <= 50; ++t) {
    const Vector next = step(x, t, cfg, rng);
    CHECK((next - x).norm() <=
          cfg.schedule.eta(t) * cfg.nonlinearity.bound(3) + 1e-12);
    x = next;
  }
}

TEST_CASE("horizon one produces a single row with Z1 = G1") {
  RunConfig cfg = zero_noise_quadratic();
  cfg.horizon = 1;
  cfg.checkpoints = {1};
  const TrajectoryRecord rec = run(cfg);
  REQUIRE(rec.rows.size() == 1);
  CHECK(rec.rows[0].t == 1);
  CHECK(rec.rows[0].z_min == rec.rows[0].g_metric);
  CHECK(rec.rows[0].x_min ==
        rec.rows[0].grad_norm * rec.rows[0].grad_norm);
  CHECK(rec.rows[0].weighted_g == doctest::Approx(rec.rows[0].g_metric));
}

TEST_CASE("zero-noise descent decreases the gap monotonically") {
  RunConfig cfg = zero_noise_quadratic();
  cfg.checkpoints = {1, 2, 4, 8, 16, 32, 64, 128};
  const TrajectoryRecord rec = run(cfg);
  REQUIRE(rec.rows.size() == 8);
  for (std::size_t i = 1; i < rec.rows.size(); ++i) {
    if (rec.rows[i].grad_norm > 1e-6)  // above the vanishing-noise floor
      CHECK(rec.rows[i].f_gap < rec.rows[i - 1].f_gap);
  }
  CHECK(rec.rows.back().f_gap < 1e-8);
  CHECK_FALSE(rec.diverged);
  CHECK(rec.envelope_ok);
}

TEST_CASE("identical seeds give bit-identical records") {
  RunConfig cfg;
  cfg.schedule = StepSchedule(0.5, 0.5);
  cfg.horizon = 300;
  cfg.seed = 99;
  cfg.nonlinearity = Nonlinearity::sign();
  cfg.problem = Problem::smooth_nonconvex(4, 1.0);
  cfg.noise = NoiseModel::power_law(2.5, 4);
  cfg.x_init = Vector::Ones(4);
  const TrajectoryRecord a = run(cfg);
  const TrajectoryRecord b = run(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].f_gap == b.rows[i].f_gap);
    CHECK(a.rows[i].weighted_g == b.rows[i].weighted_g);
    CHECK(a.rows[i].pr_gap == b.rows[i].pr_gap);
  }
}

TEST_CASE("running minima are monotone and weighted_G dominates Z_t") {
  RunConfig cfg;
  cfg.schedule = StepSchedule(1.0, 0.6);
  cfg.horizon = 2000;
  cfg.seed = 4;
  cfg.nonlinearity = Nonlinearity::component_clip(1.0);
  cfg.problem = Problem::quadratic(vec({1.0, 5.0}), vec({0.0, 0.0}));
  cfg.noise = NoiseModel::power_law(2.5, 2);
  cfg.x_init = vec({3.0, -2.0});
  const TrajectoryRecord rec = run(cfg);
  double prev_z = std::numeric_limits<double>::infinity();
  double prev_x = std::numeric_limits<double>::infinity();
  for (const auto& row : rec.rows) {
    CHECK(row.z_min <= prev_z);
    CHECK(row.x_min <= prev_x);
    CHECK(row.weighted_g >= row.z_min - 1e-15);
    prev_z = row.z_min;
    prev_x = row.x_min;
  }
  CHECK(rec.envelope_ok);
}

TEST_CASE("gradient-norm envelope holds pathwise") {
  RunConfig cfg;
  cfg.schedule = StepSchedule(2.0, 0.5);
  cfg.horizon = 5000;
  cfg.seed = 21;
  cfg.nonlinearity = Nonlinearity::sign();
  cfg.problem = Problem::quadratic(vec({0.5, 2.0, 10.0}), vec({0.0, 0.0, 0.0}));
  cfg.noise = NoiseModel::power_law(2.2, 3);
  cfg.x_init = vec({5.0, 5.0, 5.0});
  const TrajectoryRecord rec = run(cfg);
  CHECK(rec.envelope_ok);
  const double c = cfg.nonlinearity.bound(3);
  const double l = cfg.problem.smoothness();
  for (const auto& row : rec.rows)
    CHECK(row.grad_norm <= l * c * row.step_sum + rec.grad_init_norm + 1e-9);
}

TEST_CASE("identity baseline triggers the divergence guard") {
  RunConfig cfg;
  cfg.schedule = StepSchedule(1.0, 0.5);
  cfg.horizon = 1000;
  cfg.seed = 3;
  cfg.nonlinearity = Nonlinearity::identity_baseline();
  cfg.problem = Problem::quadratic(vec({1e6}), vec({0.0}));
  cfg.noise = NoiseModel::gaussian(1.0, 1);
  cfg.x_init = vec({1.0});
  const TrajectoryRecord rec = run(cfg);
  CHECK(rec.diverged);
  CHECK(rec.diverged_at > 0);
}

TEST_CASE("random stop index frequencies match the step weights") {
  const StepSchedule s(1.0, 0.5);
  Rng rng(7);
  CHECK(random_stop_index(s, 1, rng) == 1);
  long count1 = 0;
  const long n = 100000;
  for (long i = 0; i < n; ++i)
    if (random_stop_index(s, 2, rng) == 1) ++count1;
  // eta_1/N_2 and eta_2/N_2
  const double p1 = 0.5505102572168219;
  const auto [lo, hi] = htsgd::wilson_interval(count1, n, htsgd::kZ99);
  CHECK(lo <= p1);
  CHECK(p1 <= hi);
  CHECK_THROWS_AS(random_stop_index(s, 0, rng), htsgd::DomainError);
}

TEST_CASE("polyak-ruppert averaging") {
  CHECK(htsgd::polyak_ruppert({vec({3.0, 1.0})}) == vec({3.0, 1.0}));
  CHECK(htsgd::polyak_ruppert({vec({0.0, 0.0}), vec({2.0, 2.0})}) == vec({1.0, 1.0}));
  CHECK(htsgd::polyak_ruppert({vec({5.0}), vec({5.0}), vec({5.0})}) == vec({5.0}));
  CHECK_THROWS_AS(htsgd::polyak_ruppert({}), htsgd::DomainError);
}

TEST_CASE("default checkpoints are log-spaced, bounded and inclusive") {
  for (long horizon : {1L, 10L, 1000L, 100000L, 10000000L}) {
    const std::vector<long> cps = htsgd::default_checkpoints(horizon);
    REQUIRE(!cps.empty());
    CHECK(cps.front() == 1);
    CHECK(cps.back() == horizon);
    CHECK(cps.size() <= 256);
    for (std::size_t i = 1; i < cps.size(); ++i) CHECK(cps[i] > cps[i - 1]);
  }
}

TEST_CASE("config validation rejects bad checkpoints") {
  RunConfig cfg = zero_noise_quadratic();
  cfg.checkpoints = {5, 5};
  CHECK_THROWS_AS(cfg.validate(), htsgd::DomainError);
  cfg.checkpoints = {0};
  CHECK_THROWS_AS(cfg.validate(), htsgd::DomainError);
  cfg.checkpoints = {cfg.horizon + 1};
  CHECK_THROWS_AS(cfg.validate(), htsgd::DomainError);
}
