#include <cmath>

#include "doctest.h"
#include "htsgd/errors.hpp"
#include "htsgd/problems.hpp"

using htsgd::NoiseModel;
using htsgd::Problem;
using htsgd::Rng;
using htsgd::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector random_vec(Rng& rng, int d, double scale) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * (rng.uniform_open01() - 0.5);
  return v;
}

}  // namespace

TEST_CASE("value examples") {
  const Problem q = Problem::quadratic(vec({1.0, 4.0}), vec({0.0, 0.0}));
  CHECK(q.value(vec({2.0, 1.0})) == doctest::Approx(4.0));
  CHECK(q.smoothness() == 4.0);
  CHECK(*q.strong_convexity() == 1.0);
  CHECK(q.optimum_value() == 0.0);

  const Problem nc1 = Problem::smooth_nonconvex(3, 1.0);
  CHECK(nc1.value(vec({0.0, 0.0, 0.0})) == 0.0);
  const Problem nc2 = Problem::smooth_nonconvex(1, 2.0);
  CHECK(nc2.value(vec({1.0})) == doctest::Approx(1.0));
  CHECK(nc2.smoothness() == doctest::Approx(4.0));
  CHECK_FALSE(nc2.strong_convexity().has_value());
}

TEST_CASE("gradient examples") {
  const Problem q = Problem::quadratic(vec({1.0, 4.0}), vec({0.0, 0.0}));
  CHECK(q.grad(vec({2.0, 1.0})) == vec({2.0, 4.0}));
  CHECK(q.grad(q.optimum_point()).norm() == 0.0);
  const Problem nc = Problem::smooth_nonconvex(1, 1.0);
  CHECK(nc.grad(vec({1.0}))[0] == doctest::Approx(0.5));
  CHECK(nc.grad(vec({0.0}))[0] == 0.0);
}

TEST_CASE("central differences match the exact gradient") {
  Rng rng(8);
  const Problem probs[] = {
      Problem::quadratic(vec({1.0, 2.5, 7.0}), vec({0.3, -1.0, 2.0})),
      Problem::smooth_nonconvex(3, 1.7)};
  for (const Problem& p : probs) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x = random_vec(rng, 3, 4.0);
      const Vector g = p.grad(x);
      for (int i = 0; i < 3; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (p.value(xp) - p.value(xm)) / (2.0 * h);
        CHECK(fd == doctest::Approx(g[i]).epsilon(1e-6).scale(
                        std::max(1.0, std::abs(g[i]))));
      }
    }
  }
}

TEST_CASE("quadratic satisfies the strong convexity inequality exactly") {
  Rng rng(9);
  const Problem q = Problem::quadratic(vec({1.0, 3.0, 9.0}), vec({0.0, 1.0, -2.0}));
  const double mu = *q.strong_convexity();
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector x = random_vec(rng, 3, 6.0);
    const Vector y = random_vec(rng, 3, 6.0);
    const double lhs = q.value(y);
    const double rhs = q.value(x) + q.grad(x).dot(y - x) +
                       0.5 * mu * (y - x).squaredNorm();
    CHECK(lhs >= rhs - 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("gradients are Lipschitz with constant L") {
  Rng rng(10);
  const Problem probs[] = {
      Problem::quadratic(vec({1.0, 2.5, 7.0}), vec({0.0, 0.0, 0.0})),
      Problem::smooth_nonconvex(3, 1.3)};
  for (const Problem& p : probs) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = random_vec(rng, 3, 8.0);
      const Vector y = random_vec(rng, 3, 8.0);
      CHECK((p.grad(x) - p.grad(y)).norm() <=
            p.smoothness() * (x - y).norm() + 1e-9);
    }
  }
}

TEST_CASE("smooth-nonconvex gradient vanishes only at the origin") {
  const Problem p = Problem::smooth_nonconvex(1, 1.0);
  for (double x = 0.25; x < 64.0; x *= 2.0) {
    CHECK(p.grad(vec({x}))[0] > 0.0);
    CHECK(p.grad(vec({-x}))[0] < 0.0);
    CHECK(p.value(vec({x})) >= 0.0);
  }
}

TEST_CASE("noisy gradient reduces to the exact one for vanishing noise") {
  const Problem q = Problem::quadratic(vec({1.0, 4.0}), vec({0.0, 0.0}));
  const NoiseModel tiny = NoiseModel::gaussian(1e-12, 2);
  Rng rng(12);
  const Vector x = vec({2.0, 1.0});
  CHECK((q.noisy_grad(x, tiny, rng) - q.grad(x)).norm() < 1e-9);
}

TEST_CASE("noisy gradient is deterministic given the seed") {
  const Problem q = Problem::quadratic(vec({1.0, 4.0}), vec({0.0, 0.0}));
  const NoiseModel noise = NoiseModel::power_law(2.5, 2);
  Rng a(77), b(77);
  const Vector x = vec({1.0, -1.0});
  CHECK(q.noisy_grad(x, noise, a) == q.noisy_grad(x, noise, b));
}

TEST_CASE("noise enters additively with zero mean") {
  const Problem q = Problem::quadratic(vec({2.0}), vec({0.0}));
  const NoiseModel noise = NoiseModel::power_law(4.0, 1);
  Rng rng(13);
  const Vector x = vec({3.0});
  const Vector g = q.grad(x);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += (q.noisy_grad(x, noise, rng) - g)[0];
  CHECK(std::abs(sum / n) < 0.02);
}

TEST_CASE("construction validation") {
  CHECK_THROWS_AS(Problem::quadratic(vec({0.0, 1.0}), vec({0.0, 0.0})),
                  htsgd::DomainError);
  CHECK_THROWS_AS(Problem::quadratic(vec({1.0}), vec({0.0, 0.0})),
                  htsgd::DomainError);
  CHECK_THROWS_AS(Problem::smooth_nonconvex(0, 1.0), htsgd::DomainError);
  CHECK_THROWS_AS(Problem::smooth_nonconvex(2, 0.0), htsgd::DomainError);
}
