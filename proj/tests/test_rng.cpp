#include <cmath>

#include "doctest.h"
#include "htsgd/rng.hpp"

using htsgd::Rng;

TEST_CASE("identical seeds replay identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams differ from each other and the base") {
  Rng s0 = Rng::for_stream(7, 0);
  Rng s1 = Rng::for_stream(7, 1);
  Rng s0b = Rng::for_stream(7, 0);
  CHECK(s0.next_u64() == s0b.next_u64());
  Rng s0c = Rng::for_stream(7, 0);
  CHECK(s0c.next_u64() != s1.next_u64());
}

TEST_CASE("uniform draws stay strictly inside (0,1)") {
  Rng rng(1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("gaussian moments") {
  Rng rng(3);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}
