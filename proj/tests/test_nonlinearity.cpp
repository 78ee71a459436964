#include <cmath>

#include "doctest.h"
#include "htsgd/errors.hpp"
#include "htsgd/nonlinearity.hpp"
#include "htsgd/rng.hpp"

using htsgd::Nonlinearity;
using htsgd::NonlinearityClass;
using htsgd::Rng;
using htsgd::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("apply examples") {
  CHECK(apply(Nonlinearity::sign(), vec({1.5, -0.2, 0.0})) ==
        vec({1.0, -1.0, 0.0}));
  const Vector clipped = apply(Nonlinearity::joint_clip(1.0), vec({3.0, 4.0}));
  CHECK(clipped[0] == doctest::Approx(0.6));
  CHECK(clipped[1] == doctest::Approx(0.8));
  CHECK(apply(Nonlinearity::normalize(), vec({0.0, 0.0})) == vec({0.0, 0.0}));
  CHECK(apply(Nonlinearity::component_clip(2.0), vec({-5.0, 1.0})) ==
        vec({-2.0, 1.0}));
  CHECK(apply(Nonlinearity::identity_baseline(), vec({7.0, -3.0})) ==
        vec({7.0, -3.0}));
}

TEST_CASE("scalar maps") {
  CHECK(Nonlinearity::sign().scalar_n1(-3.0) == -1.0);
  CHECK(Nonlinearity::component_clip(0.5).scalar_n1(0.3) == 0.3);
  const Nonlinearity q = Nonlinearity::quantize({-1.0, 1.0}, {-2.0, 0.0, 2.0});
  CHECK(q.scalar_n1(1.0) == 0.0);   // (-1, 1] maps to the middle value
  CHECK(q.scalar_n1(1.0 + 1e-12) == 2.0);
  CHECK(q.scalar_n1(-1.0) == -2.0);  // threshold maps to the lower cell
  CHECK(Nonlinearity::joint_clip(2.0).scalar_n2(1.0) == doctest::Approx(1.0));
  CHECK(Nonlinearity::normalize().scalar_n2(4.0) == doctest::Approx(0.25));
  CHECK(Nonlinearity::joint_clip(2.0).scalar_n2(8.0) == doctest::Approx(0.25));
  CHECK(Nonlinearity::joint_clip(2.0).scalar_n2(0.0) == 1.0);
}

TEST_CASE("classification and misuse errors") {
  CHECK(Nonlinearity::sign().classification() ==
        NonlinearityClass::kComponentWise);
  CHECK(Nonlinearity::normalize().classification() == NonlinearityClass::kJoint);
  CHECK(Nonlinearity::identity_baseline().classification() ==
        NonlinearityClass::kBaseline);
  CHECK_THROWS_AS(Nonlinearity::normalize().scalar_n1(1.0),
                  htsgd::ClassificationError);
  CHECK_THROWS_AS(Nonlinearity::sign().scalar_n2(1.0),
                  htsgd::ClassificationError);
}

TEST_CASE("bounds") {
  CHECK(Nonlinearity::sign().bound(4) == doctest::Approx(2.0));
  CHECK(Nonlinearity::component_clip(0.5).bound(4) == doctest::Approx(1.0));
  CHECK(Nonlinearity::quantize({-1.0, 1.0}, {-2.0, 0.0, 2.0}).bound(9) ==
        doctest::Approx(6.0));
  CHECK(Nonlinearity::joint_clip(3.0).bound(100) == 3.0);
  CHECK(Nonlinearity::normalize().bound(100) == 1.0);
  CHECK(std::isinf(Nonlinearity::identity_baseline().bound(1)));
  CHECK_FALSE(Nonlinearity::identity_baseline().conforming());
}

TEST_CASE("quantizer construction validates shape") {
  CHECK_THROWS_AS(Nonlinearity::quantize({1.0, -1.0}, {-1.0, 0.0, 1.0}),
                  htsgd::DomainError);
  CHECK_THROWS_AS(Nonlinearity::quantize({-1.0, 1.0}, {1.0, 0.0, -1.0}),
                  htsgd::DomainError);
  CHECK_THROWS_AS(Nonlinearity::quantize({-1.0, 2.0}, {-1.0, 0.0, 1.0}),
                  htsgd::DomainError);
  CHECK_THROWS_AS(Nonlinearity::quantize({-1.0, 1.0}, {-1.0, 0.5, 1.0}),
                  htsgd::DomainError);
  const Nonlinearity dflt = Nonlinearity::default_quantizer(2.0);
  CHECK(dflt.scalar_n1(1.0) == 0.0);
  CHECK(dflt.scalar_n1(1.001) == 2.0);
  CHECK(dflt.scalar_n1(-3.0) == -2.0);
}

TEST_CASE("oddness holds exactly on random vectors") {
  Rng rng(2);
  const std::vector<Nonlinearity> menu = {
      Nonlinearity::sign(), Nonlinearity::component_clip(0.7),
      Nonlinearity::default_quantizer(1.5), Nonlinearity::joint_clip(2.0),
      Nonlinearity::normalize()};
  for (int i = 0; i < 1000; ++i) {
    Vector v(3);
    for (int k = 0; k < 3; ++k) v[k] = 10.0 * (rng.uniform_open01() - 0.5);
    for (const Nonlinearity& nl : menu) {
      const Vector lhs = apply(nl, Vector(-v));
      const Vector rhs = -apply(nl, v);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("boundedness up to huge inputs") {
  Rng rng(3);
  const std::vector<Nonlinearity> menu = {
      Nonlinearity::sign(), Nonlinearity::component_clip(0.7),
      Nonlinearity::default_quantizer(1.5), Nonlinearity::joint_clip(2.0),
      Nonlinearity::normalize()};
  for (int i = 0; i < 1000; ++i) {
    const double scale = std::pow(10.0, 6.0 * rng.uniform_open01());
    Vector v(4);
    for (int k = 0; k < 4; ++k) v[k] = scale * (rng.uniform_open01() - 0.5);
    for (const Nonlinearity& nl : menu)
      CHECK(apply(nl, v).norm() <= nl.bound(4) + 1e-12);
  }
}

TEST_CASE("component-wise maps are non-decreasing") {
  Rng rng(4);
  const std::vector<Nonlinearity> menu = {Nonlinearity::sign(),
                                          Nonlinearity::component_clip(0.7),
                                          Nonlinearity::default_quantizer(1.5)};
  for (int i = 0; i < 1000; ++i) {
    double x = 20.0 * (rng.uniform_open01() - 0.5);
    double y = 20.0 * (rng.uniform_open01() - 0.5);
    if (x > y) std::swap(x, y);
    for (const Nonlinearity& nl : menu)
      CHECK(nl.scalar_n1(x) <= nl.scalar_n1(y));
  }
}

TEST_CASE("joint rescale maps are monotone in the required directions") {
  for (const Nonlinearity& nl :
       {Nonlinearity::joint_clip(2.0), Nonlinearity::normalize()}) {
    double prev_a_n2 = 0.0;
    double prev_n2 = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 1000; ++k) {
      const double a = 1000.0 * k / 1000.0;
      const double n2 = nl.scalar_n2(a);
      CHECK(n2 > 0.0);
      CHECK(a * n2 >= prev_a_n2 - 1e-12);   // a * N2(a) non-decreasing
      CHECK(n2 <= prev_n2 + 1e-12);         // N2 non-increasing
      prev_a_n2 = a * n2;
      prev_n2 = n2;
    }
  }
}

TEST_CASE("sign is discontinuous at zero") {
  CHECK(Nonlinearity::sign().scalar_n1(1e-12) == 1.0);
  CHECK(Nonlinearity::sign().scalar_n1(-1e-12) == -1.0);
  CHECK(Nonlinearity::sign().scalar_n1(0.0) == 0.0);
}
