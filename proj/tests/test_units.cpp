#include <cmath>
#include <limits>

#include "darwin/dynamics.hpp"
#include "darwin/errors.hpp"
#include "darwin/noise.hpp"
#include "darwin/units.hpp"
#include "doctest.h"

using namespace darwin;

TEST_SUITE("units") {
  TEST_CASE("default system is atomic-like Gaussian") {
    const UnitSystem u;
    CHECK(u.c() == 137.036);
    CHECK(u.hbar() == 1.0);
    CHECK(u.kB() == 1.0);
    CHECK_FALSE(u.classical());
    CHECK(make_units().c() == u.c());
  }

  TEST_CASE("quasi-nonrelativistic and classical systems") {
    const auto fast = make_units(1e6, 1.0, 1.0);
    CHECK(fast.inv_c2() == doctest::Approx(1e-12).epsilon(1e-15));
    const auto cl = make_units(137.036, 0.0, 1.0);
    CHECK(cl.classical());
  }

  TEST_CASE("invalid parameters are rejected") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(make_units(0.0), InvalidArgument);
    CHECK_THROWS_AS(make_units(-1.0), InvalidArgument);
    CHECK_THROWS_AS(make_units(nan), InvalidArgument);
    CHECK_THROWS_AS(make_units(137.0, -1.0), InvalidArgument);
    CHECK_THROWS_AS(make_units(137.0, 1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(make_units(137.0, 1.0, std::numeric_limits<double>::infinity()), InvalidArgument);
  }

  TEST_CASE("beta from temperature") {
    const auto u = make_units(137.036, 1.0, 2.0);
    CHECK(u.beta(0.25) == 2.0);
    CHECK_THROWS_AS(u.beta(0.0), InvalidArgument);
    CHECK_THROWS_AS(u.beta(-1.0), InvalidArgument);
  }

  TEST_CASE("doubling c quarters every Darwin pair energy") {
    dynamics::ParticleSet ps;
    ps.add(1.0, 1.0, {0.0, 0.0, 0.0}, {0.3, -0.2, 0.1});
    ps.add(-2.0, 3.0, {1.0, 0.5, -0.2}, {-0.1, 0.4, 0.2});
    ps.add(1.5, 0.5, {-0.7, 0.9, 0.4}, {0.2, 0.0, -0.6});
    const double e1 = dynamics::energy_terms(ps, make_units(20.0)).darwin;
    const double e2 = dynamics::energy_terms(ps, make_units(40.0)).darwin;
    CHECK(e1 != 0.0);
    CHECK(std::abs(e2 / e1 - 0.25) < 1e-15);
  }

  TEST_CASE("hbar = 0 gives the classical coth limit without NaN") {
    for (double w : {0.0, 1e-9, 1.0, 1e6}) {
      const double v = noise::coth_weight(w, 2.0, 0.0);
      CHECK(std::isfinite(v));
      CHECK(v == 2.0);
    }
  }
}
