#include <doctest.h>

#include <cmath>

#include "cslab/geometry.hpp"
#include "cslab/rng.hpp"

using namespace cslab;

TEST_CASE("wrap_position maps into the fundamental domain") {
    Domain t1 = Domain::torus(1);
    CHECK(wrap_position({7.0}, t1)[0] == doctest::Approx(7.0 - kTwoPi).epsilon(1e-14));
    CHECK(wrap_position({0.0}, t1)[0] == 0.0);
    CHECK(wrap_position({kTwoPi}, t1)[0] == 0.0);
    CHECK(wrap_position({-0.5}, t1)[0] == doctest::Approx(kTwoPi - 0.5));

    Domain o2 = Domain::open(2);
    Vec x{-5.0, 9.0};
    CHECK(wrap_position(x, o2) == x);
}

TEST_CASE("wrap_position rejects bad input") {
    Domain t1 = Domain::torus(1);
    CHECK_THROWS_AS(wrap_position({std::nan("")}, t1), InvalidState);
    CHECK_THROWS_AS(wrap_position({1.0, 2.0}, t1), InvalidState);
    CHECK_THROWS_AS(Domain::torus(0), InvalidState);
    CHECK_THROWS_AS(Domain::torus(1, -1.0), InvalidState);
}

TEST_CASE("displacement takes the minimal image") {
    Domain t1 = Domain::torus(1);
    // 0.1 - 6.2 = -6.1, whose representative is -6.1 + 2*pi
    CHECK(displacement({0.1}, {6.2}, t1)[0] ==
          doctest::Approx(0.1 - 6.2 + kTwoPi).epsilon(1e-14));

    Domain o2 = Domain::open(2);
    Vec d = displacement({3.0, 4.0}, {0.0, 0.0}, o2);
    CHECK(d[0] == 3.0);
    CHECK(d[1] == 4.0);
    CHECK(distance({3.0, 4.0}, {0.0, 0.0}, o2) == doctest::Approx(5.0));

    // antipodal tie canonicalizes to -period/2
    double pi = 0.5 * kTwoPi;
    CHECK(displacement({pi}, {0.0}, t1)[0] == doctest::Approx(-pi));
    CHECK(displacement({0.0}, {pi}, t1)[0] == doctest::Approx(-pi));

    CHECK_THROWS_AS(displacement({1.0}, {1.0, 2.0}, t1), InvalidState);
}

TEST_CASE("unit-period torus is supported") {
    Domain t = Domain::torus(1, 1.0);
    CHECK(wrap_position({1.25}, t)[0] == doctest::Approx(0.25));
    CHECK(displacement({0.1}, {0.9}, t)[0] == doctest::Approx(0.2));
}

TEST_CASE("distance symmetry, bound and wrap idempotence on random points") {
    SplitMix64 rng(12345);
    for (int n : {1, 2, 3}) {
        Domain d = Domain::torus(n);
        for (int rep = 0; rep < 200; ++rep) {
            Vec x(n), y(n);
            for (int k = 0; k < n; ++k) {
                x[static_cast<size_t>(k)] = rng.uniform(-20.0, 20.0);
                y[static_cast<size_t>(k)] = rng.uniform(-20.0, 20.0);
            }
            double dxy = distance(x, y, d);
            CHECK(dxy == doctest::Approx(distance(y, x, d)).epsilon(1e-15));
            CHECK(dxy <= std::sqrt(static_cast<double>(n)) * kTwoPi / 2.0 + 1e-12);

            Vec w = wrap_position(x, d);
            CHECK(wrap_position(w, d) == w);

            // displacement antisymmetry away from the tie set
            Vec dp = displacement(x, y, d);
            Vec dm = displacement(y, x, d);
            for (int k = 0; k < n; ++k) {
                if (std::fabs(std::fabs(dp[static_cast<size_t>(k)]) - kTwoPi / 2.0) < 1e-9)
                    continue;
                CHECK(dp[static_cast<size_t>(k)] ==
                      doctest::Approx(-dm[static_cast<size_t>(k)]).epsilon(1e-12));
            }
        }
    }
}
