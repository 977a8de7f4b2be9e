#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "boxres/error.hpp"
#include "boxres/potential.hpp"

using namespace boxres;

TEST_CASE("finite-range part") {
    const PotentialSpec spec{7.5, -1.0, 0};
    CHECK(eval_finite_range(spec, 2.0) == doctest::Approx(30.0 * std::exp(-2.0)).epsilon(1e-15));
    CHECK(eval_finite_range(spec, 2.0) == doctest::Approx(4.060058).epsilon(1e-7));
    CHECK(eval_finite_range({0.0, -1.0, 0}, 5.0) == 0.0);

    // r^2 e^-r peaks at r = 2
    const double peak = eval_finite_range(spec, 2.0);
    CHECK(eval_finite_range(spec, 2.0 - 1e-4) < peak);
    CHECK(eval_finite_range(spec, 2.0 + 1e-4) < peak);

    for (double r = 60.0; r <= 200.0; r += 0.5) {
        CHECK(std::fabs(eval_finite_range(spec, r)) < 1e-12);
    }
}

TEST_CASE("total and effective potential") {
    CHECK(eval_total({7.5, -1.0, 0}, 2.0) == doctest::Approx(3.560058).epsilon(1e-6));
    CHECK(eval_total({7.5, 0.0, 0}, 3.3) == eval_finite_range({7.5, 0.0, 0}, 3.3));
    CHECK(eval_total({0.0, -1.0, 0}, 1.0) == -1.0);

    CHECK(eval_effective({7.5, -1.0, 0}, 1.7) == eval_total({7.5, -1.0, 0}, 1.7));
    CHECK(eval_effective({0.0, 0.0, 1}, 1.0) == 1.0);
}

TEST_CASE("Coulomb tail is exactly z/r") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(1e-3, 100.0);
    const PotentialSpec spec{7.5, -1.0, 0};
    for (int i = 0; i < 1000; ++i) {
        const double r = dist(rng);
        const double v = eval_finite_range(spec, r);
        CHECK(eval_total(spec, r) == v + spec.z / r);
    }
}

TEST_CASE("effective potential is finite on the integration grid") {
    for (int l = 0; l <= 4; ++l) {
        const PotentialSpec spec{7.5, -1.0, l};
        for (double r = 1e-6; r <= 40.0; r *= 1.01) {
            CHECK(std::isfinite(eval_effective(spec, r)));
        }
    }
}

TEST_CASE("barrier shapes of the model potential") {
    // s wave: barrier top between 3 and 4 (dense scan gives 3.57434 at r = 2.1167)
    const PotentialSpec s{7.5, -1.0, 0};
    double top = -1e300;
    double r_top = 0.0;
    for (double r = 0.5; r <= 10.0; r += 1e-4) {
        if (eval_total(s, r) > top) {
            top = eval_total(s, r);
            r_top = r;
        }
    }
    CHECK(top > 3.0);
    CHECK(top < 4.0);
    CHECK(top == doctest::Approx(3.57434).epsilon(1e-5));
    CHECK(r_top == doctest::Approx(2.1167).epsilon(1e-3));

    // d wave: no pocket at all on (1, 4). V_eff falls monotonically with a
    // shoulder whose flattest slope, from a dense scan, is -0.07814 at r = 1.505.
    const PotentialSpec d{7.5, -1.0, 2};
    const double h = 1e-4;
    double flattest = -1e300;
    double r_flat = 0.0;
    for (double r = 1.0 + h; r < 4.0 - h; r += h) {
        const double slope = (eval_effective(d, r + h) - eval_effective(d, r - h)) / (2.0 * h);
        CHECK(slope < 0.0);
        if (slope > flattest) {
            flattest = slope;
            r_flat = r;
        }
    }
    CHECK(flattest == doctest::Approx(-0.078142).epsilon(1e-4));
    CHECK(r_flat == doctest::Approx(1.505).epsilon(1e-3));
}

TEST_CASE("domain errors") {
    const PotentialSpec spec;
    CHECK_THROWS_AS(eval_finite_range(spec, 0.0), DomainError);
    CHECK_THROWS_AS(eval_total(spec, -1.0), DomainError);
    CHECK_THROWS_AS(eval_effective(spec, 0.0), DomainError);
    CHECK_THROWS_AS(validate(PotentialSpec{7.5, -1.0, -1}), DomainError);
    CHECK_THROWS_AS(validate(PotentialSpec{NAN, -1.0, 0}), DomainError);
}
