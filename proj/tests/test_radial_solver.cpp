#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "boxres/error.hpp"
#include "boxres/radial_solver.hpp"

using namespace boxres;

namespace {

constexpr double kPi = std::numbers::pi;
const PotentialSpec kFree{0.0, 0.0, 0};
const PotentialSpec kHydrogen{0.0, -1.0, 0};
const PotentialSpec kModel{7.5, -1.0, 0};

IntegrationParams box(double r) {
    IntegrationParams p;
    p.box_size = r;
    return p;
}

double free_level(int n, double r) { return (n + 1) * (n + 1) * kPi * kPi / (2.0 * r * r); }

double norm_of(const std::vector<RadialSample>& s, int l) {
    double norm = s.front().psi * s.front().psi * s.front().r / (2.0 * l + 3.0);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        norm += 0.5 * (s[i + 1].r - s[i].r) * (s[i].psi * s[i].psi + s[i + 1].psi * s[i + 1].psi);
    }
    return norm;
}

} // namespace

TEST_CASE("integration parameters") {
    CHECK_NOTHROW(validate(box(10.0)));
    IntegrationParams p = box(10.0);
    p.dr = 2e-3;
    CHECK_THROWS_AS(validate(p), ParameterError);
    p.dr = 0.0;
    CHECK_THROWS_AS(validate(p), ParameterError);
    p = box(10.0);
    p.r0 = 1e-5;
    CHECK_THROWS_AS(validate(p), ParameterError);
    CHECK_THROWS_AS(validate(box(1e-5)), ParameterError);

    const GridPlan plan = plan_grid(box(10.0));
    CHECK(plan.r0 == 1e-4);
    CHECK(plan.steps == 99999);
    CHECK(plan.r0 + plan.step * static_cast<double>(plan.steps) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("shooting the free particle") {
    const double r = 10.0;
    const ShootResult ground = shoot(kFree, box(r), free_level(0, r), true);
    CHECK(ground.node_count == 0);
    const ShootResult off = shoot(kFree, box(r), 0.5 * free_level(0, r));
    // amplitude at R relative to the solution's scale ~ R/pi
    CHECK(std::fabs(ground.psi_at_box) < 1e-8 * std::fabs(off.psi_at_box));
    REQUIRE(!ground.samples.empty());
    CHECK(ground.samples.front().r == 1e-4);
    CHECK(ground.samples.back().r == doctest::Approx(r).epsilon(1e-14));

    const ShootResult first = shoot(kFree, box(r), free_level(1, r) * (1.0 - 1e-9));
    CHECK(first.node_count == 1);
    CHECK(shoot(kFree, box(r), free_level(1, r) * 1.01).node_count == 2);
}

TEST_CASE("amplitude at R changes sign across a tabulated narrow-resonance energy") {
    const double e = 1.780524634;
    const ShootResult below = shoot(kModel, box(20.2045), e - 1e-6);
    const ShootResult above = shoot(kModel, box(20.2045), e + 1e-6);
    CHECK(std::signbit(below.psi_at_box) != std::signbit(above.psi_at_box));
}

TEST_CASE("solve_eigenvalue") {
    const EigenState s = solve_eigenvalue(kFree, box(10.0), 0, {0.01, 0.1});
    CHECK(s.n == 0);
    CHECK(s.energy == doctest::Approx(kPi * kPi / 200.0).epsilon(1e-8));
    CHECK(s.energy == doctest::Approx(0.0493480).epsilon(1e-6));

    const EigenState h = solve_eigenvalue(kHydrogen, box(30.0), 0, {-1.0, -0.2});
    CHECK(std::fabs(h.energy + 0.5) < 1e-6);

    const auto states = list_eigenvalues(kModel, box(20.2045), 1.8, 1000);
    const bool hit = std::any_of(states.begin(), states.end(), [](const EigenState& st) {
        return std::fabs(st.energy - 1.780524634) < 1e-6;
    });
    CHECK(hit);

    CHECK_THROWS_AS(solve_eigenvalue(kFree, box(10.0), 0, {0.06, 0.1}), BracketError);
    CHECK_THROWS_AS(solve_eigenvalue(kFree, box(10.0), 0, {0.01, 0.3}), AmbiguityError);
    CHECK_THROWS_AS(solve_eigenvalue(kFree, box(10.0), 0, {0.1, 0.01}), BracketError);
}

TEST_CASE("list_eigenvalues") {
    const auto free = list_eigenvalues(kFree, box(10.0), 1.0, 100);
    REQUIRE(free.size() == 4);
    for (int n = 0; n < 4; ++n) {
        CHECK(free[static_cast<std::size_t>(n)].n == n);
        CHECK(free[static_cast<std::size_t>(n)].energy == doctest::Approx(free_level(n, 10.0)).epsilon(1e-8));
    }
    CHECK(list_eigenvalues(kFree, box(10.0), 1.0, 2).size() == 2);
    CHECK(list_eigenvalues(kFree, box(10.0), 0.01, 5).empty());
    CHECK_THROWS_AS(list_eigenvalues(kFree, box(10.0), 1.0, 0), ParameterError);

    // Model at R = 20: every level is isolated by more than 1e-4, and each one
    // is seen as a single sign change of u(R) on a grid four times finer than
    // the smallest gap.
    const auto model = list_eigenvalues(kModel, box(20.0), 6.0, 1000);
    REQUIRE(model.size() > 10);
    const BoxProblem problem(kModel, box(20.0));
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (i > 0) {
            CHECK(model[i].energy - model[i - 1].energy > 1e-4);
        }
        CHECK(model[i].n == static_cast<int>(i));
        const double gap = i + 1 < model.size() ? model[i + 1].energy - model[i].energy
                                                : model[i].energy - model[i - 1].energy;
        std::vector<double> grid;
        for (int k = -4; k <= 4; ++k) {
            grid.push_back(model[i].energy + 0.25 * gap * k / 4.0 + 0.01 * gap);
        }
        const auto lanes = problem.shoot_many(grid);
        int changes = 0;
        for (std::size_t k = 1; k < lanes.size(); ++k) {
            const double a = std::ldexp(lanes[k - 1].u_end, lanes[k - 1].scale_exp);
            const double b = std::ldexp(lanes[k].u_end, lanes[k].scale_exp);
            changes += (a * b < 0.0) ? 1 : 0;
        }
        CHECK(changes == 1);
    }
}

TEST_CASE("first avoided crossing of the two lowest s branches") {
    // Dense R scan: the n = 0 and n = 1 branches come closest at R = 6.159
    // with a gap of 9.41e-3 straddling E = 1.7805.
    double best = 1e300;
    double best_r = 0.0;
    double mid = 0.0;
    for (double r = 6.14; r <= 6.18; r += 0.001) {
        const BoxProblem problem(kModel, box(r));
        const auto e = problem.solve_range(0, 1);
        if (e[1] - e[0] < best) {
            best = e[1] - e[0];
            best_r = r;
            mid = 0.5 * (e[0] + e[1]);
        }
    }
    CHECK(best == doctest::Approx(9.409e-3).epsilon(2e-3));
    CHECK(best_r == doctest::Approx(6.159).epsilon(5e-4));
    CHECK(std::fabs(mid - 1.7805) < 2e-3);
}

TEST_CASE("normalized wavefunctions") {
    SUBCASE("free particle") {
        const double r = 10.0;
        const EigenState st = solve_eigenvalue(kFree, box(r), 0, {0.01, 0.1});
        const auto s = normalize_and_sample(st, kFree, box(r), 1);
        CHECK(norm_of(s, 0) == doctest::Approx(1.0).epsilon(1e-8));
        double worst = 0.0;
        for (const RadialSample& p : s) {
            worst = std::max(worst, std::fabs(p.psi - std::sqrt(2.0 / r) * std::sin(kPi * p.r / r)));
        }
        CHECK(worst < 1e-6);
        CHECK(s.front().r == 1e-4);
        CHECK(s.back().r == doctest::Approx(r).epsilon(1e-14));
    }
    SUBCASE("hydrogen 1s") {
        const EigenState st = solve_eigenvalue(kHydrogen, box(30.0), 0, {-1.0, -0.2});
        const auto s = normalize_and_sample(st, kHydrogen, box(30.0), 7);
        double worst = 0.0;
        for (const RadialSample& p : s) {
            worst = std::max(worst, std::fabs(p.psi - 2.0 * p.r * std::exp(-p.r)));
        }
        CHECK(worst < 1e-5);
        CHECK(s.back().r == doctest::Approx(30.0).epsilon(1e-14));
    }
    SUBCASE("narrow s resonance is localized") {
        // independent integration of the same state (adaptive RK, rtol 1e-12)
        // gives 0.999752 of the norm inside r < 10
        const IntegrationParams p = box(20.20449629312656);
        const auto states = list_eigenvalues(kModel, p, 1.8, 1000);
        const EigenState& st = states.back();
        REQUIRE(std::fabs(st.energy - 1.7805245) < 1e-6);
        const auto s = normalize_and_sample(st, kModel, p, 1);
        CHECK(norm_of(s, 0) == doctest::Approx(1.0).epsilon(1e-8));
        const double inside = norm_fraction_inside(s, 10.0);
        CHECK(inside > 0.9);
        CHECK(inside == doctest::Approx(0.999752).epsilon(1e-5));
    }
}

TEST_CASE("Sturm monotonicity") {
    const BoxProblem problem(kModel, box(13.0));
    std::int64_t last = -1;
    for (double e = -1.0; e < 8.0; e += 0.013) {
        const auto c = problem.sturm_count(e);
        CHECK(c >= last);
        last = c;
    }
    const auto levels = problem.solve_range(0, 8);
    for (std::size_t i = 1; i < levels.size(); ++i) {
        CHECK(levels[i] > levels[i - 1]);
    }
}

TEST_CASE("grid convergence: halving dr moves eigenvalues by < 1e-8 relative") {
    IntegrationParams fine = box(20.0);
    fine.dr = 5e-5;
    const BoxProblem coarse_problem(kModel, box(20.0));
    const BoxProblem fine_problem(kModel, fine);
    const auto a = coarse_problem.solve_range(0, 14);
    const auto b = fine_problem.solve_range(0, 14);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CAPTURE(i);
        CHECK(std::fabs(a[i] - b[i]) <= 1e-8 * std::fabs(b[i]));
    }
}

TEST_CASE("converged states vanish at the wall and have n nodes") {
    for (int l = 0; l <= 2; ++l) {
        const PotentialSpec spec{7.5, -1.0, l};
        const IntegrationParams p = box(12.0);
        for (const EigenState& st : list_eigenvalues(spec, p, 6.0, 1000)) {
            const auto s = normalize_and_sample(st, spec, p, 1);
            double peak = 0.0;
            int nodes = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                peak = std::max(peak, std::fabs(s[i].psi));
                if (i > 0 && i + 1 < s.size() && s[i].psi * s[i - 1].psi < 0.0) {
                    ++nodes;
                }
            }
            CAPTURE(l);
            CAPTURE(st.n);
            CHECK(std::fabs(s.back().psi) / peak < 1e-6);
            CHECK(nodes == st.n);
            CHECK(norm_of(s, l) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(s[1].psi > 0.0);
        }
    }
}

TEST_CASE("stale states are rejected") {
    const EigenState st = solve_eigenvalue(kFree, box(10.0), 0, {0.01, 0.1});
    EigenState moved = st;
    moved.energy *= 1.001;
    CHECK_THROWS_AS(normalize_and_sample(moved, kFree, box(10.0)), StaleStateError);
    EigenState wrong_n = st;
    wrong_n.n = 1;
    CHECK_THROWS_AS(normalize_and_sample(wrong_n, kFree, box(10.0)), StaleStateError);
    EigenState other_box = st;
    other_box.box_size = 11.0;
    CHECK_THROWS_AS(normalize_and_sample(other_box, kFree, box(11.0)), StaleStateError);
    CHECK_THROWS_AS(normalize_and_sample(st, kFree, box(10.0), 0), ParameterError);
}

TEST_CASE("non-finite potentials surface as integration errors") {
    CHECK_THROWS_AS(build_table(PotentialSpec{1e308, 0.0, 0}, 1e-4, 1e-4, 100000), IntegrationError);
    CHECK_THROWS_AS(shoot(kFree, box(10.0), NAN), DomainError);
}
