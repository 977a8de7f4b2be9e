#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "boxres/error.hpp"
#include "boxres/scattering_oracle.hpp"

using namespace boxres;

namespace {

constexpr double kPi = std::numbers::pi;

const PotentialSpec kModel{7.5, -1.0, 0};

/// Distance between two phases modulo pi.
double mod_pi_distance(double a, double b) {
    const double d = std::fmod(std::fabs(a - b), kPi);
    return std::min(d, kPi - d);
}

/// arg Gamma(l + 1 + i gamma) from the Weierstrass product, summed directly.
double coulomb_phase(int l, double gamma) {
    double sigma = -gamma * std::numbers::egamma;
    for (int n = 1; n <= 2000000; ++n) {
        const double x = gamma / n;
        sigma += x - std::atan(x);
    }
    for (int s = 1; s <= l; ++s) {
        sigma += std::atan(gamma / s);
    }
    return sigma;
}

std::vector<PhaseShiftSample> synthetic(const BreitWignerFit& truth, double lo, double hi,
                                        int count) {
    std::vector<PhaseShiftSample> out;
    for (int i = 0; i < count; ++i) {
        const double e = lo + (hi - lo) * i / (count - 1.0);
        out.push_back({e, std::sqrt(2.0 * e), 0.0, breit_wigner_phase(truth, e)});
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) {
        v.push_back(lo + (hi - lo) * i / (count - 1.0));
    }
    return v;
}

} // namespace

TEST_CASE("asymptotic series reduces to Riccati-Bessel functions without Coulomb") {
    for (double rho : {20.0, 50.0, 137.5}) {
        const CoulombAsymptotic a0 = coulomb_asymptotic(0, 0.0, rho);
        CHECK(a0.s == doctest::Approx(std::sin(rho)).epsilon(1e-13));
        CHECK(a0.c == doctest::Approx(std::cos(rho)).epsilon(1e-13));
        const CoulombAsymptotic a1 = coulomb_asymptotic(1, 0.0, rho);
        CHECK(a1.s == doctest::Approx(std::sin(rho) / rho - std::cos(rho)).epsilon(1e-13));
        CHECK(a1.c == doctest::Approx(std::cos(rho) / rho + std::sin(rho)).epsilon(1e-13));
    }
}

TEST_CASE("reference Coulomb phases") {
    // arg Gamma(l + 1 - i/k) mod pi at E = 0.5, 1, 1.7805, 4 (50-digit arithmetic)
    const double energies[4] = {0.5, 1.0, 1.7805, 4.0};
    const double reference[3][4] = {
        {0.3016403204675332, 0.29392253524248185, 0.25352827797583499, 0.18742348993344153},
        {2.6578348106598781, 2.8200354801618877, 2.9078212830692391, 2.9891792340691128},
        {2.194187201659072, 2.4801985707077658, 2.6488108176304657, 2.814210188403424},
    };
    for (int l = 0; l <= 2; ++l) {
        for (int i = 0; i < 4; ++i) {
            const double gamma = -1.0 / std::sqrt(2.0 * energies[i]);
            CAPTURE(l);
            CAPTURE(i);
            CHECK(mod_pi_distance(coulomb_phase(l, gamma), reference[l][i]) < 1e-10);
        }
    }
}

TEST_CASE("pure Coulomb phase shift equals the Coulomb phase") {
    const IntegrationParams params;
    for (int l = 0; l <= 2; ++l) {
        const PotentialSpec hydrogen{0.0, -1.0, l};
        for (double e : {0.5, 1.0, 4.0}) {
            const PhaseShiftSample s = phase_shift(hydrogen, e, 60.0, params);
            CAPTURE(l);
            CAPTURE(e);
            CHECK(s.eta >= 0.0);
            CHECK(s.eta < kPi);
            CHECK(s.k == doctest::Approx(std::sqrt(2.0 * e)));
            CHECK(s.gamma_sommerfeld == doctest::Approx(-1.0 / std::sqrt(2.0 * e)));
            CHECK(mod_pi_distance(s.eta, coulomb_phase(l, s.gamma_sommerfeld)) < 1e-8);
        }
    }
}

TEST_CASE("free particle has no phase shift") {
    const IntegrationParams params;
    for (int l = 0; l <= 2; ++l) {
        for (double e : {0.3, 2.0, 5.0}) {
            const PhaseShiftSample s = phase_shift({0.0, 0.0, l}, e, 60.0, params);
            CHECK(mod_pi_distance(s.eta, 0.0) < 1e-8);
        }
    }
}

TEST_CASE("phase shift does not depend on the matching radius") {
    const IntegrationParams params;
    for (int l = 0; l <= 2; ++l) {
        PotentialSpec spec = kModel;
        spec.l = l;
        for (double e : {1.0, 1.7805, 3.9}) {
            const double at60 = phase_shift(spec, e, 60.0, params).eta;
            for (double rm : {80.0, 100.0}) {
                CHECK(mod_pi_distance(phase_shift(spec, e, rm, params).eta, at60) < 1e-6);
            }
        }
    }
}

TEST_CASE("sweep agrees with single evaluations and is continuous") {
    const IntegrationParams params;
    PotentialSpec spec = kModel;
    spec.l = 1;
    const auto energies = linspace(0.5, 6.0, 111);
    const auto sweep = phase_shift_sweep(spec, energies, 60.0, params);
    REQUIRE(sweep.size() == energies.size());
    for (std::size_t i = 0; i < energies.size(); i += 7) {
        CHECK(sweep[i].energy == energies[i]);
        CHECK(mod_pi_distance(sweep[i].eta, phase_shift(spec, energies[i], 60.0, params).eta) <
              1e-9);
    }
    const auto unwrapped = unwrap_phases(sweep);
    // Steepest rise is 2/Gamma at the p resonance (Gamma ~ 0.26), i.e. ~0.38 per 0.05 step
    for (std::size_t i = 1; i < unwrapped.size(); ++i) {
        CHECK(std::fabs(unwrapped[i].eta - unwrapped[i - 1].eta) < 0.5);
        CHECK(mod_pi_distance(unwrapped[i].eta, sweep[i].eta) < 1e-12);
    }
    // The broad p resonance near 3.84 adds a net rise across the sweep
    CHECK(unwrapped.back().eta - unwrapped.front().eta > 2.0);
}

TEST_CASE("phase rises by nearly pi across the narrow s resonance") {
    const double e_gamma = 1.7805245;
    const double width = 9.57e-5;
    const auto energies = linspace(e_gamma - 10.0 * width, e_gamma + 10.0 * width, 81);
    const auto eta = unwrap_phases(phase_shift_sweep(kModel, energies, 60.0, IntegrationParams{}));
    const double rise = eta.back().eta - eta.front().eta;
    // Resonant part alone: pi - 2 atan(1/20)
    CHECK(rise == doctest::Approx(kPi - 2.0 * std::atan(0.05)).epsilon(1e-3));
}

TEST_CASE("phase shift errors") {
    const IntegrationParams params;
    CHECK_THROWS_AS(phase_shift(kModel, 0.0, 60.0, params), DomainError);
    CHECK_THROWS_AS(phase_shift(kModel, -1.0, 60.0, params), DomainError);
    CHECK_THROWS_AS(phase_shift(kModel, 1.0, 10.0, params), ParameterError);
    const std::vector<double> bad{1.0, -0.5};
    CHECK_THROWS_AS(phase_shift_sweep(kModel, bad, 60.0, params), DomainError);
}

TEST_CASE("unwrapping") {
    std::vector<PhaseShiftSample> s(5);
    const double raw[5] = {3.0, 0.05, 0.2, 3.1, 0.1};
    for (int i = 0; i < 5; ++i) {
        s[static_cast<std::size_t>(i)].energy = i;
        s[static_cast<std::size_t>(i)].eta = raw[i];
    }
    const auto u = unwrap_phases(s);
    CHECK(u[0].eta == 3.0);
    CHECK(u[1].eta == doctest::Approx(0.05 + kPi));
    CHECK(u[2].eta == doctest::Approx(0.2 + kPi));
    CHECK(u[3].eta == doctest::Approx(3.1));
    CHECK(u[4].eta == doctest::Approx(0.1 + kPi));
    CHECK(unwrap_phases(std::vector<PhaseShiftSample>{}).empty());
}

TEST_CASE("Breit-Wigner phase") {
    BreitWignerFit bw;
    bw.e_gamma = 2.0;
    bw.width = 0.01;
    CHECK(breit_wigner_phase(bw, 2.0) == doctest::Approx(kPi / 2));
    const double h = 1e-7;
    const double slope = (breit_wigner_phase(bw, 2.0 + h) - breit_wigner_phase(bw, 2.0 - h)) / (2 * h);
    CHECK(slope == doctest::Approx(2.0 / bw.width).epsilon(1e-6));
    CHECK(breit_wigner_phase(bw, 1.0) == doctest::Approx(std::atan(0.005)).epsilon(1e-12));
    CHECK(breit_wigner_phase(bw, 3.0) == doctest::Approx(kPi - std::atan(0.005)).epsilon(1e-12));
}

TEST_CASE("synthetic Breit-Wigner round trip") {
    BreitWignerFit truth;
    truth.e_gamma = 1.7805;
    truth.width = 9.5e-5;
    truth.center = 1.7805;
    truth.half_width = 1e-3;
    truth.background = {0.25, -0.004, 0.001};
    const auto samples = synthetic(truth, 1.7795, 1.7815, 201);
    const BreitWignerFit fit = fit_breit_wigner(samples, {1.7795, 1.7815});
    CHECK(fit.e_gamma == doctest::Approx(truth.e_gamma).epsilon(1e-8));
    CHECK(fit.width == doctest::Approx(truth.width).epsilon(1e-8));
    CHECK(fit.background[0] == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(fit.residual < 1e-9);

    BreitWignerFit broad;
    broad.e_gamma = 3.84;
    broad.width = 0.26;
    broad.center = 3.84;
    broad.half_width = 0.768;
    broad.background = {2.6, 0.1, -0.02};
    const auto wide = synthetic(broad, 3.072, 4.608, 401);
    const BreitWignerFit fit2 = fit_breit_wigner(wide, {3.072, 4.608});
    CHECK(fit2.e_gamma == doctest::Approx(3.84).epsilon(1e-8));
    CHECK(fit2.width == doctest::Approx(0.26).epsilon(1e-8));
}

TEST_CASE("Breit-Wigner fit of the model near the narrow s resonance") {
    const auto energies = linspace(1.7795, 1.7815, 201);
    const auto eta = unwrap_phases(phase_shift_sweep(kModel, energies, 60.0, IntegrationParams{}));
    const BreitWignerFit fit = fit_breit_wigner(eta, {1.7795, 1.7815});
    CHECK(std::fabs(fit.e_gamma - 1.780525) < 5e-6);
    CHECK(std::fabs(fit.width - 9.57e-5) < 0.02 * 9.57e-5);
    CHECK(fit.residual < 1e-6);
}

TEST_CASE("Breit-Wigner fit errors") {
    BreitWignerFit truth;
    truth.e_gamma = 2.0;
    truth.width = 0.01;
    truth.center = 2.0;
    const auto samples = synthetic(truth, 1.9, 2.1, 41);
    CHECK_THROWS_AS(fit_breit_wigner(samples, {1.99, 2.0}), ParameterError);
    CHECK_THROWS_AS(fit_breit_wigner(samples, {2.1, 1.9}), ParameterError);

    // A resonance far broader than the window cannot be separated from the background
    BreitWignerFit wide;
    wide.e_gamma = 2.0;
    wide.width = 4.0;
    wide.center = 2.0;
    const auto smooth = synthetic(wide, 1.99, 2.01, 41);
    bool threw = false;
    try {
        const BreitWignerFit f = fit_breit_wigner(smooth, {1.99, 2.01});
        CHECK(f.width <= 0.02);
    } catch (const FitError& e) {
        threw = true;
        CHECK(std::isfinite(e.best_e_gamma()));
        CHECK(e.best_width() > 0.0);
    }
    CHECK(threw);
}
