#pragma once

// Phase shifts of the regular solution matched to Coulomb asymptotics, and a
// Breit-Wigner fit of eta_l(E) that recovers (E_gamma, Gamma) without a box.

#include <array>
#include <span>
#include <vector>

#include "boxres/potential.hpp"
#include "boxres/radial_solver.hpp"

namespace boxres {

struct PhaseShiftSample {
    double energy = 0.0;
    double k = 0.0;                ///< sqrt(2E)
    double gamma_sommerfeld = 0.0; ///< Z/k
    double eta = 0.0;              ///< in [0, pi) from phase_shift; continuous after unwrap_phases
};

/// Regular-like and irregular-like pure-Coulomb solutions at rho = k r from
/// the asymptotic expansion about theta = rho - l pi/2 - gamma ln(2 rho):
///
///   s = g cos(theta) + f sin(theta),   c = f cos(theta) - g sin(theta),
///
/// with f, g the usual asymptotic series (f = 1, g = 0 at leading order).
/// A solution sin(theta + eta) + O(1/rho) equals cos(eta) s + sin(eta) c.
/// The series is summed until its terms stop decreasing or drop below
/// 1e-17 relative; intended for rho well beyond the turning point.
struct CoulombAsymptotic {
    double s = 0.0;
    double c = 0.0;
};
CoulombAsymptotic coulomb_asymptotic(int l, double gamma, double rho);

/// eta_l(E) mod pi by integrating to r_m and r_m + pi/(2k) and matching
/// u = A s + B c at both points. Throws DomainError for E <= 0 and
/// ParameterError when the finite-range potential at r_m is not below 1e-12.
PhaseShiftSample phase_shift(const PotentialSpec& spec, double energy, double match_radius,
                             const IntegrationParams& params);

/// phase_shift for many energies, integrated in batches that share a radial
/// table. Within a batch the second matching point sits a quarter wavelength
/// of the lowest energy beyond r_m; lanes where that separation conditions the
/// match poorly are redone individually. Output order follows `energies`.
std::vector<PhaseShiftSample> phase_shift_sweep(const PotentialSpec& spec,
                                                std::span<const double> energies,
                                                double match_radius,
                                                const IntegrationParams& params);

/// Nearest-branch continuation: each eta is shifted by a multiple of pi to lie
/// closest to its predecessor. Samples must be ordered by energy.
std::vector<PhaseShiftSample> unwrap_phases(std::span<const PhaseShiftSample> samples);

struct BreitWignerFit {
    double e_gamma = 0.0;
    double width = 0.0;
    /// eta_pot(E) = b0 + b1 t + b2 t^2 with t = (E - center) / half_width.
    std::array<double, 3> background{};
    double center = 0.0;
    double half_width = 1.0;
    double residual = 0.0; ///< rms of (model - eta) over the fitted samples, radians
};

/// b(E) + atan2(Gamma/2, E_gamma - E), the resonant part rising from 0 to pi.
double breit_wigner_phase(const BreitWignerFit& fit, double energy);

/// Least-squares fit of unwrapped phases inside `window` (inclusive). The
/// nonlinear pair (E_gamma, Gamma) is located on a coarse grid with the
/// background eliminated linearly, then all five parameters are refined by
/// Levenberg-Marquardt. Throws ParameterError with fewer than 7 samples in the
/// window, and FitError (carrying the best grid point) when the refinement
/// fails, leaves the window or returns a width larger than the window.
BreitWignerFit fit_breit_wigner(std::span<const PhaseShiftSample> samples, EnergyInterval window);

} // namespace boxres
