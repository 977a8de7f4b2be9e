#pragma once

// Stabilization analysis: branch energies E_n(R) versus box radius, their
// stable (inflection) points, and the Coulomb-corrected resonance width
//
//   Gamma/2 = -k / { (1 - gamma/(k R)) (R + 2E/E'(R)) + Z/(2E) ln(2 k R) },
//   k = sqrt(2E),  gamma = Z/k,
//
// evaluated at the stable point (R = R_bar, E = E_gamma). It follows from
// differentiating the box quantization condition
//   k R - l pi/2 - gamma ln(2kR) + eta_l(E) = n pi
// along a branch and inserting the Breit-Wigner phase eta_l ~ atan[(Gamma/2)/(E_gamma - E)].
// For Z = 0 it reduces to Gamma/2 = -k / (R + 2E/E').

#include <string>
#include <vector>

#include "boxres/potential.hpp"
#include "boxres/radial_solver.hpp"

namespace boxres {

struct RadiusRange {
    double min = 3.0;
    double max = 21.0;
};

struct BranchSample {
    double box_size = 0.0;
    double energy = 0.0;
};

/// E_n(R) for one node count n, sampled on an increasing grid of R.
struct BranchCurve {
    int n = 0;
    int l = 0;
    PotentialSpec spec;
    IntegrationParams params; ///< solver settings used for every sample
    double r_step = 0.0;
    std::vector<BranchSample> samples;
    bool truncated = false;
    std::string diagnostic; ///< why the curve stops early, if it does
};

struct StablePoint {
    double r_bar = 0.0;
    double e_gamma = 0.0;
    double de_dr = 0.0;
    int n = 0; ///< branch carrying this stable point
};

struct ResonanceResult {
    int l = 0;
    std::vector<StablePoint> stable_points; ///< ordered by r_bar
    std::vector<double> widths;
};

/// Single-branch continuation in R. The bracket at each R is centred on the
/// previous energy and widened by the free-particle spacing pi^2 (2n+1)/(2R^2);
/// if no bracket is found after a few widenings the curve is truncated and
/// `diagnostic` says where.
BranchCurve scan_branch(const PotentialSpec& spec, int n, RadiusRange r_range, double r_step,
                        const IntegrationParams& params);

/// Every branch with an energy in (e_lo, e_hi] somewhere on the R grid,
/// ordered by n. All branches at one R come from a single joint solve.
std::vector<BranchCurve> scan_window(const PotentialSpec& spec, RadiusRange r_range, double r_step,
                                     double e_lo, double e_hi, const IntegrationParams& params);

/// Eigenvalue of branch n at an arbitrary box radius; `hint` seeds the bracket.
double branch_energy(const PotentialSpec& spec, const IntegrationParams& params, int n,
                     double box_size, double hint);

/// Zeros of d2E/dR2 where the slope is locally flattest (second difference
/// going from positive to negative), refined by halving on R to below 1e-4.
/// Requires at least five samples; returns an empty list when the branch has
/// no such inflection.
std::vector<StablePoint> find_stable_points(const BranchCurve& curve);

/// Width from the Coulomb-corrected formula above. Throws DomainError when
/// e_gamma <= 0 or de_dr == 0 and SingularWidthError when the denominator is
/// within 1e-12 of zero.
double compute_width(const StablePoint& point, double z);

struct ResonanceSearch {
    double r_step = 0.05;
    double e_min = 0.0;
    double e_max = 6.0;
    /// Branches are followed up to e_max + e_margin so that stable points near
    /// the top of the window have neighbours on both sides.
    double e_margin = 1.0;
};

/// Scans all branches in the energy window, collects their stable points,
/// groups them into resonances and evaluates the widths. Two stable points
/// belong to the same resonance when their energies differ by less than
/// max(0.05, 5 Gamma) with Gamma the smaller of the two widths.
std::vector<ResonanceResult> locate_resonances(const PotentialSpec& spec, int l,
                                               RadiusRange r_range,
                                               const IntegrationParams& params,
                                               const ResonanceSearch& search = {});

/// Same as locate_resonances but reuses an existing set of branch curves.
std::vector<ResonanceResult> group_resonances(const std::vector<BranchCurve>& curves, double z,
                                              const ResonanceSearch& search = {});

} // namespace boxres
