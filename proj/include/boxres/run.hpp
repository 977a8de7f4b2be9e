#pragma once

// Orchestration behind the boxres command line tool.
//
// Files written to RunConfig::outputs, per partial wave l:
//   stabilize, both:
//     branches_l<l>.csv      R,E          every branch, grouped by node count, R increasing
//     resonances_l<l>.csv    R_bar,E_gamma,Gamma   grouped by resonance (energy order)
//     wf_l<l>_res<i>.csv     r,psi        resonance i (1-based) at its largest R_bar
//   oracle, both:
//     phase_l<l>.csv         E,eta_unwrapped   sweep over (0, e_max]
//     phase_l<l>_win<i>.csv  E,eta_unwrapped   sweep over fit window i (1-based)
//     fit_l<l>_win<i>.txt    key=value fit report (e_gamma, gamma, residual, ...)
// In both mode every resonance found by the scan gets a fit window around its
// last stable point, followed by the configured oracle_windows for that l.

#include <ostream>
#include <string>
#include <vector>

#include "boxres/config.hpp"
#include "boxres/scattering_oracle.hpp"
#include "boxres/stabilization.hpp"

namespace boxres {

struct OracleResult {
    OracleWindow window;
    int resonance = 0; ///< 1-based resonance index for derived windows, 0 for configured ones
    bool ok = false;
    BreitWignerFit fit;    ///< valid when ok
    std::string message;   ///< failure reason when !ok
    double best_e_gamma = 0.0;
    double best_width = 0.0;
};

struct WaveResult {
    int l = 0;
    std::vector<BranchCurve> branches;
    std::vector<ResonanceResult> resonances;
    std::vector<OracleResult> fits;
};

struct RunResult {
    std::vector<WaveResult> waves;
    std::vector<std::string> files; ///< written files, relative to the output directory
};

/// Fit window E_gamma -/+ min(10 Gamma, 0.2 E_gamma) around a resonance found by the scan.
EnergyInterval derived_window(double e_gamma, double width);

/// Runs every stage selected by cfg.mode, writes all files and prints the
/// summary. Existing output files cause OutputExistsError unless `force`.
/// Nothing is written before all computations have finished.
RunResult run(const RunConfig& cfg, bool force, std::ostream& summary);

} // namespace boxres
