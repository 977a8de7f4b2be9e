#pragma once

// Box eigenvalue problem for the radial Schroedinger equation
//
//   u''(r) = [ l(l+1)/r^2 + 2 V(r) - 2E ] u(r),   u regular at 0,   u(R) = 0,
//
// solved by outward RK4 shooting on a uniform grid and Sturm (node count)
// bisection in the energy.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "boxres/kernels.hpp"
#include "boxres/potential.hpp"

namespace boxres {

struct IntegrationParams {
    double dr = 1e-4;        ///< nominal radial step
    double r0 = 0.0;         ///< integration start; 0 selects r0 = dr
    double box_size = 20.0;  ///< box radius R
    double energy_rtol = 1e-12; ///< relative width of the final energy bracket

    double start() const { return r0 > 0.0 ? r0 : dr; }
    IntegrationParams with_box(double box) const {
        IntegrationParams p = *this;
        p.box_size = box;
        return p;
    }
};

/// Throws ParameterError unless 0 < dr <= 1e-3, r0 >= dr (after defaulting) and R > r0.
void validate(const IntegrationParams& params);

/// Uniform grid from r0 to R: steps = round((R - r0)/dr), step = (R - r0)/steps.
struct GridPlan {
    double r0 = 0.0;
    double step = 0.0;
    std::size_t steps = 0;
};
GridPlan plan_grid(const IntegrationParams& params);

/// Coefficient table for the kernels; u0/u'0 follow the regular series
/// r^{l+1} (1 + z r/(l+1)). Throws IntegrationError on non-finite coefficients.
kernels::RadialTable build_table(const PotentialSpec& spec, double r0, double step,
                                 std::size_t steps);

struct RadialSample {
    double r = 0.0;
    double psi = 0.0;
};

struct ShootResult {
    /// u(R) in arbitrary normalization; the true amplitude is psi_at_box * 2^scale_exponent.
    double psi_at_box = 0.0;
    int scale_exponent = 0;
    int node_count = 0;        ///< sign changes on (r0, R), the endpoint excluded
    bool end_crossing = false; ///< u changes sign on the last grid interval
    std::vector<RadialSample> samples;
};

struct EnergyInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct EigenState {
    int n = 0; ///< node count, used as the branch index
    double energy = 0.0;
    double box_size = 0.0;
    int l = 0;
};

/// Tabulated box problem for one (potential, R). Reusable across many energies.
class BoxProblem {
public:
    BoxProblem(const PotentialSpec& spec, const IntegrationParams& params);

    const PotentialSpec& spec() const { return spec_; }
    const IntegrationParams& params() const { return params_; }
    const kernels::RadialTable& table() const { return table_; }
    double box_size() const { return table_.r_end(); }

    /// Lower bound on every eigenvalue: min over the grid of w(r)/2.
    double energy_floor() const { return energy_floor_; }

    std::vector<kernels::LaneResult> shoot_many(std::span<const double> energies) const;

    /// Number of box eigenvalues strictly below `energy`.
    std::int64_t sturm_count(double energy) const;

    /// Eigenvalue with n nodes inside `bracket`. Throws BracketError when the
    /// bracket misses it and AmbiguityError when it holds more than one eigenvalue.
    double solve(int n, EnergyInterval bracket) const;

    /// Eigenvalues n_first..n_last (inclusive), refined jointly so that each
    /// kernel pass serves several branches. `hints` are optional trial energies
    /// evaluated in the first pass.
    std::vector<double> solve_range(int n_first, int n_last,
                                    std::span<const double> hints = {}) const;

    struct Level {
        int n;
        double energy;
    };
    /// Every eigenvalue in (e_lo, e_hi], ordered by n.
    std::vector<Level> solve_window(double e_lo, double e_hi,
                                    std::span<const double> hints = {}) const;

    /// Eigenvalue n if [lo, hi] brackets it (Sturm counts), otherwise nullopt.
    std::optional<double> solve_near(int n, double lo, double hi) const;

private:
    struct Probe {
        double energy;
        std::int64_t count;
        double u;
        int scale;
    };

    void evaluate(std::span<const double> energies, std::vector<Probe>& probes) const;
    std::vector<double> refine(std::span<const int> targets, std::vector<Probe>& probes) const;
    double upper_bound_for(int n, std::vector<Probe>& probes) const;

    PotentialSpec spec_;
    IntegrationParams params_;
    kernels::RadialTable table_;
    double energy_floor_ = 0.0;
};

ShootResult shoot(const PotentialSpec& spec, const IntegrationParams& params, double energy,
                  bool collect_samples = false);

EigenState solve_eigenvalue(const PotentialSpec& spec, const IntegrationParams& params, int n,
                            EnergyInterval e_bracket);

/// All eigenstates with E < e_max, at most n_max of them, ordered by energy.
std::vector<EigenState> list_eigenvalues(const PotentialSpec& spec,
                                         const IntegrationParams& params, double e_max,
                                         int n_max);

/// Real radial wavefunction sampled every `stride` grid points (the last grid
/// point is always included), normalized to unit norm on [0, R] by the
/// trapezoidal rule and signed so that psi > 0 near the origin. When R lies
/// under a barrier the tail is taken from an inward solution matched at the
/// outer turning point. Throws StaleStateError if `state` is not an
/// eigenstate of this problem.
std::vector<RadialSample> normalize_and_sample(const EigenState& state, const PotentialSpec& spec,
                                               const IntegrationParams& params,
                                               std::size_t stride = 1);

/// Fraction of the norm of `samples` (a normalized wavefunction on a uniform grid) inside r < radius.
double norm_fraction_inside(std::span<const RadialSample> samples, double radius);

} // namespace boxres
