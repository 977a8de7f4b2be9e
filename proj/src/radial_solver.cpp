#include "boxres/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "boxres/error.hpp"
#include "kernels/rk4_step.hpp"

namespace boxres {

namespace {

constexpr int kMaxRefinePasses = 400;

double bracket_tolerance(double rtol, double lo, double hi) {
    return rtol * std::max(std::fabs(lo), std::fabs(hi)) + 1e-15;
}

/// Scalar trace of u over the whole grid in one direction. Values already
/// stored are rescaled together with the running solution, so the trace is a
/// consistent multiple of the true solution.
std::vector<double> trace_outward(const kernels::RadialTable& table, double energy) {
    const std::size_t n = table.steps;
    const double two_e = 2.0 * energy;
    const double limit = std::ldexp(1.0, kernels::kRescaleExponent);
    const double factor = std::ldexp(1.0, -kernels::kRescaleExponent);

    std::vector<double> u(n + 1);
    kernels::detail::Rk4Pair y{table.u0, table.p0};
    u[0] = y.u;
    for (std::size_t i = 0; i < n; ++i) {
        y = kernels::detail::rk4_step(y, two_e, table.w_node[i], table.w_mid[i],
                                      table.w_node[i + 1], table.step);
        u[i + 1] = y.u;
        if (std::fabs(y.u) > limit) {
            y.u *= factor;
            y.p *= factor;
            for (std::size_t j = 0; j <= i + 1; ++j) {
                u[j] *= factor;
            }
        }
    }
    if (!std::isfinite(y.u) || !std::isfinite(y.p)) {
        throw IntegrationError("non-finite wavefunction at E = " + std::to_string(energy));
    }
    return u;
}

/// Inward solution with u(R) = 0 from the last grid point down to index `stop`.
std::vector<double> trace_inward(const kernels::RadialTable& table, double energy,
                                 std::size_t stop) {
    const std::size_t n = table.steps;
    const double two_e = 2.0 * energy;
    const double limit = std::ldexp(1.0, kernels::kRescaleExponent);
    const double factor = std::ldexp(1.0, -kernels::kRescaleExponent);

    std::vector<double> u(n + 1, 0.0);
    kernels::detail::Rk4Pair y{0.0, -1.0};
    for (std::size_t i = n; i > stop; --i) {
        y = kernels::detail::rk4_step(y, two_e, table.w_node[i], table.w_mid[i - 1],
                                      table.w_node[i - 1], -table.step);
        u[i - 1] = y.u;
        if (std::fabs(y.u) > limit) {
            y.u *= factor;
            y.p *= factor;
            for (std::size_t j = i - 1; j <= n; ++j) {
                u[j] *= factor;
            }
        }
    }
    return u;
}

} // namespace

void validate(const IntegrationParams& params) {
    if (!(params.dr > 0.0) || !(params.dr <= 1e-3) || !std::isfinite(params.dr)) {
        throw ParameterError("radial step dr must lie in (0, 1e-3], got " +
                             std::to_string(params.dr));
    }
    if (params.r0 != 0.0 && !(params.r0 >= params.dr)) {
        throw ParameterError("integration start r0 must be >= dr");
    }
    if (!(params.box_size > params.start()) || !std::isfinite(params.box_size)) {
        throw ParameterError("box size must exceed the integration start, got R = " +
                             std::to_string(params.box_size));
    }
    if (!(params.energy_rtol > 0.0)) {
        throw ParameterError("energy tolerance must be positive");
    }
}

GridPlan plan_grid(const IntegrationParams& params) {
    validate(params);
    GridPlan plan;
    plan.r0 = params.start();
    const double span = params.box_size - plan.r0;
    plan.steps = static_cast<std::size_t>(std::max<long long>(1, std::llround(span / params.dr)));
    plan.step = span / static_cast<double>(plan.steps);
    return plan;
}

kernels::RadialTable build_table(const PotentialSpec& spec, double r0, double step,
                                 std::size_t steps) {
    validate(spec);
    if (!(r0 > 0.0) || !(step > 0.0) || steps == 0) {
        throw ParameterError("radial grid needs r0 > 0, step > 0 and at least one step");
    }
    kernels::RadialTable table;
    table.r0 = r0;
    table.step = step;
    table.steps = steps;
    table.w_node.resize(steps + 1);
    table.w_mid.resize(steps);
    for (std::size_t i = 0; i <= steps; ++i) {
        const double r = r0 + static_cast<double>(i) * step;
        table.w_node[i] = 2.0 * eval_effective(spec, r);
        if (i < steps) {
            table.w_mid[i] = 2.0 * eval_effective(spec, r + 0.5 * step);
        }
    }
    const bool finite =
        std::all_of(table.w_node.begin(), table.w_node.end(), [](double w) { return std::isfinite(w); }) &&
        std::all_of(table.w_mid.begin(), table.w_mid.end(), [](double w) { return std::isfinite(w); });
    if (!finite) {
        throw IntegrationError("potential produced a non-finite value on the radial grid");
    }

    const double lp1 = spec.l + 1.0;
    const double rl = std::pow(r0, spec.l);
    table.u0 = rl * r0 * (1.0 + spec.z * r0 / lp1);
    table.p0 = lp1 * rl + spec.z * (spec.l + 2.0) / lp1 * rl * r0;
    return table;
}

BoxProblem::BoxProblem(const PotentialSpec& spec, const IntegrationParams& params)
    : spec_(spec), params_(params) {
    validate(spec_);
    const GridPlan plan = plan_grid(params_);
    table_ = build_table(spec_, plan.r0, plan.step, plan.steps);
    const double w_min = std::min(*std::min_element(table_.w_node.begin(), table_.w_node.end()),
                                  *std::min_element(table_.w_mid.begin(), table_.w_mid.end()));
    energy_floor_ = 0.5 * w_min - 1.0;
}

std::vector<kernels::LaneResult> BoxProblem::shoot_many(std::span<const double> energies) const {
    std::vector<kernels::LaneResult> out(energies.size());
    for (double e : energies) {
        if (!std::isfinite(e)) {
            throw DomainError("trial energy must be finite");
        }
    }
    kernels::shoot(table_, energies, out);
    return out;
}

std::int64_t BoxProblem::sturm_count(double energy) const {
    const double e[1] = {energy};
    return shoot_many(e).front().sturm_count();
}

void BoxProblem::evaluate(std::span<const double> energies, std::vector<Probe>& probes) const {
    const auto lanes = shoot_many(energies);
    for (std::size_t i = 0; i < energies.size(); ++i) {
        if (!std::isfinite(lanes[i].u_end)) {
            throw IntegrationError("non-finite wavefunction at E = " + std::to_string(energies[i]));
        }
        probes.push_back({energies[i], lanes[i].sturm_count(), lanes[i].u_end, lanes[i].scale_exp});
    }
    std::sort(probes.begin(), probes.end(),
              [](const Probe& a, const Probe& b) { return a.energy < b.energy; });
}

double BoxProblem::upper_bound_for(int n, std::vector<Probe>& probes) const {
    if (!probes.empty() && probes.back().count > n) {
        return probes.back().energy;
    }
    double e = std::max(1.0, probes.empty() ? 1.0 : probes.back().energy);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double trial[1] = {e};
        evaluate(trial, probes);
        if (probes.back().count > n) {
            return e;
        }
        e *= 2.0;
    }
    throw BracketError("could not bracket eigenvalue n = " + std::to_string(n) + " from above");
}

std::vector<double> BoxProblem::refine(std::span<const int> targets,
                                       std::vector<Probe>& probes) const {
    struct Bracket {
        std::size_t lo;
        std::size_t hi;
    };
    auto bracket_of = [&](int n) -> Bracket {
        std::size_t lo = 0;
        bool have_lo = false;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            if (probes[i].count <= n) {
                lo = i;
                have_lo = true;
            }
        }
        if (!have_lo) {
            throw BracketError("no trial energy lies below eigenvalue n = " + std::to_string(n));
        }
        for (std::size_t i = lo + 1; i < probes.size(); ++i) {
            if (probes[i].count > n) {
                return {lo, i};
            }
        }
        throw BracketError("no trial energy lies above eigenvalue n = " + std::to_string(n));
    };
    auto converged = [&](const Bracket& b) {
        const double lo = probes[b.lo].energy;
        const double hi = probes[b.hi].energy;
        return hi - lo <= bracket_tolerance(params_.energy_rtol, lo, hi) ||
               std::nextafter(lo, hi) >= hi;
    };

    // Secant estimate of the root of u(R; E) inside a single-root bracket.
    auto secant = [&](const Bracket& b, int n) -> double {
        const Probe& lo = probes[b.lo];
        const Probe& hi = probes[b.hi];
        if (lo.count != n || hi.count != n + 1 || std::signbit(lo.u) == std::signbit(hi.u)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const int s = std::max(lo.scale, hi.scale);
        const double a = std::ldexp(lo.u, lo.scale - s);
        const double c = std::ldexp(hi.u, hi.scale - s);
        const double t = a / (a - c);
        if (!(t > 0.0 && t < 1.0)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return lo.energy + t * (hi.energy - lo.energy);
    };

    struct Open {
        double lo;
        double hi;
        double guess; // NaN when the bracket holds several roots or no secant applies
    };
    const std::size_t lanes = std::max<std::size_t>(1, kernels::preferred_batch());
    for (int pass = 0; pass < kMaxRefinePasses; ++pass) {
        std::vector<Open> open;
        for (int n : targets) {
            const Bracket b = bracket_of(n);
            if (converged(b)) {
                continue;
            }
            const double lo = probes[b.lo].energy;
            const double hi = probes[b.hi].energy;
            const bool seen = std::any_of(open.begin(), open.end(),
                                          [&](const Open& o) { return o.lo == lo && o.hi == hi; });
            if (!seen) {
                open.push_back({lo, hi, secant(b, n)});
            }
        }
        if (open.empty()) {
            break;
        }
        const std::size_t total = ((open.size() + lanes - 1) / lanes) * lanes;
        const std::size_t per = total / open.size();
        const std::size_t extra = total % open.size();
        std::vector<double> trial;
        trial.reserve(total);
        auto push_inside = [&](double e, const Open& o) {
            if (e > o.lo && e < o.hi) {
                trial.push_back(e);
            }
        };
        for (std::size_t k = 0; k < open.size(); ++k) {
            const Open& o = open[k];
            const double width = o.hi - o.lo;
            const std::size_t before = trial.size();
            std::size_t m = per + (k < extra ? 1 : 0);
            if (!std::isnan(o.guess)) {
                // Two lanes hug the secant estimate; the rest keep the
                // bisection guarantee. With a single lane, alternate.
                if (m >= 2) {
                    const double eps = std::max(0.01 * width, bracket_tolerance(params_.energy_rtol, o.lo, o.hi));
                    push_inside(o.guess - eps, o);
                    push_inside(o.guess + eps, o);
                    m -= 2;
                } else if (pass % 2 == 0) {
                    push_inside(o.guess, o);
                    m = 0;
                }
            }
            for (std::size_t j = 1; j <= m; ++j) {
                push_inside(o.lo + width * static_cast<double>(j) / static_cast<double>(m + 1), o);
            }
            if (trial.size() == before) {
                push_inside(0.5 * (o.lo + o.hi), o);
            }
        }
        if (trial.empty()) {
            break;
        }
        evaluate(trial, probes);
    }

    std::vector<double> energies;
    energies.reserve(targets.size());
    for (int n : targets) {
        const Bracket b = bracket_of(n);
        const Probe& lo = probes[b.lo];
        const Probe& hi = probes[b.hi];
        double e = 0.5 * (lo.energy + hi.energy);
        const bool single_root = lo.count == n && hi.count == n + 1;
        if (single_root && std::signbit(lo.u) != std::signbit(hi.u)) {
            const int s = std::max(lo.scale, hi.scale);
            const double a = std::ldexp(lo.u, lo.scale - s);
            const double c = std::ldexp(hi.u, hi.scale - s);
            if (a != c) {
                const double t = a / (a - c);
                if (t >= 0.0 && t <= 1.0) {
                    e = lo.energy + t * (hi.energy - lo.energy);
                }
            }
        }
        energies.push_back(e);
    }
    return energies;
}

double BoxProblem::solve(int n, EnergyInterval bracket) const {
    if (n < 0) {
        throw DomainError("branch index must be non-negative");
    }
    if (!(bracket.lo < bracket.hi)) {
        throw BracketError("energy bracket must satisfy lo < hi");
    }
    std::vector<Probe> probes;
    const double ends[2] = {bracket.lo, bracket.hi};
    evaluate(ends, probes);
    const std::int64_t below = probes.front().count;
    const std::int64_t above = probes.back().count;
    if (below > n || above <= n) {
        throw BracketError("bracket [" + std::to_string(bracket.lo) + ", " +
                           std::to_string(bracket.hi) + "] holds no eigenvalue with " +
                           std::to_string(n) + " nodes (counts " + std::to_string(below) + ", " +
                           std::to_string(above) + ")");
    }
    if (above - below > 1) {
        throw AmbiguityError("bracket holds " + std::to_string(above - below) +
                             " eigenvalues; refine it");
    }
    const int target[1] = {n};
    return refine(target, probes).front();
}

std::vector<double> BoxProblem::solve_range(int n_first, int n_last,
                                            std::span<const double> hints) const {
    if (n_first < 0 || n_last < n_first) {
        return {};
    }
    std::vector<Probe> probes;
    std::vector<double> seed{energy_floor_};
    for (double h : hints) {
        if (std::isfinite(h)) {
            seed.push_back(h);
        }
    }
    evaluate(seed, probes);
    upper_bound_for(n_last, probes);
    std::vector<int> targets;
    for (int n = n_first; n <= n_last; ++n) {
        targets.push_back(n);
    }
    return refine(targets, probes);
}

std::vector<BoxProblem::Level> BoxProblem::solve_window(double e_lo, double e_hi,
                                                       std::span<const double> hints) const {
    if (!(e_lo < e_hi)) {
        throw DomainError("energy window must satisfy lo < hi");
    }
    std::vector<Probe> probes;
    std::vector<double> seed{e_lo, e_hi};
    for (double h : hints) {
        if (h > e_lo && h < e_hi) {
            seed.push_back(h);
        }
    }
    evaluate(seed, probes);
    std::int64_t below = 0;
    std::int64_t through = 0;
    for (const Probe& p : probes) {
        if (p.energy == e_lo) {
            below = p.count;
        }
        if (p.energy == e_hi) {
            through = p.count;
        }
    }
    std::vector<Level> levels;
    if (through <= below) {
        return levels;
    }
    std::vector<int> targets;
    for (auto n = below; n < through; ++n) {
        targets.push_back(static_cast<int>(n));
    }
    const std::vector<double> energies = refine(targets, probes);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        levels.push_back({targets[i], energies[i]});
    }
    return levels;
}

std::optional<double> BoxProblem::solve_near(int n, double lo, double hi) const {
    if (!(lo < hi)) {
        return std::nullopt;
    }
    std::vector<Probe> probes;
    const std::size_t lanes = std::max<std::size_t>(2, kernels::preferred_batch());
    std::vector<double> seed;
    for (std::size_t j = 0; j < lanes; ++j) {
        seed.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(lanes - 1));
    }
    evaluate(seed, probes);
    if (probes.front().count > n || probes.back().count <= n) {
        return std::nullopt;
    }
    const int target[1] = {n};
    return refine(target, probes).front();
}

ShootResult shoot(const PotentialSpec& spec, const IntegrationParams& params, double energy,
                  bool collect_samples) {
    if (!std::isfinite(energy)) {
        throw DomainError("shooting energy must be finite");
    }
    const BoxProblem problem(spec, params);
    const double e[1] = {energy};
    const kernels::LaneResult lane = problem.shoot_many(e).front();
    if (!std::isfinite(lane.u_end)) {
        throw IntegrationError("non-finite wavefunction at E = " + std::to_string(energy));
    }
    ShootResult result;
    result.psi_at_box = lane.u_end;
    result.scale_exponent = lane.scale_exp;
    result.node_count = static_cast<int>(lane.interior_nodes);
    result.end_crossing = lane.end_crossing;
    if (collect_samples) {
        const auto& table = problem.table();
        const std::vector<double> u = trace_outward(table, energy);
        result.samples.reserve(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            result.samples.push_back({table.r0 + static_cast<double>(i) * table.step, u[i]});
        }
    }
    return result;
}

EigenState solve_eigenvalue(const PotentialSpec& spec, const IntegrationParams& params, int n,
                            EnergyInterval e_bracket) {
    const BoxProblem problem(spec, params);
    return {n, problem.solve(n, e_bracket), params.box_size, spec.l};
}

std::vector<EigenState> list_eigenvalues(const PotentialSpec& spec,
                                         const IntegrationParams& params, double e_max,
                                         int n_max) {
    if (!std::isfinite(e_max)) {
        throw DomainError("energy ceiling must be finite");
    }
    if (n_max < 1) {
        throw ParameterError("n_max must be at least 1");
    }
    const BoxProblem problem(spec, params);
    const std::int64_t below = problem.sturm_count(e_max);
    const int count = static_cast<int>(std::min<std::int64_t>(below, n_max));
    std::vector<EigenState> states;
    if (count == 0) {
        return states;
    }
    const double hint[1] = {e_max};
    const std::vector<double> energies = problem.solve_range(0, count - 1, hint);
    for (int n = 0; n < count; ++n) {
        states.push_back({n, energies[static_cast<std::size_t>(n)], params.box_size, spec.l});
    }
    return states;
}

std::vector<RadialSample> normalize_and_sample(const EigenState& state, const PotentialSpec& spec,
                                               const IntegrationParams& params,
                                               std::size_t stride) {
    if (stride == 0) {
        throw ParameterError("sampling stride must be positive");
    }
    if (state.l != spec.l) {
        throw StaleStateError("eigenstate partial wave does not match the potential");
    }
    const BoxProblem problem(spec, params.with_box(state.box_size));
    const double e = state.energy;
    const double delta = std::max(1e-9 * std::fabs(e), 1e-12);
    const double around[2] = {e - delta, e + delta};
    const auto lanes = problem.shoot_many(around);
    if (lanes[0].sturm_count() != state.n || lanes[1].sturm_count() != state.n + 1) {
        throw StaleStateError("E = " + std::to_string(e) + " is not the eigenvalue with " +
                              std::to_string(state.n) + " nodes in a box of radius " +
                              std::to_string(state.box_size));
    }

    const auto& table = problem.table();
    const std::size_t n = table.steps;
    std::vector<double> u = trace_outward(table, e);

    // Under a barrier at R the outward solution picks up the growing branch;
    // take the tail from the inward solution instead.
    const double two_e = 2.0 * e;
    if (table.w_node[n] - two_e > 0.0) {
        std::size_t turn = n;
        while (turn > 0 && table.w_node[turn] - two_e > 0.0) {
            --turn;
        }
        if (turn > 0 && u[turn] != 0.0) {
            const std::vector<double> tail = trace_inward(table, e, turn);
            if (tail[turn] != 0.0 && std::isfinite(tail[turn])) {
                const double scale = u[turn] / tail[turn];
                for (std::size_t i = turn + 1; i <= n; ++i) {
                    u[i] = scale * tail[i];
                }
            }
        }
    }

    double peak = 0.0;
    for (double v : u) {
        peak = std::max(peak, std::fabs(v));
    }
    if (!(peak > 0.0) || !std::isfinite(peak)) {
        throw IntegrationError("degenerate wavefunction trace");
    }
    for (double& v : u) {
        v /= peak;
    }
    double norm = u[0] * u[0] * table.r0 / (2.0 * spec.l + 3.0);
    for (std::size_t i = 0; i < n; ++i) {
        norm += 0.5 * table.step * (u[i] * u[i] + u[i + 1] * u[i + 1]);
    }
    const double sign = (u[0] < 0.0) ? -1.0 : 1.0;
    const double scale = sign / std::sqrt(norm);

    std::vector<RadialSample> samples;
    samples.reserve(n / stride + 2);
    for (std::size_t i = 0; i <= n; i += stride) {
        samples.push_back({table.r0 + static_cast<double>(i) * table.step, scale * u[i]});
    }
    if (n % stride != 0) {
        samples.push_back({table.r_end(), scale * u[n]});
    }
    return samples;
}

double norm_fraction_inside(std::span<const RadialSample> samples, double radius) {
    double inside = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double a = samples[i].r;
        const double b = samples[i + 1].r;
        const double fa = samples[i].psi * samples[i].psi;
        const double fb = samples[i + 1].psi * samples[i + 1].psi;
        const double piece = 0.5 * (b - a) * (fa + fb);
        total += piece;
        if (b <= radius) {
            inside += piece;
        } else if (a < radius) {
            const double t = (radius - a) / (b - a);
            const double fr = fa + t * (fb - fa);
            inside += 0.5 * (radius - a) * (fa + fr);
        }
    }
    return total > 0.0 ? inside / total : 0.0;
}

} // namespace boxres
