#include "boxres/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "boxres/error.hpp"

namespace boxres {

namespace {

constexpr double kRefineWidth = 1e-4;   // stop halving once the R bracket is this narrow
constexpr double kStencilFraction = 1e-3; // dE/dR stencil step relative to R_bar
constexpr int kMaxWidenings = 6;

void check_range(RadiusRange range, double r_step) {
    if (!(range.min >= 2.0) || !(range.max <= 40.0) || !(range.min < range.max)) {
        throw ParameterError("box-size range must satisfy 2 <= min < max <= 40");
    }
    if (!(r_step > 0.0)) {
        throw ParameterError("scan step must be positive");
    }
}

std::vector<double> radius_grid(RadiusRange range, double r_step) {
    check_range(range, r_step);
    const auto count = static_cast<std::size_t>(std::floor((range.max - range.min) / r_step + 1e-9));
    std::vector<double> grid;
    grid.reserve(count + 1);
    for (std::size_t k = 0; k <= count; ++k) {
        grid.push_back(range.min + static_cast<double>(k) * r_step);
    }
    return grid;
}

double free_spacing(int n, double box) {
    return std::numbers::pi * std::numbers::pi * (2.0 * n + 1.0) / (2.0 * box * box);
}

/// Linear interpolation of the branch energy; clamps outside the sampled range.
double interpolate(const BranchCurve& curve, double box) {
    const auto& s = curve.samples;
    if (box <= s.front().box_size) {
        return s.front().energy;
    }
    if (box >= s.back().box_size) {
        return s.back().energy;
    }
    const auto it = std::lower_bound(s.begin(), s.end(), box, [](const BranchSample& a, double r) {
        return a.box_size < r;
    });
    const BranchSample& hi = *it;
    const BranchSample& lo = *(it - 1);
    const double t = (box - lo.box_size) / (hi.box_size - lo.box_size);
    return lo.energy + t * (hi.energy - lo.energy);
}

double second_difference(const BranchSample& a, const BranchSample& b, const BranchSample& c) {
    const double h1 = b.box_size - a.box_size;
    const double h2 = c.box_size - b.box_size;
    return 2.0 * ((c.energy - b.energy) / h2 - (b.energy - a.energy) / h1) / (h1 + h2);
}

} // namespace

double branch_energy(const PotentialSpec& spec, const IntegrationParams& params, int n,
                     double box_size, double hint) {
    const BoxProblem problem(spec, params.with_box(box_size));
    std::vector<double> hints;
    const std::size_t lanes = std::max<std::size_t>(2, kernels::preferred_batch());
    double delta = 1e-7 * std::max(1.0, std::fabs(hint));
    for (std::size_t k = 0; k + 1 < lanes; k += 2) {
        hints.push_back(hint - delta);
        hints.push_back(hint + delta);
        delta *= 4.0;
    }
    return problem.solve_range(n, n, hints).front();
}

BranchCurve scan_branch(const PotentialSpec& spec, int n, RadiusRange r_range, double r_step,
                        const IntegrationParams& params) {
    if (n < 0) {
        throw DomainError("branch index must be non-negative");
    }
    BranchCurve curve;
    curve.n = n;
    curve.l = spec.l;
    curve.spec = spec;
    curve.params = params;
    curve.r_step = r_step;

    const std::vector<double> grid = radius_grid(r_range, r_step);
    for (double box : grid) {
        const BoxProblem problem(spec, params.with_box(box));
        if (curve.samples.empty()) {
            curve.samples.push_back({box, problem.solve_range(n, n).front()});
            continue;
        }
        const double previous = curve.samples.back().energy;
        double predicted = previous;
        if (curve.samples.size() >= 2) {
            predicted = 2.0 * previous - curve.samples[curve.samples.size() - 2].energy;
        }
        double window = free_spacing(n, box);
        std::optional<double> energy;
        for (int attempt = 0; attempt <= kMaxWidenings && !energy; ++attempt) {
            energy = problem.solve_near(n, std::min(predicted, previous) - window,
                                        std::max(predicted, previous) + window);
            window *= 2.0;
        }
        if (!energy) {
            std::ostringstream msg;
            msg << "branch n=" << n << " lost its bracket at R=" << box << " (last E=" << previous
                << ")";
            curve.truncated = true;
            curve.diagnostic = msg.str();
            break;
        }
        curve.samples.push_back({box, *energy});
    }
    return curve;
}

std::vector<BranchCurve> scan_window(const PotentialSpec& spec, RadiusRange r_range, double r_step,
                                     double e_lo, double e_hi, const IntegrationParams& params) {
    const std::vector<double> grid = radius_grid(r_range, r_step);
    std::map<int, BranchCurve> curves;
    for (double box : grid) {
        std::vector<double> hints;
        for (const auto& [n, curve] : curves) {
            const auto& s = curve.samples;
            if (s.empty() || s.back().box_size + 1.5 * r_step < box) {
                continue;
            }
            const double last = s.back().energy;
            hints.push_back(last);
            if (s.size() >= 2) {
                const double step_change = last - s[s.size() - 2].energy;
                const double predicted = last + step_change;
                const double spread = std::max(0.05 * std::fabs(step_change), 1e-9);
                hints.push_back(predicted - spread);
                hints.push_back(predicted + spread);
            }
        }
        const BoxProblem problem(spec, params.with_box(box));
        for (const auto& level : problem.solve_window(e_lo, e_hi, hints)) {
            auto [it, inserted] = curves.try_emplace(level.n);
            BranchCurve& curve = it->second;
            if (inserted) {
                curve.n = level.n;
                curve.l = spec.l;
                curve.spec = spec;
                curve.params = params;
                curve.r_step = r_step;
            }
            curve.samples.push_back({box, level.energy});
        }
    }
    std::vector<BranchCurve> result;
    result.reserve(curves.size());
    for (auto& [n, curve] : curves) {
        result.push_back(std::move(curve));
    }
    return result;
}

std::vector<StablePoint> find_stable_points(const BranchCurve& curve) {
    const auto& s = curve.samples;
    if (s.size() < 5) {
        throw ParameterError("stable-point search needs at least five samples on the branch");
    }
    const double step = curve.r_step > 0.0 ? curve.r_step : s[1].box_size - s[0].box_size;

    std::vector<double> d2(s.size(), 0.0);
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        d2[i] = second_difference(s[i - 1], s[i], s[i + 1]);
    }

    auto energy_at = [&](double box) {
        return branch_energy(curve.spec, curve.params, curve.n, box, interpolate(curve, box));
    };
    auto curvature_at = [&](double box) {
        const double left = energy_at(box - step);
        const double mid = energy_at(box);
        const double right = energy_at(box + step);
        return (right - 2.0 * mid + left) / (step * step);
    };

    std::vector<StablePoint> points;
    for (std::size_t i = 1; i + 2 < s.size(); ++i) {
        if (!(d2[i] > 0.0 && d2[i + 1] < 0.0)) {
            continue;
        }
        double a = s[i].box_size;
        double b = s[i + 1].box_size;
        double fa = d2[i];
        double fb = d2[i + 1];
        while (b - a >= kRefineWidth) {
            const double mid = 0.5 * (a + b);
            const double fm = curvature_at(mid);
            if (fm > 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
        }
        StablePoint point;
        point.n = curve.n;
        point.r_bar = a + fa / (fa - fb) * (b - a);
        point.e_gamma = energy_at(point.r_bar);
        const double h = kStencilFraction * point.r_bar;
        const double em2 = energy_at(point.r_bar - 2.0 * h);
        const double em1 = energy_at(point.r_bar - h);
        const double ep1 = energy_at(point.r_bar + h);
        const double ep2 = energy_at(point.r_bar + 2.0 * h);
        point.de_dr = (em2 - 8.0 * em1 + 8.0 * ep1 - ep2) / (12.0 * h);
        points.push_back(point);
    }
    return points;
}

double compute_width(const StablePoint& point, double z) {
    const double e = point.e_gamma;
    if (!(e > 0.0) || !std::isfinite(e)) {
        throw DomainError("width formula needs a positive resonance energy");
    }
    if (point.de_dr == 0.0 || !std::isfinite(point.de_dr)) {
        throw DomainError("width formula needs a finite, non-zero dE/dR");
    }
    const double r = point.r_bar;
    const double two_e = 2.0 * e;
    const double k = std::sqrt(two_e);
    // The Coulomb factor is 1 - gamma/(kR) with gamma = z/k, i.e. 1 - z/(2E R).
    const double denom = (1.0 - z / (two_e * r)) * (r + two_e / point.de_dr) +
                         (z / two_e) * std::log(std::sqrt(8.0 * e) * r);
    if (std::fabs(denom) < 1e-12) {
        throw SingularWidthError("width formula denominator vanishes at R_bar = " +
                                 std::to_string(r));
    }
    const double half_width = -k / denom;
    return 2.0 * half_width;
}

std::vector<ResonanceResult> group_resonances(const std::vector<BranchCurve>& curves, double z,
                                              const ResonanceSearch& search) {
    struct Candidate {
        StablePoint point;
        double width;
    };
    std::vector<Candidate> candidates;
    for (const BranchCurve& curve : curves) {
        if (curve.samples.size() < 5) {
            continue;
        }
        for (const StablePoint& p : find_stable_points(curve)) {
            if (!(p.e_gamma > search.e_min && p.e_gamma <= search.e_max)) {
                continue;
            }
            double width = 0.0;
            try {
                width = compute_width(p, z);
            } catch (const Error&) {
                continue;
            }
            if (width > 0.0 && std::isfinite(width)) {
                candidates.push_back({p, width});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.point.r_bar < b.point.r_bar; });

    std::vector<ResonanceResult> groups;
    const int l = curves.empty() ? 0 : curves.front().l;
    for (const Candidate& c : candidates) {
        ResonanceResult* best = nullptr;
        double best_gap = 0.0;
        for (ResonanceResult& g : groups) {
            for (std::size_t j = 0; j < g.stable_points.size(); ++j) {
                const double gap = std::fabs(g.stable_points[j].e_gamma - c.point.e_gamma);
                const double tol = std::max(0.05, 5.0 * std::min(g.widths[j], c.width));
                if (gap < tol && (best == nullptr || gap < best_gap)) {
                    best = &g;
                    best_gap = gap;
                }
            }
        }
        if (best == nullptr) {
            groups.push_back({l, {}, {}});
            best = &groups.back();
        }
        best->stable_points.push_back(c.point);
        best->widths.push_back(c.width);
    }
    std::sort(groups.begin(), groups.end(), [](const ResonanceResult& a, const ResonanceResult& b) {
        return a.stable_points.back().e_gamma < b.stable_points.back().e_gamma;
    });
    return groups;
}

std::vector<ResonanceResult> locate_resonances(const PotentialSpec& spec, int l,
                                               RadiusRange r_range,
                                               const IntegrationParams& params,
                                               const ResonanceSearch& search) {
    PotentialSpec wave = spec;
    wave.l = l;
    validate(wave);
    const std::vector<BranchCurve> curves = scan_window(
        wave, r_range, search.r_step, search.e_min, search.e_max + search.e_margin, params);
    return group_resonances(curves, wave.z, search);
}

} // namespace boxres
