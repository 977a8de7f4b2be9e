#include "boxres/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "boxres/error.hpp"

namespace boxres {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(const char* fmt, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string indexed(const char* stem, int l, const char* tag, int i, const char* ext) {
    return std::string(stem) + "_l" + std::to_string(l) + "_" + tag + std::to_string(i) + ext;
}

std::string per_wave(const char* stem, int l) {
    return std::string(stem) + "_l" + std::to_string(l) + ".csv";
}

std::string phase_csv(std::span<const PhaseShiftSample> samples) {
    std::string out = "E,eta_unwrapped\n";
    for (const PhaseShiftSample& s : samples) {
        out += num(s.energy) + "," + num(s.eta) + "\n";
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1.0);
    }
    return v;
}

OracleResult fit_window(const PotentialSpec& spec, const RunConfig& cfg,
                        const IntegrationParams& params, OracleWindow window, int resonance,
                        std::vector<PhaseShiftSample>& sweep) {
    OracleResult res;
    res.window = window;
    res.resonance = resonance;
    const auto energies = linspace(window.lo, window.hi, cfg.oracle_points);
    sweep = unwrap_phases(phase_shift_sweep(spec, energies, cfg.match_radius, params));
    try {
        res.fit = fit_breit_wigner(sweep, {window.lo, window.hi});
        res.ok = true;
    } catch (const FitError& e) {
        res.message = e.what();
        res.best_e_gamma = e.best_e_gamma();
        res.best_width = e.best_width();
    }
    return res;
}

std::string fit_report(const OracleResult& r) {
    std::string out;
    out += "l=" + std::to_string(r.window.l) + "\n";
    out += "window_lo=" + num(r.window.lo) + "\n";
    out += "window_hi=" + num(r.window.hi) + "\n";
    out += "resonance=" + std::to_string(r.resonance) + "\n";
    out += std::string("status=") + (r.ok ? "ok" : "failed") + "\n";
    if (r.ok) {
        out += "e_gamma=" + num(r.fit.e_gamma) + "\n";
        out += "gamma=" + num(r.fit.width) + "\n";
        out += "residual=" + num(r.fit.residual) + "\n";
        out += "background=" + num(r.fit.background[0]) + "," + num(r.fit.background[1]) + "," +
               num(r.fit.background[2]) + "\n";
        out += "background_center=" + num(r.fit.center) + "\n";
        out += "background_scale=" + num(r.fit.half_width) + "\n";
    } else {
        out += "e_gamma=" + num(r.best_e_gamma) + "\n";
        out += "gamma=" + num(r.best_width) + "\n";
        out += "residual=nan\n";
        out += "message=" + r.message + "\n";
    }
    return out;
}

void print_wave(std::ostream& os, const RunConfig& cfg, const WaveResult& w) {
    os << "l = " << w.l << "\n";
    if (cfg.mode != RunMode::oracle) {
        os << "  branches scanned: " << w.branches.size() << ", resonances: " << w.resonances.size()
           << "\n";
        for (std::size_t i = 0; i < w.resonances.size(); ++i) {
            const ResonanceResult& r = w.resonances[i];
            os << "  resonance " << i + 1 << "\n";
            os << "    " << "    R_bar" << "          E_gamma" << "        Gamma\n";
            for (std::size_t j = 0; j < r.stable_points.size(); ++j) {
                const StablePoint& p = r.stable_points[j];
                os << "    " << fixed("%9.4f", p.r_bar) << fixed("%17.10f", p.e_gamma)
                   << fixed("%13.4e", r.widths[j]) << "\n";
            }
        }
    }
    for (const OracleResult& f : w.fits) {
        os << "  oracle fit [" << fixed("%.6f", f.window.lo) << ", " << fixed("%.6f", f.window.hi)
           << "]";
        if (!f.ok) {
            os << ": failed (" << f.message << ")\n";
            continue;
        }
        os << ": E_gamma = " << fixed("%.10f", f.fit.e_gamma) << ", Gamma = "
           << fixed("%.4e", f.fit.width) << ", residual = " << fixed("%.2e", f.fit.residual)
           << "\n";
        if (f.resonance > 0) {
            const ResonanceResult& r = w.resonances[static_cast<std::size_t>(f.resonance - 1)];
            const double e = r.stable_points.back().e_gamma;
            const double g = r.widths.back();
            os << "    box at R_bar = " << fixed("%.4f", r.stable_points.back().r_bar)
               << ": E_gamma = " << fixed("%.10f", e) << ", Gamma = " << fixed("%.4e", g)
               << "  (dE = " << fixed("%.2e", f.fit.e_gamma - e)
               << ", dGamma/Gamma = " << fixed("%.2e", (f.fit.width - g) / g) << ")\n";
        }
    }
}

} // namespace

EnergyInterval derived_window(double e_gamma, double width) {
    const double half = std::min(10.0 * width, 0.2 * e_gamma);
    return {e_gamma - half, e_gamma + half};
}

RunResult run(const RunConfig& cfg, bool force, std::ostream& summary) {
    const fs::path dir(cfg.outputs);
    const bool stabilize = cfg.mode != RunMode::oracle;
    const bool oracle = cfg.mode != RunMode::stabilize;

    auto check_absent = [&](const std::string& name) {
        if (!force && fs::exists(dir / name)) {
            throw OutputExistsError("output file " + (dir / name).string() +
                                    " exists; pass --force to overwrite");
        }
    };
    for (int l : cfg.partial_waves) {
        if (stabilize) {
            check_absent(per_wave("branches", l));
            check_absent(per_wave("resonances", l));
        }
        if (oracle) {
            check_absent(per_wave("phase", l));
        }
    }

    IntegrationParams params;
    params.dr = cfg.dr;
    ResonanceSearch search;
    search.r_step = cfg.r_scan_step;
    search.e_min = 0.0;
    search.e_max = cfg.e_max;

    RunResult result;
    std::map<std::string, std::string> files;
    for (int l : cfg.partial_waves) {
        PotentialSpec spec = cfg.potential;
        spec.l = l;
        WaveResult wave;
        wave.l = l;

        if (stabilize) {
            wave.branches = scan_window(spec, cfg.r_range, search.r_step, search.e_min,
                                        search.e_max + search.e_margin, params);
            wave.resonances = group_resonances(wave.branches, spec.z, search);

            std::string branches = "R,E\n";
            for (const BranchCurve& c : wave.branches) {
                for (const BranchSample& s : c.samples) {
                    branches += num(s.box_size) + "," + num(s.energy) + "\n";
                }
            }
            files[per_wave("branches", l)] = std::move(branches);

            std::string table = "R_bar,E_gamma,Gamma\n";
            for (std::size_t i = 0; i < wave.resonances.size(); ++i) {
                const ResonanceResult& r = wave.resonances[i];
                for (std::size_t j = 0; j < r.stable_points.size(); ++j) {
                    table += num(r.stable_points[j].r_bar) + "," + num(r.stable_points[j].e_gamma) +
                             "," + num(r.widths[j]) + "\n";
                }
                const StablePoint& last = r.stable_points.back();
                const EigenState state{last.n, last.e_gamma, last.r_bar, l};
                const auto samples =
                    normalize_and_sample(state, spec, params.with_box(last.r_bar),
                                         static_cast<std::size_t>(cfg.wf_stride));
                std::string wf = "r,psi\n";
                for (const RadialSample& s : samples) {
                    wf += num(s.r) + "," + num(s.psi) + "\n";
                }
                files[indexed("wf", l, "res", static_cast<int>(i) + 1, ".csv")] = std::move(wf);
            }
            files[per_wave("resonances", l)] = std::move(table);
        }

        if (oracle) {
            const auto coarse = linspace(cfg.e_max / cfg.oracle_points, cfg.e_max,
                                         cfg.oracle_points);
            const auto sweep =
                unwrap_phases(phase_shift_sweep(spec, coarse, cfg.match_radius, params));
            files[per_wave("phase", l)] = phase_csv(sweep);

            std::vector<std::pair<OracleWindow, int>> windows;
            if (stabilize) {
                for (std::size_t i = 0; i < wave.resonances.size(); ++i) {
                    const ResonanceResult& r = wave.resonances[i];
                    const EnergyInterval w =
                        derived_window(r.stable_points.back().e_gamma, r.widths.back());
                    windows.push_back({{l, w.lo, w.hi}, static_cast<int>(i) + 1});
                }
            }
            for (const OracleWindow& w : cfg.oracle_windows) {
                if (w.l == l) {
                    windows.push_back({w, 0});
                }
            }
            for (std::size_t i = 0; i < windows.size(); ++i) {
                std::vector<PhaseShiftSample> window_sweep;
                OracleResult fit = fit_window(spec, cfg, params, windows[i].first,
                                              windows[i].second, window_sweep);
                const int idx = static_cast<int>(i) + 1;
                files[indexed("phase", l, "win", idx, ".csv")] = phase_csv(window_sweep);
                files[indexed("fit", l, "win", idx, ".txt")] = fit_report(fit);
                wave.fits.push_back(std::move(fit));
            }
        }
        result.waves.push_back(std::move(wave));
    }

    for (const auto& [name, content] : files) {
        check_absent(name);
    }
    fs::create_directories(dir);
    for (const auto& [name, content] : files) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) {
            throw Error("cannot write " + (dir / name).string());
        }
        result.files.push_back(name);
    }

    summary << "boxres: v0 = " << cfg.potential.v0 << ", z = " << cfg.potential.z
            << ", dr = " << cfg.dr << ", R in [" << cfg.r_range.min << ", " << cfg.r_range.max
            << "], mode = " << to_string(cfg.mode) << "\n";
    for (const WaveResult& w : result.waves) {
        print_wave(summary, cfg, w);
    }
    summary << "wrote " << result.files.size() << " file(s) to " << dir.string() << "\n";
    return result;
}

} // namespace boxres
