#include <cmath>

#include "boxres/kernels.hpp"
#include "rk4_step.hpp"

namespace boxres::kernels {

namespace {

struct LaneState {
    double u;
    double p;
    double last; // last nonzero u
    std::int64_t nodes;
    int scale_exp;
};

inline void rk4_step(LaneState& s, double two_e, double wn0, double wm, double wn1, double h) {
    const detail::Rk4Pair y = detail::rk4_step({s.u, s.p}, two_e, wn0, wm, wn1, h);
    s.u = y.u;
    s.p = y.p;
}

inline void count_node(LaneState& s) {
    s.nodes += (s.u * s.last < 0.0) ? 1 : 0;
    s.last = (s.u != 0.0) ? s.u : s.last;
}

inline void maybe_rescale(LaneState& s) {
    const double limit = std::ldexp(1.0, kRescaleExponent);
    const double factor = std::ldexp(1.0, -kRescaleExponent);
    if (std::fabs(s.u) > limit) {
        s.u *= factor;
        s.p *= factor;
        s.last *= factor;
        s.scale_exp += kRescaleExponent;
    }
}

} // namespace

void shoot_scalar(const RadialTable& table, std::span<const double> energies,
                  std::span<LaneResult> out, std::size_t probe_step) {
    const std::size_t n = table.steps;
    const double h = table.step;
    const double* wn = table.w_node.data();
    const double* wm = table.w_mid.data();

    for (std::size_t lane = 0; lane < energies.size(); ++lane) {
        const double two_e = 2.0 * energies[lane];
        LaneState s{table.u0, table.p0, table.u0, 0, 0};
        LaneResult& res = out[lane];
        res = LaneResult{};
        res.u_probe = s.u;

        for (std::size_t i = 0; i < n; ++i) {
            const double prev_last = s.last;
            rk4_step(s, two_e, wn[i], wm[i], wn[i + 1], h);
            if (i + 1 < n) {
                count_node(s);
            } else {
                res.end_crossing = (s.u * prev_last < 0.0);
            }
            if (i + 1 == probe_step) {
                res.u_probe = s.u;
                res.probe_scale_exp = s.scale_exp;
            }
            if ((i + 1) % kRescaleBlock == 0) {
                maybe_rescale(s);
            }
        }
        res.u_end = s.u;
        res.p_end = s.p;
        res.scale_exp = s.scale_exp;
        res.interior_nodes = s.nodes;
    }
}

} // namespace boxres::kernels
