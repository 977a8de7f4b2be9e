#pragma once

// Single RK4 step for u'' = g(r) u written as the first-order pair (u, u').
// Every kernel variant evaluates exactly this sequence of operations.

namespace boxres::kernels::detail {

struct Rk4Pair {
    double u;
    double p;
};

inline Rk4Pair rk4_step(Rk4Pair y, double two_e, double w_start, double w_mid, double w_end,
                        double h) {
    const double hh = 0.5 * h;
    const double h6 = h / 6.0;
    const double u = y.u;
    const double p = y.p;
    const double g0 = w_start - two_e;
    const double gm = w_mid - two_e;
    const double g1 = w_end - two_e;

    const double k1p = g0 * u;
    const double u2 = u + hh * p;
    const double p2 = p + hh * k1p;
    const double k2p = gm * u2;
    const double u3 = u + hh * p2;
    const double p3 = p + hh * k2p;
    const double k3p = gm * u3;
    const double u4 = u + h * p3;
    const double p4 = p + h * k3p;
    const double k4p = g1 * u4;

    return {u + h6 * ((p + p4) + 2.0 * (p2 + p3)), p + h6 * ((k1p + k4p) + 2.0 * (k2p + k3p))};
}

} // namespace boxres::kernels::detail
