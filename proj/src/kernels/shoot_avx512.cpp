#include "boxres/kernels.hpp"

#if defined(BOXRES_HAVE_AVX512)

#include <immintrin.h>

#include <array>
#include <cmath>

namespace boxres::kernels {

namespace {

constexpr int kWidth = 8;
constexpr int kUnroll = 4;
constexpr std::size_t kGroup = kWidth * kUnroll;

void shoot_group(const RadialTable& table, const double* energies, std::size_t count,
                 LaneResult* out, std::size_t probe_step) {
    const std::size_t n = table.steps;
    const double* wn = table.w_node.data();
    const double* wm = table.w_mid.data();

    alignas(64) std::array<double, kGroup> e{};
    for (std::size_t j = 0; j < kGroup; ++j) {
        e[j] = energies[j < count ? j : count - 1];
    }

    const __m512d h = _mm512_set1_pd(table.step);
    const __m512d hh = _mm512_set1_pd(0.5 * table.step);
    const __m512d h6 = _mm512_set1_pd(table.step / 6.0);
    const __m512d two = _mm512_set1_pd(2.0);
    const __m512d zero = _mm512_setzero_pd();
    const __m512d limit = _mm512_set1_pd(std::ldexp(1.0, kRescaleExponent));
    const __m512d factor = _mm512_set1_pd(std::ldexp(1.0, -kRescaleExponent));
    const __m512i one = _mm512_set1_epi64(1);
    const __m512i rescale_step = _mm512_set1_epi64(kRescaleExponent);

    __m512d two_e[kUnroll], u[kUnroll], p[kUnroll], last[kUnroll], probe_u[kUnroll];
    __m512i nodes[kUnroll], scale[kUnroll], probe_scale[kUnroll];
    __mmask8 end_cross[kUnroll];

    for (int k = 0; k < kUnroll; ++k) {
        two_e[k] = _mm512_mul_pd(two, _mm512_load_pd(&e[k * kWidth]));
        u[k] = _mm512_set1_pd(table.u0);
        p[k] = _mm512_set1_pd(table.p0);
        last[k] = u[k];
        probe_u[k] = u[k];
        nodes[k] = _mm512_setzero_si512();
        scale[k] = _mm512_setzero_si512();
        probe_scale[k] = _mm512_setzero_si512();
        end_cross[k] = 0;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const __m512d wn0 = _mm512_set1_pd(wn[i]);
        const __m512d wmi = _mm512_set1_pd(wm[i]);
        const __m512d wn1 = _mm512_set1_pd(wn[i + 1]);
        const bool interior = (i + 1 < n);
        for (int k = 0; k < kUnroll; ++k) {
            const __m512d g0 = _mm512_sub_pd(wn0, two_e[k]);
            const __m512d gm = _mm512_sub_pd(wmi, two_e[k]);
            const __m512d g1 = _mm512_sub_pd(wn1, two_e[k]);
            const __m512d uk = u[k];
            const __m512d pk = p[k];

            const __m512d k1p = _mm512_mul_pd(g0, uk);
            const __m512d u2 = _mm512_add_pd(uk, _mm512_mul_pd(hh, pk));
            const __m512d p2 = _mm512_add_pd(pk, _mm512_mul_pd(hh, k1p));
            const __m512d k2p = _mm512_mul_pd(gm, u2);
            const __m512d u3 = _mm512_add_pd(uk, _mm512_mul_pd(hh, p2));
            const __m512d p3 = _mm512_add_pd(pk, _mm512_mul_pd(hh, k2p));
            const __m512d k3p = _mm512_mul_pd(gm, u3);
            const __m512d u4 = _mm512_add_pd(uk, _mm512_mul_pd(h, p3));
            const __m512d p4 = _mm512_add_pd(pk, _mm512_mul_pd(h, k3p));
            const __m512d k4p = _mm512_mul_pd(g1, u4);

            const __m512d su = _mm512_add_pd(_mm512_add_pd(pk, p4),
                                              _mm512_mul_pd(two, _mm512_add_pd(p2, p3)));
            const __m512d sp = _mm512_add_pd(_mm512_add_pd(k1p, k4p),
                                              _mm512_mul_pd(two, _mm512_add_pd(k2p, k3p)));
            u[k] = _mm512_add_pd(uk, _mm512_mul_pd(h6, su));
            p[k] = _mm512_add_pd(pk, _mm512_mul_pd(h6, sp));

            const __mmask8 crossed =
                _mm512_cmp_pd_mask(_mm512_mul_pd(u[k], last[k]), zero, _CMP_LT_OQ);
            if (interior) {
                nodes[k] = _mm512_mask_add_epi64(nodes[k], crossed, nodes[k], one);
                const __mmask8 nonzero = _mm512_cmp_pd_mask(u[k], zero, _CMP_NEQ_OQ);
                last[k] = _mm512_mask_mov_pd(last[k], nonzero, u[k]);
            } else {
                end_cross[k] = crossed;
            }
        }
        if (i + 1 == probe_step) {
            for (int k = 0; k < kUnroll; ++k) {
                probe_u[k] = u[k];
                probe_scale[k] = scale[k];
            }
        }
        if ((i + 1) % kRescaleBlock == 0) {
            for (int k = 0; k < kUnroll; ++k) {
                const __mmask8 big = _mm512_cmp_pd_mask(_mm512_abs_pd(u[k]), limit, _CMP_GT_OQ);
                if (big != 0) {
                    u[k] = _mm512_mask_mul_pd(u[k], big, u[k], factor);
                    p[k] = _mm512_mask_mul_pd(p[k], big, p[k], factor);
                    last[k] = _mm512_mask_mul_pd(last[k], big, last[k], factor);
                    scale[k] = _mm512_mask_add_epi64(scale[k], big, scale[k], rescale_step);
                }
            }
        }
    }

    alignas(64) std::array<double, kGroup> ue{}, pe{}, pu{};
    alignas(64) std::array<std::int64_t, kGroup> nd{}, sc{}, psc{};
    for (int k = 0; k < kUnroll; ++k) {
        _mm512_store_pd(&ue[k * kWidth], u[k]);
        _mm512_store_pd(&pe[k * kWidth], p[k]);
        _mm512_store_pd(&pu[k * kWidth], probe_u[k]);
        _mm512_store_si512(&nd[k * kWidth], nodes[k]);
        _mm512_store_si512(&sc[k * kWidth], scale[k]);
        _mm512_store_si512(&psc[k * kWidth], probe_scale[k]);
    }
    for (std::size_t j = 0; j < count; ++j) {
        LaneResult& r = out[j];
        r.u_end = ue[j];
        r.p_end = pe[j];
        r.scale_exp = static_cast<int>(sc[j]);
        r.u_probe = pu[j];
        r.probe_scale_exp = static_cast<int>(psc[j]);
        r.interior_nodes = nd[j];
        r.end_crossing = ((end_cross[j / kWidth] >> (j % kWidth)) & 1) != 0;
    }
}

} // namespace

void shoot_avx512(const RadialTable& table, std::span<const double> energies,
                  std::span<LaneResult> out, std::size_t probe_step) {
    for (std::size_t begin = 0; begin < energies.size(); begin += kGroup) {
        const std::size_t count = std::min(kGroup, energies.size() - begin);
        shoot_group(table, energies.data() + begin, count, out.data() + begin, probe_step);
    }
}

} // namespace boxres::kernels

#endif
