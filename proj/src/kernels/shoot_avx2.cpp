#include "boxres/kernels.hpp"

#if defined(BOXRES_HAVE_AVX2)

#include <immintrin.h>

#include <array>
#include <cmath>

namespace boxres::kernels {

namespace {

constexpr int kWidth = 4;
constexpr int kUnroll = 4;
constexpr std::size_t kGroup = kWidth * kUnroll;

void shoot_group(const RadialTable& table, const double* energies, std::size_t count,
                 LaneResult* out, std::size_t probe_step) {
    const std::size_t n = table.steps;
    const double* wn = table.w_node.data();
    const double* wm = table.w_mid.data();

    alignas(32) std::array<double, kGroup> e{};
    for (std::size_t j = 0; j < kGroup; ++j) {
        e[j] = energies[j < count ? j : count - 1];
    }

    const __m256d h = _mm256_set1_pd(table.step);
    const __m256d hh = _mm256_set1_pd(0.5 * table.step);
    const __m256d h6 = _mm256_set1_pd(table.step / 6.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d limit = _mm256_set1_pd(std::ldexp(1.0, kRescaleExponent));
    const __m256d factor = _mm256_set1_pd(std::ldexp(1.0, -kRescaleExponent));
    const __m256i rescale_step = _mm256_set1_epi64x(kRescaleExponent);

    __m256d two_e[kUnroll], u[kUnroll], p[kUnroll], last[kUnroll];
    __m256i nodes[kUnroll], scale[kUnroll];
    __m256d probe_u[kUnroll];
    __m256i probe_scale[kUnroll];
    __m256d end_cross[kUnroll];

    for (int k = 0; k < kUnroll; ++k) {
        two_e[k] = _mm256_mul_pd(two, _mm256_load_pd(&e[k * kWidth]));
        u[k] = _mm256_set1_pd(table.u0);
        p[k] = _mm256_set1_pd(table.p0);
        last[k] = u[k];
        nodes[k] = _mm256_setzero_si256();
        scale[k] = _mm256_setzero_si256();
        probe_u[k] = u[k];
        probe_scale[k] = _mm256_setzero_si256();
        end_cross[k] = zero;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const __m256d wn0 = _mm256_set1_pd(wn[i]);
        const __m256d wmi = _mm256_set1_pd(wm[i]);
        const __m256d wn1 = _mm256_set1_pd(wn[i + 1]);
        const bool interior = (i + 1 < n);
        for (int k = 0; k < kUnroll; ++k) {
            const __m256d g0 = _mm256_sub_pd(wn0, two_e[k]);
            const __m256d gm = _mm256_sub_pd(wmi, two_e[k]);
            const __m256d g1 = _mm256_sub_pd(wn1, two_e[k]);
            const __m256d uk = u[k];
            const __m256d pk = p[k];

            const __m256d k1p = _mm256_mul_pd(g0, uk);
            const __m256d u2 = _mm256_add_pd(uk, _mm256_mul_pd(hh, pk));
            const __m256d p2 = _mm256_add_pd(pk, _mm256_mul_pd(hh, k1p));
            const __m256d k2p = _mm256_mul_pd(gm, u2);
            const __m256d u3 = _mm256_add_pd(uk, _mm256_mul_pd(hh, p2));
            const __m256d p3 = _mm256_add_pd(pk, _mm256_mul_pd(hh, k2p));
            const __m256d k3p = _mm256_mul_pd(gm, u3);
            const __m256d u4 = _mm256_add_pd(uk, _mm256_mul_pd(h, p3));
            const __m256d p4 = _mm256_add_pd(pk, _mm256_mul_pd(h, k3p));
            const __m256d k4p = _mm256_mul_pd(g1, u4);

            const __m256d su = _mm256_add_pd(_mm256_add_pd(pk, p4),
                                              _mm256_mul_pd(two, _mm256_add_pd(p2, p3)));
            const __m256d sp = _mm256_add_pd(_mm256_add_pd(k1p, k4p),
                                              _mm256_mul_pd(two, _mm256_add_pd(k2p, k3p)));
            u[k] = _mm256_add_pd(uk, _mm256_mul_pd(h6, su));
            p[k] = _mm256_add_pd(pk, _mm256_mul_pd(h6, sp));

            const __m256d crossed = _mm256_cmp_pd(_mm256_mul_pd(u[k], last[k]), zero, _CMP_LT_OQ);
            if (interior) {
                nodes[k] = _mm256_sub_epi64(nodes[k], _mm256_castpd_si256(crossed));
                const __m256d nonzero = _mm256_cmp_pd(u[k], zero, _CMP_NEQ_OQ);
                last[k] = _mm256_blendv_pd(last[k], u[k], nonzero);
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
                const __m256d mag = _mm256_andnot_pd(sign_mask, u[k]);
                const __m256d big = _mm256_cmp_pd(mag, limit, _CMP_GT_OQ);
                if (_mm256_movemask_pd(big) != 0) {
                    u[k] = _mm256_blendv_pd(u[k], _mm256_mul_pd(u[k], factor), big);
                    p[k] = _mm256_blendv_pd(p[k], _mm256_mul_pd(p[k], factor), big);
                    last[k] = _mm256_blendv_pd(last[k], _mm256_mul_pd(last[k], factor), big);
                    scale[k] = _mm256_add_epi64(
                        scale[k], _mm256_and_si256(_mm256_castpd_si256(big), rescale_step));
                }
            }
        }
    }

    alignas(32) std::array<double, kGroup> ue{}, pe{}, pu{}, ec{};
    alignas(32) std::array<std::int64_t, kGroup> nd{}, sc{}, psc{};
    for (int k = 0; k < kUnroll; ++k) {
        _mm256_store_pd(&ue[k * kWidth], u[k]);
        _mm256_store_pd(&pe[k * kWidth], p[k]);
        _mm256_store_pd(&pu[k * kWidth], probe_u[k]);
        _mm256_store_pd(&ec[k * kWidth], end_cross[k]);
        _mm256_store_si256(reinterpret_cast<__m256i*>(&nd[k * kWidth]), nodes[k]);
        _mm256_store_si256(reinterpret_cast<__m256i*>(&sc[k * kWidth]), scale[k]);
        _mm256_store_si256(reinterpret_cast<__m256i*>(&psc[k * kWidth]), probe_scale[k]);
    }
    for (std::size_t j = 0; j < count; ++j) {
        LaneResult& r = out[j];
        r.u_end = ue[j];
        r.p_end = pe[j];
        r.scale_exp = static_cast<int>(sc[j]);
        r.u_probe = pu[j];
        r.probe_scale_exp = static_cast<int>(psc[j]);
        r.interior_nodes = nd[j];
        r.end_crossing = std::signbit(ec[j]);
    }
}

} // namespace

void shoot_avx2(const RadialTable& table, std::span<const double> energies,
                std::span<LaneResult> out, std::size_t probe_step) {
    for (std::size_t begin = 0; begin < energies.size(); begin += kGroup) {
        const std::size_t count = std::min(kGroup, energies.size() - begin);
        shoot_group(table, energies.data() + begin, count, out.data() + begin, probe_step);
    }
}

} // namespace boxres::kernels

#endif
