#pragma once

// Batched RK4 shooting kernels for u'' = (w(r) - 2E) u.
//
// One pass over a tabulated coefficient w(r) integrates many trial energies at
// once. The scalar kernel is the reference; the AVX2 and AVX-512 kernels
// perform the identical sequence of IEEE operations per lane (no FMA
// contraction), so all variants return bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace boxres::kernels {

enum class Isa { scalar, avx2, avx512 };

std::string_view to_string(Isa isa);

/// w(r) = l(l+1)/r^2 + 2 V(r) sampled on r_i = r0 + i*step, i = 0..steps,
/// and at the midpoints r_i + step/2 for i < steps.
struct RadialTable {
    double r0 = 0.0;
    double step = 0.0;
    std::size_t steps = 0;
    std::vector<double> w_node;
    std::vector<double> w_mid;
    double u0 = 0.0; ///< u(r0)
    double p0 = 0.0; ///< u'(r0)

    double r_end() const { return r0 + static_cast<double>(steps) * step; }
};

/// Whenever |u| exceeds 2^kRescaleExponent the pair (u, u') is multiplied by
/// 2^-kRescaleExponent. The check runs every kRescaleBlock steps.
inline constexpr int kRescaleExponent = 664; // ~1e200
inline constexpr std::size_t kRescaleBlock = 32;

struct LaneResult {
    double u_end = 0.0;        ///< u(r_end) * 2^-scale_exp
    double p_end = 0.0;        ///< u'(r_end) * 2^-scale_exp
    int scale_exp = 0;
    double u_probe = 0.0;      ///< u(r_probe) * 2^-probe_scale_exp
    int probe_scale_exp = 0;
    std::int64_t interior_nodes = 0; ///< sign changes among u_0 .. u_{steps-1}
    bool end_crossing = false;       ///< sign change between u_{steps-1} and u_steps

    /// Sturm count: number of box eigenvalues strictly below the lane energy.
    std::int64_t sturm_count() const { return interior_nodes + (end_crossing ? 1 : 0); }
};

/// Record u at grid index `probe_step`. For 0 or values above `steps` u_probe is u0.
void shoot_scalar(const RadialTable& table, std::span<const double> energies,
                  std::span<LaneResult> out, std::size_t probe_step = 0);
void shoot_avx2(const RadialTable& table, std::span<const double> energies,
                std::span<LaneResult> out, std::size_t probe_step = 0);
void shoot_avx512(const RadialTable& table, std::span<const double> energies,
                  std::span<LaneResult> out, std::size_t probe_step = 0);

bool isa_supported(Isa isa);
Isa best_available_isa();

/// Kernel used by `shoot`. Defaults to best_available_isa().
Isa active_isa();
/// Throws ParameterError if the ISA is not available on this CPU or build.
void set_active_isa(Isa isa);

/// Number of energies the active kernel integrates per pass over the table.
std::size_t preferred_batch();

void shoot(const RadialTable& table, std::span<const double> energies,
           std::span<LaneResult> out, std::size_t probe_step = 0);

} // namespace boxres::kernels
