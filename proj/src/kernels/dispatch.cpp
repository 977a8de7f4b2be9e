#include <atomic>
#include <string>

#include "boxres/error.hpp"
#include "boxres/kernels.hpp"

namespace boxres::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(BOXRES_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

bool cpu_has_avx512() {
#if defined(BOXRES_HAVE_AVX512) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx512f");
#else
    return false;
#endif
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{best_available_isa()};
    return slot;
}

} // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::avx512: return "avx512";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
    case Isa::avx512: return cpu_has_avx512();
    }
    return false;
}

Isa best_available_isa() {
    if (isa_supported(Isa::avx512)) {
        return Isa::avx512;
    }
    if (isa_supported(Isa::avx2)) {
        return Isa::avx2;
    }
    return Isa::scalar;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw ParameterError("instruction set '" + std::string(to_string(isa)) +
                             "' is not available on this machine");
    }
    active_slot().store(isa, std::memory_order_relaxed);
}

std::size_t preferred_batch() {
    switch (active_isa()) {
    case Isa::avx512: return 32;
    case Isa::avx2: return 16;
    case Isa::scalar: return 1;
    }
    return 1;
}

void shoot(const RadialTable& table, std::span<const double> energies, std::span<LaneResult> out,
           std::size_t probe_step) {
    if (out.size() < energies.size()) {
        throw ParameterError("kernel output span shorter than energy span");
    }
    switch (active_isa()) {
#if defined(BOXRES_HAVE_AVX512)
    case Isa::avx512: shoot_avx512(table, energies, out, probe_step); return;
#endif
#if defined(BOXRES_HAVE_AVX2)
    case Isa::avx2: shoot_avx2(table, energies, out, probe_step); return;
#endif
    default: shoot_scalar(table, energies, out, probe_step); return;
    }
}

} // namespace boxres::kernels
