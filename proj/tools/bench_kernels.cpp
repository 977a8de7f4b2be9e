// Throughput of the shooting kernels on the model potential.
// Usage: bench_kernels [box_size] [energies]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "boxres/kernels.hpp"
#include "boxres/radial_solver.hpp"

int main(int argc, char** argv) {
    using namespace boxres;
    const double box = argc > 1 ? std::atof(argv[1]) : 20.0;
    const int count = argc > 2 ? std::atoi(argv[2]) : 64;

    IntegrationParams params;
    params.box_size = box;
    const GridPlan plan = plan_grid(params);
    const kernels::RadialTable table = build_table(PotentialSpec{}, plan.r0, plan.step, plan.steps);
    std::vector<double> energies(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        energies[static_cast<std::size_t>(i)] = 0.5 + 4.0 * i / count;
    }
    std::vector<kernels::LaneResult> out(energies.size());

    std::printf("R = %g, %zu steps, %d energies\n", box, plan.steps, count);
    for (kernels::Isa isa : {kernels::Isa::scalar, kernels::Isa::avx2, kernels::Isa::avx512}) {
        if (!kernels::isa_supported(isa)) {
            std::printf("%-8s unavailable\n", kernels::to_string(isa).data());
            continue;
        }
        kernels::set_active_isa(isa);
        const auto t0 = std::chrono::steady_clock::now();
        kernels::shoot(table, energies, out);
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-8s %8.2f ms  %10.3g lane-steps/s\n", kernels::to_string(isa).data(), 1e3 * s,
                    static_cast<double>(plan.steps) * count / s);
    }
    return 0;
}
