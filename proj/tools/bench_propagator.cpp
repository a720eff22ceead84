// Times the OpenMP propagation kernel against the serial reference on a small
// case, then the kernel alone on a production-sized grid. Run manually:
//   OMP_NUM_THREADS=N ./qsrc_bench [--full]

#include <chrono>
#include <cstring>
#include <iostream>

#include <omp.h>

#include "qsrc/motion.hpp"

using namespace qsrc;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    bool full = argc > 1 && std::strcmp(argv[1], "--full") == 0;

    // small case: legal grid, a few vibrational levels
    PolarizationBranch branch{10.0, 100.0, 4.0, 0.0, 0};
    Pulse pulse = Pulse::square(640.0, 3.0);
    MotionSpec motion{2.0, 0.07, 0.07, 0.2, 9};
    ContinuumGrid grid = ContinuumGrid::auto_sized(branch.total_decay(), pulse.duration());

    std::cout << "threads: " << omp_get_max_threads() << "\n";
    std::cout << "small case: " << grid.mode_count << " modes, n_max " << motion.resolved_n_max()
              << "\n";

    auto t0 = clock_type::now();
    PropagationResult ref = propagate_reference(branch, pulse, motion, grid, 1);
    double t_ref = seconds_since(t0);

    t0 = clock_type::now();
    PropagationResult fast = propagate(branch, pulse, motion, grid, 1);
    double t_fast = seconds_since(t0);

    double max_diff = 0.0;
    for (std::size_t r = 0; r < fast.rows.size(); ++r) {
        std::size_t ref_row = static_cast<std::size_t>(fast.rows[r]);
        for (int m = 0; m < fast.mode_count; ++m)
            max_diff = std::max(max_diff, std::abs(fast.modes[r * fast.mode_count + m] -
                                                   ref.modes[ref_row * ref.mode_count + m]));
    }
    std::cout << "serial reference: " << t_ref << " s\n"
              << "openmp kernel:    " << t_fast << " s  (speedup x" << t_ref / t_fast << ")\n"
              << "max |amplitude difference| = " << max_diff << "\n";

    if (full) {
        PolarizationBranch big{60.0, 1500.0, 25.0, 0.0, 0};
        Pulse big_pulse = Pulse::square(3600.0, 30.0);
        MotionSpec big_motion{1.0, 0.07, 0.07, 1.0, -1};
        ContinuumGrid big_grid = ContinuumGrid::auto_sized(big.total_decay(), big_pulse.duration());
        std::cout << "full case: " << big_grid.mode_count << " modes, n_max "
                  << big_motion.resolved_n_max() << ", one Fock level k=0\n";
        t0 = clock_type::now();
        PropagationResult r = propagate(big, big_pulse, big_motion, big_grid, 0);
        std::cout << "openmp kernel: " << seconds_since(t0) << " s over " << r.steps
                  << " steps, " << r.rows.size() << " active rows\n";
    }
    return 0;
}
