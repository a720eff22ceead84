#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "qsrc/envelope.hpp"
#include "qsrc/grid.hpp"
#include "qsrc/types.hpp"

namespace qsrc {

struct MotionSpec {
    double omega0 = 1.0;     // trap frequency, angular MHz
    double eta_l = 0.0;      // Lamb-Dicke parameter of the driving laser
    double eta_r = 0.0;      // Lamb-Dicke parameter of the cavity mode
    double n_thermal = 0.0;  // effective initial mean vibrational number N
    int n_max = -1;          // Fock truncation; -1 -> auto_n_max(n_thermal)

    void validate() const;
    int resolved_n_max() const { return n_max < 0 ? auto_n_max(n_thermal) : n_max; }

    // smallest truncation with ceil(10N+5) levels and thermal tail mass < 1e-6
    static int auto_n_max(double n_thermal);
};

// Bose-Einstein occupation p_n = N^n/(1+N)^{n+1}, truncated at n_max and
// renormalized. Throws if the discarded mass is >= 1e-6.
std::vector<double> thermal_weights(double n_thermal, int n_max);

// Matrix elements of (l + l^+)^2 on the Fock ladder:
// diagonal 2n+1, and sqrt((n+1)(n+2)) between n and n+2.
struct LambDickeCoefficients {
    std::vector<double> diag;  // index n in [0, n_max]
    std::vector<double> off;   // index n in [0, n_max-2]
};
LambDickeCoefficients lamb_dicke_coefficients(int n_max);

struct PropagationOptions {
    double dt = 0.0;             // us; 0 -> min(0.02/nu_max, T/60000)
    int diagnostics_stride = 0;  // record every n-th step; 0 -> off
};

// Single-excitation wavefunction of one polarization branch at the end of the
// pulse. (l+l^+)^2 only couples n <-> n+-2, so a Fock-k initial state stays in
// its parity sector; `rows` lists the vibrational levels actually carried
// (with eta_l = eta_r = 0 the sector collapses to the initial level alone).
struct PropagationResult {
    int n_max = 0;
    std::vector<int> rows;
    int mode_count = 0;
    double dt = 0.0;
    long steps = 0;
    std::vector<std::complex<double>> atom;    // a_i(n): atom |i>, all fields vacuum
    std::vector<std::complex<double>> cavity;  // a_c(n): atom |f>, one cavity photon
    std::vector<std::complex<double>> modes;   // a_m(n), row-major [row][mode]
    double initial_norm_sq = 1.0;
    double final_norm_sq = 1.0;

    struct DiagnosticsRow {
        double t, norm, pop_atom, pop_cavity, pop_continuum;
    };
    std::vector<DiagnosticsRow> diagnostics;

    double photon_norm_sq() const;  // sum over rows and modes of |a_m(n)|^2
};

// One excitation by construction of the basis: returns the squared state norm.
double excitation_number(const PropagationResult& state);

double propagation_time_step(const PolarizationBranch& branch, const Pulse& pulse,
                             const MotionSpec& motion, const ContinuumGrid& grid);

// Fixed-step classical RK4 under the Lamb-Dicke Hamiltonian, continuum kept
// explicitly with e^{+-i omega t} coupling phases. OpenMP-parallel kernel;
// bit-identical for any worker count.
PropagationResult propagate(const PolarizationBranch& branch, const Pulse& pulse,
                            const MotionSpec& motion, const ContinuumGrid& grid,
                            int initial_level, const PropagationOptions& opts = {});

// Straightforward std::complex implementation on the full Fock basis, kept as
// the correctness reference for the optimized kernel.
PropagationResult propagate_reference(const PolarizationBranch& branch, const Pulse& pulse,
                                      const MotionSpec& motion, const ContinuumGrid& grid,
                                      int initial_level, const PropagationOptions& opts = {});

// Ideal transfer state on the grid: photon amplitude c_alpha G_alpha(omega_m) sqrt(d_omega)
// per branch and mode, no vibrational content. Kept unnormalized:
// norm^2 = sum_alpha |c_alpha|^2 (1 - e^{-2 mu_alpha}) up to quadrature.
struct TargetState {
    std::array<std::vector<std::complex<double>>, 2> photon;
    double norm_sq() const;
};
TargetState target_state(const SpectralEnvelope& env0, const SpectralEnvelope& env1,
                         const InitialSuperposition& c);

struct MotionFidelity {
    double p1 = 0.0;           // projection probability onto the ideal transfer state
    double transfer_p1 = 0.0;  // thermal-averaged photon-transfer probability
    double pn(int n) const;    // P(n) = P(1)^n: the vibrational state is re-prepared each cycle
};

// Caches the per-Fock-level propagations (they do not depend on N), so a
// sweep over thermal occupancies reuses them.
class MotionSolver {
public:
    MotionSolver(std::array<BranchSetup, 2> setup, InitialSuperposition c,
                 MotionSpec motion, ContinuumGrid grid, PropagationOptions opts = {});

    MotionFidelity fidelity(double n_thermal);
    int n_max() const { return motion_.resolved_n_max(); }

    // initial Fock levels with thermal weight below this are skipped; their
    // total contribution to P(1) is bounded by the skipped mass
    static constexpr double kLevelWeightCutoff = 1e-5;

private:
    struct LevelData {
        std::array<std::vector<std::complex<double>>, 2> overlap;  // v_alpha,k over rows
        std::array<double, 2> photon_norm;
    };
    const LevelData& level(int k);

    std::array<BranchSetup, 2> setup_;
    InitialSuperposition c_;
    MotionSpec motion_;
    ContinuumGrid grid_;
    PropagationOptions opts_;
    bool identical_branches_;
    std::array<SpectralEnvelope, 2> env_;
    double target_norm_sq_;  // sum_alpha |c_alpha|^2 (1 - e^{-2 mu_alpha})
    std::map<int, LevelData> levels_;
};

MotionFidelity motion_fidelity(const std::array<BranchSetup, 2>& setup,
                               const InitialSuperposition& c, const MotionSpec& motion,
                               const ContinuumGrid& grid, const PropagationOptions& opts = {});

} // namespace qsrc
