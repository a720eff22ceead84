#pragma once

#include <complex>

#include "qsrc/pulse.hpp"

namespace qsrc {

// One polarization branch of the doubled Lambda scheme after adiabatic
// elimination: effective Raman coupling g, detuning delta, output-mirror
// decay k_c, loss-channel decay k_a. Angular MHz.
struct PolarizationBranch {
    double g = 0.0;
    double delta = 0.0;
    double k_c = 0.0;
    double k_a = 0.0;
    int label = 0;

    double total_decay() const { return k_c + k_a; }

    // strict: additionally require the large-detuning regime delta >= 10*max(g, k_c)
    void validate(bool strict = false) const;
};

struct InitialSuperposition {
    std::complex<double> c0{1.0, 0.0};
    std::complex<double> c1{0.0, 0.0};

    double w0() const { return std::norm(c0); }
    double w1() const { return std::norm(c1); }
    void validate() const;  // |c0|^2 + |c1|^2 = 1 within 1e-12
};

struct BranchSetup {
    PolarizationBranch branch;
    Pulse pulse;
};

// Measurement projection of the atomic state onto (|f0> ± |f1>)/sqrt(2):
// coefficients of |00...0> and |11...1> in the projected n-photon state.
struct EntangledStateCoefficients {
    std::complex<double> all_zero;
    std::complex<double> all_one;
    int n = 0;
};

} // namespace qsrc
