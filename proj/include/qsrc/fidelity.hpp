#pragma once

#include <array>

#include "qsrc/types.hpp"

namespace qsrc {

// P(n) = sum_alpha |c_alpha|^2 [1 - e^{-2 mu_alpha(T)}]^n
double ideal_fidelity(int n, const std::array<BranchSetup, 2>& setup,
                      const InitialSuperposition& c);

// Projection of the atomic state onto (|f0> + sign |f1>)/sqrt(2) after n
// cycles; yields the coefficients of the n-photon entangled state.
EntangledStateCoefficients project_measurement(const InitialSuperposition& c, int sign, int n);

} // namespace qsrc
