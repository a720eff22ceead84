#pragma once

#include <complex>
#include <vector>

#include "qsrc/grid.hpp"
#include "qsrc/pulse.hpp"
#include "qsrc/types.hpp"

namespace qsrc {

// mu(T) = (g^2 / 4 delta^2 kappa) * int_0^T Omega_s^2 dt, kappa = k_c
// (or k_c + k_a when include_loss: photon absorption adds a decay channel)
double pulse_integral_mu(const Pulse& pulse, const PolarizationBranch& branch,
                         bool include_loss = false);

// Stark phase theta(T) = int_0^T Omega_s^2/(4 delta) dt
double pulse_integral_theta(const Pulse& pulse, double delta);

// Complex amplitude of the emitted single-photon wavepacket over the
// discretized continuum, units MHz^-1/2.
struct SpectralEnvelope {
    int branch_label = 0;
    ContinuumGrid grid;
    std::vector<std::complex<double>> amplitude;

    // sum_m |G(omega_m)|^2 d_omega; equals 1 - e^{-2 mu} up to quadrature
    // and band truncation
    double norm_sq() const;
};

SpectralEnvelope spectral_envelope(const Pulse& pulse, const PolarizationBranch& branch,
                                   const ContinuumGrid& grid);

// Commutator kernel [B(t_k), B^+(t_j)] of two wavepacket operators offset by
// dt = t_j - t_k: sum_m |G|^2 e^{i omega_m dt} d_omega. At dt=0 this is the
// envelope norm; it decays once the packets no longer overlap.
std::complex<double> wavepacket_overlap(const SpectralEnvelope& env, double dt);

} // namespace qsrc
