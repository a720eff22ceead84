#pragma once

namespace qsrc {

// Uniform discretization of the external e.m. continuum, symmetric about the
// cavity frequency (omega measured relative to omega_c). Modes sit at cell
// midpoints; each carries quadrature weight sqrt(spacing).
struct ContinuumGrid {
    double half_bandwidth = 0.0;  // W, angular MHz
    int mode_count = 0;           // M

    double spacing() const { return 2.0 * half_bandwidth / mode_count; }
    double omega(int m) const { return -half_bandwidth + (m + 0.5) * spacing(); }
    double recurrence_time() const;  // 2*pi/spacing

    // W = max(8*(k_c+k_a), 16*pi/T), spacing capped by d_omega*T <= pi/2
    static ContinuumGrid auto_sized(double total_decay, double duration);

    // invariants: M >= 2, d_omega*T <= pi/2, W >= 8*max(total_decay, 2*pi/T)
    void validate(double total_decay, double duration) const;
};

} // namespace qsrc
