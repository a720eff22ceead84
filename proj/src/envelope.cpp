#include "qsrc/envelope.hpp"

#include <cmath>

#include "qsrc/errors.hpp"
#include "qsrc/reduce.hpp"

namespace qsrc {

double pulse_integral_mu(const Pulse& pulse, const PolarizationBranch& branch, bool include_loss) {
    double kappa = include_loss ? branch.total_decay() : branch.k_c;
    double pref = branch.g * branch.g / (4.0 * branch.delta * branch.delta * kappa);
    return pref * pulse.area();
}

double pulse_integral_theta(const Pulse& pulse, double delta) {
    if (delta == 0.0) throw InvalidInputError("pulse_integral_theta: delta must be nonzero");
    return pulse.area() / (4.0 * delta);
}

double SpectralEnvelope::norm_sq() const {
    std::vector<double> terms(amplitude.size());
    for (std::size_t m = 0; m < amplitude.size(); ++m) terms[m] = std::norm(amplitude[m]);
    return pairwise_sum(std::span<const double>(terms)) * grid.spacing();
}

SpectralEnvelope spectral_envelope(const Pulse& pulse, const PolarizationBranch& branch,
                                   const ContinuumGrid& grid) {
    const double T = pulse.duration();
    grid.validate(branch.total_decay(), T);

    // time quadrature fine enough for the fastest grid phase and the pulse
    double step = std::min(1.0 / (8.0 * grid.half_bandwidth), T / 2000.0);
    int n_t = static_cast<int>(std::ceil(T / step));
    if (n_t % 2) ++n_t;
    const double h = T / n_t;

    // integrand Omega(t) g/(2 delta k_c) sqrt(k_c/pi) e^{-mu(t) - i(theta(t)+phi(t))},
    // with the e^{i omega t} factor applied per mode below
    std::vector<double> intensity(n_t + 1);
    for (int j = 0; j <= n_t; ++j) intensity[j] = pulse.intensity_at(j * h);
    std::vector<double> area = detail::cumulative_simpson(intensity, h);

    const double mu_pref = branch.g * branch.g / (4.0 * branch.delta * branch.delta * branch.k_c);
    const double amp_pref = branch.g / (2.0 * branch.delta * branch.k_c) * std::sqrt(branch.k_c / M_PI);

    // Simpson weights folded into the sampled integrand
    std::vector<double> wr(n_t + 1), wi(n_t + 1);
    for (int j = 0; j <= n_t; ++j) {
        double w = (j == 0 || j == n_t) ? h / 3.0 : (j % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
        double mu_t = mu_pref * area[j];
        double ph = area[j] / (4.0 * branch.delta) + pulse.phase_at(j * h);
        double mag = w * amp_pref * std::sqrt(intensity[j]) * std::exp(-mu_t);
        wr[j] = mag * std::cos(ph);
        wi[j] = -mag * std::sin(ph);
    }

    const int m_total = grid.mode_count;
    SpectralEnvelope env{branch.label, grid, std::vector<std::complex<double>>(m_total)};

    constexpr int kChunk = 256;
    const int n_chunks = (m_total + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < n_chunks; ++c) {
        int m0 = c * kChunk;
        int mc = std::min(kChunk, m_total - m0);
        double gr[kChunk], gi[kChunk], pr[kChunk], pi[kChunk], rr[kChunk], ri[kChunk];
        for (int m = 0; m < mc; ++m) {
            gr[m] = gi[m] = 0.0;
            pr[m] = 1.0;  // e^{i omega t} at t=0
            pi[m] = 0.0;
            double om_h = grid.omega(m0 + m) * h;
            rr[m] = std::cos(om_h);
            ri[m] = std::sin(om_h);
        }
        for (int j = 0; j <= n_t; ++j) {
            double a = wr[j], b = wi[j];
            for (int m = 0; m < mc; ++m) {
                gr[m] += a * pr[m] - b * pi[m];
                gi[m] += a * pi[m] + b * pr[m];
                double nr = pr[m] * rr[m] - pi[m] * ri[m];
                pi[m] = pr[m] * ri[m] + pi[m] * rr[m];
                pr[m] = nr;
            }
        }
        for (int m = 0; m < mc; ++m) env.amplitude[m0 + m] = {gr[m], gi[m]};
    }
    return env;
}

std::complex<double> wavepacket_overlap(const SpectralEnvelope& env, double dt) {
    std::vector<std::complex<double>> terms(env.amplitude.size());
    for (std::size_t m = 0; m < env.amplitude.size(); ++m) {
        double om = env.grid.omega(static_cast<int>(m));
        terms[m] = std::norm(env.amplitude[m]) *
                   std::complex<double>(std::cos(om * dt), std::sin(om * dt));
    }
    return pairwise_sum(std::span<const std::complex<double>>(terms)) * env.grid.spacing();
}

} // namespace qsrc
