#include "qsrc/noise.hpp"

#include <cmath>
#include <sstream>

#include "qsrc/envelope.hpp"
#include "qsrc/errors.hpp"
#include "qsrc/reduce.hpp"
#include "qsrc/rng.hpp"

namespace qsrc {

namespace {
// P(mu < 0) > 1e-4 <=> <mu>/sigma below this quantile
constexpr double kNegMuQuantile = 3.71901648545568;
}

void NoiseSpec::validate() const {
    if (diffusion.has_value() == relative_fluctuation.has_value())
        throw InvalidInputError("noise: exactly one of d_mhz4us and fr must be given");
    if (diffusion && *diffusion < 0.0)
        throw InvalidInputError("noise: d_mhz4us must be >= 0");
    if (relative_fluctuation && *relative_fluctuation < 0.0)
        throw InvalidInputError("noise: fr must be >= 0");
    if (sample_count < 1) throw InvalidInputError("noise: sample_count must be >= 1");
    if (steps < 1) throw InvalidInputError("noise: steps must be >= 1");
}

double NoiseSpec::resolve_diffusion(const Pulse& pulse) const {
    return diffusion ? *diffusion : convert_fr_to_d(*relative_fluctuation, pulse);
}

double convert_fr_to_d(double fr, const Pulse& pulse) {
    if (fr < 0.0) throw InvalidInputError("convert_fr_to_d: fr must be >= 0");
    double area = pulse.area();
    if (area == 0.0 && fr > 0.0)
        throw InvalidInputError("convert_fr_to_d: zero pulse area with fr > 0");
    return fr * fr * area * area / pulse.duration();
}

double convert_d_to_fr(double diffusion, const Pulse& pulse) {
    double area = pulse.area();
    if (area == 0.0)
        throw InvalidInputError("convert_d_to_fr: zero pulse area");
    return std::sqrt(diffusion * pulse.duration()) / area;
}

MuStatistics mu_statistics(const Pulse& pulse, const PolarizationBranch& branch, double diffusion) {
    double pref = branch.g * branch.g / (4.0 * branch.delta * branch.delta * branch.k_c);
    double mean = pref * pulse.area();
    double variance = pref * pref * diffusion * pulse.duration();
    return {mean, variance};
}

double sample_mu(const Pulse& pulse, const PolarizationBranch& branch, double diffusion,
                 std::uint64_t seed, std::uint64_t trial, int steps) {
    if (steps < 1) throw InvalidInputError("sample_mu: steps must be >= 1");
    double pref = branch.g * branch.g / (4.0 * branch.delta * branch.delta * branch.k_c);
    if (diffusion == 0.0) return pref * pulse.area();
    auto rng = trial_rng(seed, trial);
    double sqrt_dt = std::sqrt(pulse.duration() / steps);
    double dw = 0.0;
    for (int j = 0; j < steps; j += 2) {
        GaussianPair z = gaussian_pair(rng);
        dw += sqrt_dt * z.z0;
        if (j + 1 < steps) dw += sqrt_dt * z.z1;
    }
    return pref * (pulse.area() + std::sqrt(diffusion) * dw);
}

AveragedFidelity averaged_fidelity(int n, const std::array<BranchSetup, 2>& setup,
                                   const InitialSuperposition& c,
                                   const std::array<double, 2>& diffusion) {
    if (n < 0) throw InvalidInputError("averaged_fidelity: n must be >= 0");
    AveragedFidelity out{0.0, false};
    const double w[2] = {c.w0(), c.w1()};
    for (int a = 0; a < 2; ++a) {
        MuStatistics st = mu_statistics(setup[a].pulse, setup[a].branch, diffusion[a]);
        if (st.variance > st.mean ||
            (st.variance > 0.0 && st.mean / std::sqrt(st.variance) < kNegMuQuantile))
            out.validity_warning = true;
        double factor = 1.0 - std::exp(-2.0 * st.mean + 2.0 * st.variance);
        out.value += w[a] * std::pow(factor, n);
    }
    return out;
}

double loss_fidelity(int n, const std::array<BranchSetup, 2>& setup,
                     const InitialSuperposition& c) {
    if (n < 0) throw InvalidInputError("loss_fidelity: n must be >= 0");
    double p = 0.0;
    const double w[2] = {c.w0(), c.w1()};
    for (int a = 0; a < 2; ++a) {
        const PolarizationBranch& b = setup[a].branch;
        double mu_loss = pulse_integral_mu(setup[a].pulse, b, /*include_loss=*/true);
        double escape = b.k_c / b.total_decay();
        p += w[a] * std::pow(escape * (1.0 - std::exp(-2.0 * mu_loss)), n);
    }
    return p;
}

std::vector<double> mc_mu_samples(const Pulse& pulse, const PolarizationBranch& branch,
                                  double diffusion, std::uint64_t seed, long long trials,
                                  int steps) {
    std::vector<double> mu(trials);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < trials; ++i)
        mu[i] = sample_mu(pulse, branch, diffusion, seed, static_cast<std::uint64_t>(i), steps);
    return mu;
}

McTransferStats mc_transfer_stats(const Pulse& pulse, const PolarizationBranch& branch,
                                  double diffusion, std::uint64_t seed, long long trials,
                                  int steps) {
    std::vector<double> mu = mc_mu_samples(pulse, branch, diffusion, seed, trials, steps);
    std::vector<double> value(trials);
    long long negatives = 0;
#pragma omp parallel for schedule(static) reduction(+ : negatives)
    for (long long i = 0; i < trials; ++i) {
        value[i] = 1.0 - std::exp(-2.0 * mu[i]);
        if (mu[i] < 0.0) ++negatives;
    }

    auto mean_of = [](const std::vector<double>& v) {
        return pairwise_sum(std::span<const double>(v)) / static_cast<double>(v.size());
    };
    McTransferStats st{};
    st.mean = mean_of(value);
    st.mu_mean = mean_of(mu);
    std::vector<double> dev(trials);
    for (long long i = 0; i < trials; ++i) dev[i] = (value[i] - st.mean) * (value[i] - st.mean);
    double var_value = pairwise_sum(std::span<const double>(dev)) / static_cast<double>(trials - 1);
    for (long long i = 0; i < trials; ++i) dev[i] = (mu[i] - st.mu_mean) * (mu[i] - st.mu_mean);
    st.mu_variance = pairwise_sum(std::span<const double>(dev)) / static_cast<double>(trials - 1);
    st.std_error = std::sqrt(var_value / static_cast<double>(trials));
    st.negative_mu_fraction = static_cast<double>(negatives) / static_cast<double>(trials);
    st.validity_warning = st.negative_mu_fraction > 1e-4;
    return st;
}

} // namespace qsrc
