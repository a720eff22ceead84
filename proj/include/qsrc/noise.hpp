#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qsrc/types.hpp"

namespace qsrc {

struct NoiseSpec {
    // exactly one of the two must be set
    std::optional<double> diffusion;             // D, MHz^4 us
    std::optional<double> relative_fluctuation;  // F_r, dimensionless
    std::uint64_t seed = 1;
    long long sample_count = 100000;
    int steps = 2000;  // Wiener discretization steps per pulse

    void validate() const;
    double resolve_diffusion(const Pulse& pulse) const;
};

// F_r = sqrt(D T) / area  <->  D = F_r^2 area^2 / T
double convert_fr_to_d(double fr, const Pulse& pulse);
double convert_d_to_fr(double diffusion, const Pulse& pulse);

struct MuStatistics {
    double mean;
    double variance;  // sigma^2 = g^4 D T / (16 delta^4 k_c^2)
};

MuStatistics mu_statistics(const Pulse& pulse, const PolarizationBranch& branch, double diffusion);

// One integrated-SDE draw: mu = (g^2/4 delta^2 k_c) [area + sqrt(D) sum_j sqrt(dt) z_j],
// z_j standard normals from the (seed, trial) substream. Deterministic per (seed, trial).
double sample_mu(const Pulse& pulse, const PolarizationBranch& branch, double diffusion,
                 std::uint64_t seed, std::uint64_t trial, int steps);

struct AveragedFidelity {
    double value;
    // raised when the Gaussian mu model leaves its validity range
    // (2 sigma^2 > 2 <mu>, or P(mu < 0) > 1e-4)
    bool validity_warning = false;
};

// <P(n)> = sum_alpha |c_alpha|^2 (1 - e^{-2<mu> + 2 sigma^2})^n.
// The +2 sigma^2 follows from the Gaussian moment identity
// <e^{-2mu}> = e^{-2<mu> + 2 sigma^2}; the Monte Carlo sampler below is the
// model-exact cross-check.
AveragedFidelity averaged_fidelity(int n, const std::array<BranchSetup, 2>& setup,
                                   const InitialSuperposition& c,
                                   const std::array<double, 2>& diffusion);

// P(n) = sum_alpha |c_alpha|^2 [k_c/(k_c+k_a)]^n (1 - e^{-2 mu'})^n,
// mu' computed with the total decay k_c + k_a
double loss_fidelity(int n, const std::array<BranchSetup, 2>& setup,
                     const InitialSuperposition& c);

struct McTransferStats {
    double mean;       // <1 - e^{-2mu}> over trials
    double std_error;
    double mu_mean;
    double mu_variance;
    double negative_mu_fraction;
    bool validity_warning = false;
};

// Trials are independent substreams, so the result is bit-identical for any
// worker count; reductions are fixed-order pairwise sums.
McTransferStats mc_transfer_stats(const Pulse& pulse, const PolarizationBranch& branch,
                                  double diffusion, std::uint64_t seed, long long trials,
                                  int steps);

std::vector<double> mc_mu_samples(const Pulse& pulse, const PolarizationBranch& branch,
                                  double diffusion, std::uint64_t seed, long long trials,
                                  int steps);

} // namespace qsrc
