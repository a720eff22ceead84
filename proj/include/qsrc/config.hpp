#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsrc/grid.hpp"
#include "qsrc/motion.hpp"
#include "qsrc/noise.hpp"
#include "qsrc/types.hpp"

namespace qsrc {

enum class Mode { ideal, intensity_noise, loss, motion };

struct ExperimentConfig {
    Mode mode = Mode::ideal;
    std::array<BranchSetup, 2> setup = {BranchSetup{{}, Pulse::square(1.0, 1.0)},
                                        BranchSetup{{}, Pulse::square(1.0, 1.0)}};
    bool identical_branches = true;
    InitialSuperposition initial;
    int n_min = 1;
    int n_max_cycles = 10;
    std::optional<std::string> sweep_variable;
    std::vector<double> sweep_values;
    NoiseSpec noise;
    bool noise_monte_carlo = false;
    std::optional<std::string> mc_samples_csv;
    MotionSpec motion;
    ContinuumGrid grid;
    bool strict_detuning = true;
    std::string output;
    std::uint64_t seed = 1;
};

// Parses and validates a JSON experiment description; unknown keys are a hard
// error (listing them), violated invariants name the field and the bound.
// Defaults: grid auto-sized from the branch decay rates and pulse duration,
// motion.n_max auto-sized from the largest thermal occupancy in play.
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

} // namespace qsrc
