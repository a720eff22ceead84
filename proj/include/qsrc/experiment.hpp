#pragma once

#include <string>
#include <vector>

#include "qsrc/config.hpp"
#include "qsrc/table.hpp"

namespace qsrc {

// Runs the configured experiment and assembles the result table, rows sorted
// by (sweep value, n). Deterministic for a given (config, seed) and worker
// count independent; all-or-nothing (errors abort before anything is emitted).
ResultTable run_experiment(const ExperimentConfig& cfg);

struct FigureOutput {
    std::vector<std::string> csv_paths;
    std::string script_path;
};

// Reproduces one of the paper-style figure parameterizations: one CSV per
// curve plus a standalone gnuplot script with the figure layout.
FigureOutput figure_command(const std::string& figure_id, const std::string& out_dir,
                            std::uint64_t seed);

} // namespace qsrc
