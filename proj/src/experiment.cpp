#include "qsrc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qsrc/errors.hpp"
#include "qsrc/fidelity.hpp"

namespace qsrc {

namespace {

std::vector<double> sorted_sweep(const ExperimentConfig& cfg) {
    if (!cfg.sweep_variable) return {};
    std::vector<double> v = cfg.sweep_values;
    std::sort(v.begin(), v.end());
    return v;
}

std::array<BranchSetup, 2> with_loss_ratio(const std::array<BranchSetup, 2>& setup,
                                           double ka_over_kc) {
    std::array<BranchSetup, 2> s = setup;
    for (auto& bs : s) bs.branch.k_a = ka_over_kc * bs.branch.k_c;
    return s;
}

ResultTable run_ideal(const ExperimentConfig& cfg) {
    ResultTable t;
    t.columns = {"n", "fidelity"};
    for (int n = cfg.n_min; n <= cfg.n_max_cycles; ++n)
        t.rows.push_back({static_cast<double>(n), ideal_fidelity(n, cfg.setup, cfg.initial)});
    return t;
}

ResultTable run_intensity_noise(const ExperimentConfig& cfg) {
    ResultTable t;
    std::vector<double> frs = sorted_sweep(cfg);
    bool swept = !frs.empty();
    if (!swept)
        frs = {cfg.noise.relative_fluctuation
                   ? *cfg.noise.relative_fluctuation
                   : convert_d_to_fr(*cfg.noise.diffusion, cfg.setup[0].pulse)};

    t.columns = {"fr", "n", "fidelity"};
    if (cfg.noise_monte_carlo) t.columns.push_back("mc_std_error");

    for (double fr : frs) {
        std::array<double, 2> d = {convert_fr_to_d(fr, cfg.setup[0].pulse),
                                   convert_fr_to_d(fr, cfg.setup[1].pulse)};
        if (cfg.noise_monte_carlo) {
            std::array<McTransferStats, 2> st;
            st[0] = mc_transfer_stats(cfg.setup[0].pulse, cfg.setup[0].branch, d[0],
                                      cfg.noise.seed, cfg.noise.sample_count, cfg.noise.steps);
            st[1] = cfg.identical_branches
                        ? st[0]
                        : mc_transfer_stats(cfg.setup[1].pulse, cfg.setup[1].branch, d[1],
                                            cfg.noise.seed + 1, cfg.noise.sample_count,
                                            cfg.noise.steps);
            const double w[2] = {cfg.initial.w0(), cfg.initial.w1()};
            for (int n = cfg.n_min; n <= cfg.n_max_cycles; ++n) {
                double value = 0.0, var = 0.0;
                for (int a = 0; a < 2; ++a) {
                    value += w[a] * std::pow(st[a].mean, n);
                    double dfd = w[a] * n * std::pow(st[a].mean, n - 1) * st[a].std_error;
                    var += dfd * dfd;
                }
                t.rows.push_back({fr, static_cast<double>(n), value, std::sqrt(var)});
                t.warnings.push_back(st[0].validity_warning || st[1].validity_warning ||
                                     value < 0.0 || value > 1.0);
            }
        } else {
            for (int n = cfg.n_min; n <= cfg.n_max_cycles; ++n) {
                AveragedFidelity af = averaged_fidelity(n, cfg.setup, cfg.initial, d);
                t.rows.push_back({fr, static_cast<double>(n), af.value});
                t.warnings.push_back(af.validity_warning || af.value < 0.0 || af.value > 1.0);
            }
        }
    }
    return t;
}

ResultTable run_loss(const ExperimentConfig& cfg) {
    ResultTable t;
    std::vector<double> ratios = sorted_sweep(cfg);
    bool swept = !ratios.empty();
    t.columns = swept ? std::vector<std::string>{"ka_over_kc", "n", "fidelity"}
                      : std::vector<std::string>{"n", "fidelity"};
    if (!swept) ratios = {cfg.setup[0].branch.k_a / cfg.setup[0].branch.k_c};
    for (double ratio : ratios) {
        std::array<BranchSetup, 2> s = swept ? with_loss_ratio(cfg.setup, ratio) : cfg.setup;
        for (int n = cfg.n_min; n <= cfg.n_max_cycles; ++n) {
            double p = loss_fidelity(n, s, cfg.initial);
            if (swept)
                t.rows.push_back({ratio, static_cast<double>(n), p});
            else
                t.rows.push_back({static_cast<double>(n), p});
        }
    }
    return t;
}

ResultTable run_motion(const ExperimentConfig& cfg) {
    ResultTable t;
    std::vector<double> occupancies = sorted_sweep(cfg);
    bool swept = !occupancies.empty();
    if (!swept) occupancies = {cfg.motion.n_thermal};
    t.columns = {"n_thermal", "n", "fidelity"};

    // propagations depend on n_max but not on N: share them across the sweep
    MotionSolver solver(cfg.setup, cfg.initial, cfg.motion, cfg.grid);
    for (double occupancy : occupancies) {
        MotionFidelity f = solver.fidelity(occupancy);
        for (int n = cfg.n_min; n <= cfg.n_max_cycles; ++n)
            t.rows.push_back({occupancy, static_cast<double>(n), f.pn(n)});
    }
    return t;
}

} // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.mode) {
        case Mode::ideal: return run_ideal(cfg);
        case Mode::intensity_noise: return run_intensity_noise(cfg);
        case Mode::loss: return run_loss(cfg);
        case Mode::motion: return run_motion(cfg);
    }
    throw ConfigError("unreachable: bad mode");
}

// ---------------------------------------------------------------------------
// Figure reproductions. Captions fix the optical parameters: square pulse,
// identical branches, g = sqrt(I) = 60 MHz, delta = 1500 MHz, k_c = 25 MHz,
// T = 30 us, equal superposition.

namespace {

constexpr double kFigG = 60.0, kFigI = 3600.0, kFigDelta = 1500.0, kFigKc = 25.0, kFigT = 30.0;

ExperimentConfig figure_base() {
    ExperimentConfig cfg;
    PolarizationBranch b{kFigG, kFigDelta, kFigKc, 0.0, 0};
    Pulse pulse = Pulse::square(kFigI, kFigT);
    cfg.setup = {BranchSetup{b, pulse}, BranchSetup{b, pulse}};
    cfg.setup[1].branch.label = 1;
    cfg.identical_branches = true;
    cfg.initial.c0 = cfg.initial.c1 = 1.0 / std::sqrt(2.0);
    cfg.grid = ContinuumGrid::auto_sized(kFigKc, kFigT);
    return cfg;
}

std::string curve_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
    return v;
}

struct Curve {
    std::string suffix;   // file name suffix, e.g. "fr0.1"
    std::string title;    // gnuplot title
    ResultTable table;
};

FigureOutput write_figure(const std::string& id, const std::string& out_dir,
                          const std::vector<Curve>& curves, const std::string& xlabel) {
    std::filesystem::create_directories(out_dir);
    FigureOutput out;
    std::ostringstream script;
    script << "# gnuplot script reproducing " << id << "\n"
           << "set terminal pngcairo size 900,620\n"
           << "set output '" << id << ".png'\n"
           << "set xlabel '" << xlabel << "'\n"
           << "set ylabel 'P(n)'\n"
           << "set yrange [0:1]\n"
           << "set key bottom left\n"
           << "set datafile separator ','\n"
           << "plot \\\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        std::string name = id + "_" + curves[i].suffix + ".csv";
        std::string path = (std::filesystem::path(out_dir) / name).string();
        emit_csv(curves[i].table, path);
        out.csv_paths.push_back(path);
        script << "  '" << name << "' skip 1 using 1:2 with linespoints title '"
               << curves[i].title << "'" << (i + 1 < curves.size() ? ", \\\n" : "\n");
    }
    std::string script_path = (std::filesystem::path(out_dir) / (id + ".gp")).string();
    std::ofstream f(script_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + script_path);
    f << script.str();
    out.script_path = script_path;
    return out;
}

ResultTable single_sweep_value(const ResultTable& full, double value) {
    // (sweep value, n, fidelity) -> (n, fidelity) at one sweep value
    ResultTable t;
    t.columns = {full.columns[1], full.columns[2]};
    for (const auto& row : full.rows)
        if (row[0] == value) t.rows.push_back({row[1], row[2]});
    return t;
}

} // namespace

FigureOutput figure_command(const std::string& figure_id, const std::string& out_dir,
                            std::uint64_t seed) {
    ExperimentConfig cfg = figure_base();
    cfg.seed = seed;
    cfg.noise.seed = seed;

    if (figure_id == "fig2") {
        // P(n) vs n for F_r = 0, 0.1, 0.2
        cfg.mode = Mode::intensity_noise;
        cfg.n_min = 1;
        cfg.n_max_cycles = 15;
        cfg.sweep_variable = "fr";
        cfg.sweep_values = {0.0, 0.1, 0.2};
        ResultTable full = run_experiment(cfg);
        std::vector<Curve> curves;
        for (double fr : cfg.sweep_values)
            curves.push_back({"fr" + curve_label(fr), "F_r = " + curve_label(fr),
                              single_sweep_value(full, fr)});
        return write_figure("fig2", out_dir, curves, "n");
    }
    if (figure_id == "fig3") {
        // P(n) vs F_r for n = 3, 5, 10
        cfg.mode = Mode::intensity_noise;
        cfg.sweep_variable = "fr";
        cfg.sweep_values = linspace(0.0, 0.5, 25);
        std::vector<Curve> curves;
        for (int n : {3, 5, 10}) {
            cfg.n_min = cfg.n_max_cycles = n;
            ResultTable full = run_experiment(cfg);
            ResultTable t;
            t.columns = {"fr", "fidelity"};
            for (const auto& row : full.rows) t.rows.push_back({row[0], row[2]});
            curves.push_back({"n" + std::to_string(n), "n = " + std::to_string(n), t});
        }
        return write_figure("fig3", out_dir, curves, "F_r");
    }
    if (figure_id == "fig4") {
        // P(n) vs n for k_a/k_c = 0, 0.001, 0.005, 0.01
        cfg.mode = Mode::loss;
        cfg.n_min = 1;
        cfg.n_max_cycles = 15;
        cfg.sweep_variable = "ka_over_kc";
        cfg.sweep_values = {0.0, 0.001, 0.005, 0.01};
        ResultTable full = run_experiment(cfg);
        std::vector<Curve> curves;
        for (double r : cfg.sweep_values)
            curves.push_back({"ka" + curve_label(r), "k_a/k_c = " + curve_label(r),
                              single_sweep_value(full, r)});
        return write_figure("fig4", out_dir, curves, "n");
    }
    if (figure_id == "fig5") {
        // P(n) vs k_a/k_c for n = 3, 5, 10
        cfg.mode = Mode::loss;
        cfg.sweep_variable = "ka_over_kc";
        cfg.sweep_values = linspace(0.0, 0.01, 25);
        std::vector<Curve> curves;
        for (int n : {3, 5, 10}) {
            cfg.n_min = cfg.n_max_cycles = n;
            ResultTable full = run_experiment(cfg);
            ResultTable t;
            t.columns = {"ka_over_kc", "fidelity"};
            for (const auto& row : full.rows) t.rows.push_back({row[0], row[2]});
            curves.push_back({"n" + std::to_string(n), "n = " + std::to_string(n), t});
        }
        return write_figure("fig5", out_dir, curves, "k_a/k_c");
    }
    if (figure_id == "fig6") {
        // P(n) vs n for N = 0.01, 0.1, 0.5, 1 (omega0 = 1 MHz, eta = 0.07)
        cfg.mode = Mode::motion;
        cfg.n_min = 1;
        cfg.n_max_cycles = 15;
        cfg.motion.omega0 = 1.0;
        cfg.motion.eta_l = cfg.motion.eta_r = 0.07;
        cfg.sweep_variable = "n_thermal";
        cfg.sweep_values = {0.01, 0.1, 0.5, 1.0};
        cfg.motion.n_max = MotionSpec::auto_n_max(1.0);
        ResultTable full = run_experiment(cfg);
        std::vector<Curve> curves;
        for (double occupancy : cfg.sweep_values)
            curves.push_back({"N" + curve_label(occupancy), "N = " + curve_label(occupancy),
                              single_sweep_value(full, occupancy)});
        return write_figure("fig6", out_dir, curves, "n");
    }
    throw ConfigError("unknown figure id '" + figure_id +
                      "' (expected fig2, fig3, fig4, fig5 or fig6)");
}

} // namespace qsrc
