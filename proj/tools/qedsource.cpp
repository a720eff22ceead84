// Command-line front end: deterministic cavity-QED entangled-photon source
// calculations (ideal / intensity-noise / loss / motion), figure
// reproductions, and spectral-envelope dumps. Worker count is controlled by
// OMP_NUM_THREADS; outputs are byte-identical for any value.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "qsrc/config.hpp"
#include "qsrc/envelope.hpp"
#include "qsrc/errors.hpp"
#include "qsrc/experiment.hpp"
#include "qsrc/fidelity.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_envelope_csv(const qsrc::SpectralEnvelope& env, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw qsrc::ConfigError("cannot open output file: " + path);
    std::fputs("omega_MHz,re_G,im_G,abs2_G\n", f);
    for (int m = 0; m < env.grid.mode_count; ++m) {
        std::fprintf(f, "%s,%s,%s,%s\n", qsrc::format_value(env.grid.omega(m)).c_str(),
                     qsrc::format_value(env.amplitude[m].real()).c_str(),
                     qsrc::format_value(env.amplitude[m].imag()).c_str(),
                     qsrc::format_value(std::norm(env.amplitude[m])).c_str());
    }
    std::fclose(f);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"qedsource: deterministic source of polarization-entangled photon wavepackets"};
    app.require_subcommand(1);

    std::string config_path, out_path, figure_id;
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the RNG seed")->each([&](std::string) {
            seed_given = true;
        });
    };

    CLI::App* run = app.add_subcommand("run", "run an experiment config and write its CSV table");
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_path, "output CSV path (overrides config.output)");
    add_seed(run);

    CLI::App* figure =
        app.add_subcommand("figure", "reproduce a paper-style figure as CSV curves + gnuplot script");
    figure->add_option("id", figure_id, "one of fig2, fig3, fig4, fig5, fig6")->required();
    figure->add_option("--out", out_path, "output directory")->required();
    add_seed(figure);

    CLI::App* envelope =
        app.add_subcommand("envelope", "dump the spectral envelope(s) G(omega) as CSV");
    envelope->add_option("config", config_path, "JSON experiment config")->required();
    envelope->add_option("--out", out_path, "output CSV path (overrides config.output)");
    add_seed(envelope);

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
    validate->add_option("config", config_path, "JSON experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (run->parsed()) {
        qsrc::ExperimentConfig cfg = qsrc::load_config(config_path);
        if (seed_given) {
            cfg.seed = seed;
            cfg.noise.seed = seed;
        }
        if (!out_path.empty()) cfg.output = out_path;
        if (cfg.output.empty()) throw qsrc::ConfigError("no output path (config.output or --out)");
        qsrc::ResultTable table = qsrc::run_experiment(cfg);
        if (cfg.mc_samples_csv && cfg.mode == qsrc::Mode::intensity_noise) {
            double fr = cfg.sweep_variable ? cfg.sweep_values.front() : 0.0;
            double d = cfg.sweep_variable
                           ? qsrc::convert_fr_to_d(fr, cfg.setup[0].pulse)
                           : cfg.noise.resolve_diffusion(cfg.setup[0].pulse);
            std::vector<double> mu =
                qsrc::mc_mu_samples(cfg.setup[0].pulse, cfg.setup[0].branch, d, cfg.noise.seed,
                                    cfg.noise.sample_count, cfg.noise.steps);
            qsrc::ResultTable samples;
            samples.columns = {"trial", "mu_sample"};
            for (std::size_t i = 0; i < mu.size(); ++i)
                samples.rows.push_back({static_cast<double>(i), mu[i]});
            qsrc::emit_csv(samples, *cfg.mc_samples_csv);
        }
        qsrc::emit_csv(table, cfg.output);
        std::cout << "wrote " << cfg.output << " (" << table.rows.size() << " rows)\n";
        return 0;
    }
    if (figure->parsed()) {
        qsrc::FigureOutput out = qsrc::figure_command(figure_id, out_path, seed_given ? seed : 1);
        for (const std::string& p : out.csv_paths) std::cout << "wrote " << p << "\n";
        std::cout << "wrote " << out.script_path << "\n";
        return 0;
    }
    if (envelope->parsed()) {
        qsrc::ExperimentConfig cfg = qsrc::load_config(config_path);
        if (!out_path.empty()) cfg.output = out_path;
        if (cfg.output.empty()) throw qsrc::ConfigError("no output path (config.output or --out)");
        qsrc::SpectralEnvelope env0 =
            qsrc::spectral_envelope(cfg.setup[0].pulse, cfg.setup[0].branch, cfg.grid);
        if (cfg.identical_branches) {
            write_envelope_csv(env0, cfg.output);
            std::cout << "wrote " << cfg.output << "\n";
        } else {
            qsrc::SpectralEnvelope env1 =
                qsrc::spectral_envelope(cfg.setup[1].pulse, cfg.setup[1].branch, cfg.grid);
            std::filesystem::path base(cfg.output);
            std::filesystem::path p0 = base.parent_path() / (base.stem().string() + "_b0.csv");
            std::filesystem::path p1 = base.parent_path() / (base.stem().string() + "_b1.csv");
            write_envelope_csv(env0, p0.string());
            write_envelope_csv(env1, p1.string());
            std::cout << "wrote " << p0.string() << "\nwrote " << p1.string() << "\n";
        }
        return 0;
    }
    // validate
    qsrc::ExperimentConfig cfg = qsrc::load_config(config_path);
    double mu0 = qsrc::pulse_integral_mu(cfg.setup[0].pulse, cfg.setup[0].branch);
    std::cout << "config OK: mode index " << static_cast<int>(cfg.mode) << ", "
              << (cfg.identical_branches ? "identical branches" : "two branches")
              << ", grid " << cfg.grid.mode_count << " modes over +-"
              << cfg.grid.half_bandwidth << " MHz, mu(T) = " << mu0 << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const qsrc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const qsrc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qsrc::InvalidInputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
