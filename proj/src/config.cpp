#include "qsrc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qsrc/errors.hpp"

namespace qsrc {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed, std::vector<std::string>& unknown) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            unknown.push_back(where.empty() ? it.key() : where + "." + it.key());
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing required key: " + where + key);
    if (!obj[key].is_number()) throw ConfigError(where + key + " must be a number");
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& where, const std::string& key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(where + key + " must be a number");
    return obj[key].get<double>();
}

PolarizationBranch parse_branch(const json& obj, const std::string& where, int label,
                                std::vector<std::string>& unknown, bool allow_identical) {
    std::set<std::string> allowed = {"g_mhz", "delta_mhz", "kc_mhz", "ka_mhz"};
    if (allow_identical) allowed.insert("identical");
    require_keys(obj, where, allowed, unknown);
    PolarizationBranch b;
    b.g = get_number(obj, where + ".", "g_mhz");
    b.delta = get_number(obj, where + ".", "delta_mhz");
    b.k_c = get_number(obj, where + ".", "kc_mhz");
    b.k_a = get_number_or(obj, where + ".", "ka_mhz", 0.0);
    b.label = label;
    return b;
}

Pulse parse_pulse(const json& obj, std::vector<std::string>& unknown) {
    if (!obj.is_object()) throw ConfigError("pulse must be an object");
    if (!obj.contains("shape")) throw ConfigError("missing required key: pulse.shape");
    std::string shape = obj["shape"].get<std::string>();

    PhaseProfile phase;
    if (obj.contains("phase_rad")) {
        const json& ph = obj["phase_rad"];
        if (ph.is_number()) {
            phase.constant = ph.get<double>();
        } else if (ph.is_array()) {
            if (!obj.contains("t_us"))
                throw ConfigError("pulse.phase_rad as an array requires pulse.t_us");
            phase.t = obj["t_us"].get<std::vector<double>>();
            phase.values = ph.get<std::vector<double>>();
        } else {
            throw ConfigError("pulse.phase_rad must be a number or an array");
        }
    }

    if (shape == "square") {
        require_keys(obj, "pulse", {"shape", "intensity_mhz2", "duration_us", "phase_rad"},
                     unknown);
        return Pulse(SquarePulse{get_number(obj, "pulse.", "intensity_mhz2"),
                                 get_number(obj, "pulse.", "duration_us")},
                     std::move(phase));
    }
    if (shape == "sine2_ramp") {
        require_keys(obj, "pulse",
                     {"shape", "peak_mhz2", "duration_us", "ramp_fraction", "phase_rad"}, unknown);
        return Pulse(SineSquaredRampPulse{get_number(obj, "pulse.", "peak_mhz2"),
                                          get_number(obj, "pulse.", "duration_us"),
                                          get_number(obj, "pulse.", "ramp_fraction")},
                     std::move(phase));
    }
    if (shape == "sampled") {
        require_keys(obj, "pulse", {"shape", "t_us", "omega2_mhz2", "phase_rad"}, unknown);
        if (!obj.contains("t_us") || !obj.contains("omega2_mhz2"))
            throw ConfigError("pulse: sampled shape requires t_us and omega2_mhz2");
        return Pulse(SampledPulse{obj["t_us"].get<std::vector<double>>(),
                                  obj["omega2_mhz2"].get<std::vector<double>>()},
                     std::move(phase));
    }
    throw ConfigError("pulse.shape must be one of square, sine2_ramp, sampled (got '" + shape +
                      "')");
}

std::complex<double> parse_amplitude(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(where + " must be a number or [re, im]");
}

Mode parse_mode(const std::string& s) {
    if (s == "ideal") return Mode::ideal;
    if (s == "intensity-noise") return Mode::intensity_noise;
    if (s == "loss") return Mode::loss;
    if (s == "motion") return Mode::motion;
    throw ConfigError("mode must be one of ideal, intensity-noise, loss, motion (got '" + s +
                      "')");
}

} // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    std::vector<std::string> unknown;
    require_keys(root, "",
                 {"mode", "branches", "pulse", "initial", "n_range", "sweep", "noise", "motion",
                  "grid", "strict_detuning", "output", "seed"},
                 unknown);

    ExperimentConfig cfg;
    if (!root.contains("mode")) throw ConfigError("missing required key: mode");
    cfg.mode = parse_mode(root["mode"].get<std::string>());

    if (!root.contains("pulse")) throw ConfigError("missing required key: pulse");
    Pulse pulse = parse_pulse(root["pulse"], unknown);

    if (!root.contains("branches")) throw ConfigError("missing required key: branches");
    const json& br = root["branches"];
    PolarizationBranch b0, b1;
    if (br.is_array()) {
        if (br.size() != 2) throw ConfigError("branches array must have exactly 2 entries");
        b0 = parse_branch(br[0], "branches[0]", 0, unknown, false);
        b1 = parse_branch(br[1], "branches[1]", 1, unknown, false);
        cfg.identical_branches = false;
    } else if (br.is_object()) {
        if (br.contains("identical") && !br["identical"].get<bool>())
            throw ConfigError("branches.identical = false requires an array of two branches");
        b0 = parse_branch(br, "branches", 0, unknown, true);
        b1 = b0;
        b1.label = 1;
        cfg.identical_branches = true;
    } else {
        throw ConfigError("branches must be an object or an array of two objects");
    }
    cfg.setup = {BranchSetup{b0, pulse}, BranchSetup{b1, pulse}};

    if (root.contains("initial")) {
        const json& ini = root["initial"];
        require_keys(ini, "initial", {"c0", "c1"}, unknown);
        cfg.initial.c0 = ini.contains("c0") ? parse_amplitude(ini["c0"], "initial.c0") : 0.0;
        cfg.initial.c1 = ini.contains("c1") ? parse_amplitude(ini["c1"], "initial.c1") : 0.0;
    } else {
        cfg.initial.c0 = cfg.initial.c1 = 1.0 / std::sqrt(2.0);
    }

    if (root.contains("n_range")) {
        const json& nr = root["n_range"];
        require_keys(nr, "n_range", {"min", "max"}, unknown);
        cfg.n_min = static_cast<int>(get_number_or(nr, "n_range.", "min", 1));
        cfg.n_max_cycles = static_cast<int>(get_number_or(nr, "n_range.", "max", 10));
    }

    if (root.contains("sweep")) {
        const json& sw = root["sweep"];
        require_keys(sw, "sweep", {"variable", "values"}, unknown);
        if (!sw.contains("variable") || !sw.contains("values"))
            throw ConfigError("sweep requires both variable and values");
        cfg.sweep_variable = sw["variable"].get<std::string>();
        cfg.sweep_values = sw["values"].get<std::vector<double>>();
        if (cfg.sweep_values.empty()) throw ConfigError("sweep.values must be non-empty");
    }

    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned())
            throw ConfigError("seed must be a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    cfg.noise.seed = cfg.seed;

    if (root.contains("noise")) {
        const json& ns = root["noise"];
        require_keys(ns, "noise",
                     {"fr", "d_mhz4us", "sample_count", "steps", "estimator", "samples_csv"},
                     unknown);
        if (ns.contains("fr")) cfg.noise.relative_fluctuation = get_number(ns, "noise.", "fr");
        if (ns.contains("d_mhz4us")) cfg.noise.diffusion = get_number(ns, "noise.", "d_mhz4us");
        if (ns.contains("sample_count"))
            cfg.noise.sample_count =
                static_cast<long long>(get_number(ns, "noise.", "sample_count"));
        if (ns.contains("steps"))
            cfg.noise.steps = static_cast<int>(get_number(ns, "noise.", "steps"));
        if (ns.contains("estimator")) {
            std::string est = ns["estimator"].get<std::string>();
            if (est == "monte-carlo") cfg.noise_monte_carlo = true;
            else if (est != "closed-form")
                throw ConfigError("noise.estimator must be closed-form or monte-carlo");
        }
        if (ns.contains("samples_csv")) cfg.mc_samples_csv = ns["samples_csv"].get<std::string>();
    }

    if (root.contains("motion")) {
        const json& mo = root["motion"];
        require_keys(mo, "motion", {"omega0_mhz", "eta_l", "eta_r", "n_thermal", "n_max"},
                     unknown);
        cfg.motion.omega0 = get_number(mo, "motion.", "omega0_mhz");
        cfg.motion.eta_l = get_number_or(mo, "motion.", "eta_l", 0.0);
        cfg.motion.eta_r = get_number_or(mo, "motion.", "eta_r", 0.0);
        cfg.motion.n_thermal = get_number_or(mo, "motion.", "n_thermal", 0.0);
        if (mo.contains("n_max"))
            cfg.motion.n_max = static_cast<int>(get_number(mo, "motion.", "n_max"));
    }

    if (root.contains("strict_detuning")) cfg.strict_detuning = root["strict_detuning"].get<bool>();
    if (root.contains("output")) cfg.output = root["output"].get<std::string>();

    if (!unknown.empty()) {
        std::ostringstream err;
        err << "unknown config key" << (unknown.size() > 1 ? "s" : "") << ": ";
        for (std::size_t i = 0; i < unknown.size(); ++i) err << (i ? ", " : "") << unknown[i];
        throw ConfigError(err.str());
    }

    // --- semantic validation and defaults ---
    cfg.setup[0].branch.validate(cfg.strict_detuning);
    cfg.setup[1].branch.validate(cfg.strict_detuning);
    cfg.initial.validate();
    if (cfg.n_min < 0 || cfg.n_max_cycles < cfg.n_min)
        throw ConfigError("n_range: need 0 <= min <= max");

    static const std::set<std::string> kSweepByMode[] = {
        {},                // ideal
        {"fr"},            // intensity-noise
        {"ka_over_kc"},    // loss
        {"n_thermal"},     // motion
    };
    if (cfg.sweep_variable) {
        const auto& allowed = kSweepByMode[static_cast<int>(cfg.mode)];
        if (!allowed.count(*cfg.sweep_variable))
            throw ConfigError("sweep.variable '" + *cfg.sweep_variable +
                              "' is not valid for this mode");
        for (double v : cfg.sweep_values)
            if (v < 0.0) throw ConfigError("sweep.values must be >= 0");
    }

    if (cfg.mode == Mode::intensity_noise) {
        if (!cfg.sweep_variable && !cfg.noise.diffusion && !cfg.noise.relative_fluctuation)
            throw ConfigError("intensity-noise mode requires noise.fr or noise.d_mhz4us (or an fr sweep)");
        if (cfg.sweep_variable && (cfg.noise.diffusion || cfg.noise.relative_fluctuation))
            throw ConfigError("intensity-noise: give either an fr sweep or a fixed noise level, not both");
        if (!cfg.sweep_variable) cfg.noise.validate();
        else {
            if (cfg.noise.sample_count < 1) throw ConfigError("noise.sample_count must be >= 1");
            if (cfg.noise.steps < 1) throw ConfigError("noise.steps must be >= 1");
        }
    }

    if (cfg.mode == Mode::motion) {
        if (!root.contains("motion")) throw ConfigError("motion mode requires a motion block");
        double n_cover = cfg.motion.n_thermal;
        if (cfg.sweep_variable)
            for (double v : cfg.sweep_values) n_cover = std::max(n_cover, v);
        if (cfg.motion.n_max < 0) cfg.motion.n_max = MotionSpec::auto_n_max(n_cover);
        MotionSpec check = cfg.motion;
        check.n_thermal = n_cover;
        check.validate();
    }

    double total_decay = std::max(cfg.setup[0].branch.total_decay(),
                                  cfg.setup[1].branch.total_decay());
    if (cfg.mode == Mode::loss && cfg.sweep_variable)
        for (double v : cfg.sweep_values)
            total_decay = std::max(total_decay, cfg.setup[0].branch.k_c * (1.0 + v));
    double duration = std::max(cfg.setup[0].pulse.duration(), cfg.setup[1].pulse.duration());
    if (root.contains("grid")) {
        const json& gr = root["grid"];
        std::vector<std::string> grid_unknown;
        require_keys(gr, "grid", {"half_bandwidth_mhz", "mode_count"}, grid_unknown);
        if (!grid_unknown.empty())
            throw ConfigError("unknown config key: " + grid_unknown.front());
        cfg.grid.half_bandwidth = get_number(gr, "grid.", "half_bandwidth_mhz");
        cfg.grid.mode_count = static_cast<int>(get_number(gr, "grid.", "mode_count"));
    } else {
        cfg.grid = ContinuumGrid::auto_sized(total_decay, duration);
    }
    cfg.grid.validate(total_decay, duration);

    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace qsrc
