#include <doctest.h>

#include <cmath>

#include "qsrc/config.hpp"
#include "qsrc/errors.hpp"

using namespace qsrc;

namespace {
const char* kMinimalIdeal = R"({
  "mode": "ideal",
  "branches": {"g_mhz": 60, "delta_mhz": 1500, "kc_mhz": 25},
  "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30},
  "n_range": {"min": 1, "max": 10}
})";
}

TEST_CASE("minimal ideal config parses with auto grid") {
    ExperimentConfig cfg = parse_config_text(kMinimalIdeal);
    CHECK(cfg.mode == Mode::ideal);
    CHECK(cfg.identical_branches);
    CHECK(cfg.setup[0].branch.g == 60.0);
    CHECK(cfg.setup[1].branch.label == 1);
    // defaulted equal superposition
    CHECK(cfg.initial.w0() == doctest::Approx(0.5).epsilon(1e-12));
    // auto grid satisfies the recurrence bound
    CHECK(cfg.grid.spacing() * 30.0 <= 0.5 * M_PI + 1e-12);
    CHECK(cfg.grid.half_bandwidth == doctest::Approx(200.0));
}

TEST_CASE("validation errors name the offending field") {
    std::string bad = kMinimalIdeal;
    bad.replace(bad.find("\"kc_mhz\": 25"), 12, "\"kc_mhz\": -25");
    CHECK_THROWS_WITH_AS(parse_config_text(bad), doctest::Contains("k_c"), InvalidInputError);
}

TEST_CASE("unknown keys are a hard error listing them") {
    std::string extra = R"({
      "mode": "ideal",
      "branches": {"g_mhz": 60, "delta_mhz": 1500, "kc_mhz": 25, "qq_mhz": 1},
      "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30},
      "frobnicate": true
    })";
    CHECK_THROWS_WITH_AS(parse_config_text(extra), doctest::Contains("branches.qq_mhz"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(extra), doctest::Contains("frobnicate"), ConfigError);
}

TEST_CASE("mutually exclusive noise parameters") {
    std::string cfg = R"({
      "mode": "intensity-noise",
      "branches": {"g_mhz": 60, "delta_mhz": 1500, "kc_mhz": 25},
      "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30},
      "noise": {"fr": 0.1, "d_mhz4us": 3.888e6}
    })";
    CHECK_THROWS_WITH_AS(parse_config_text(cfg), doctest::Contains("exactly one"),
                         InvalidInputError);
}

TEST_CASE("sweep variable must match the mode") {
    std::string cfg = R"({
      "mode": "ideal",
      "branches": {"g_mhz": 60, "delta_mhz": 1500, "kc_mhz": 25},
      "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30},
      "sweep": {"variable": "fr", "values": [0, 0.1]}
    })";
    CHECK_THROWS_WITH_AS(parse_config_text(cfg), doctest::Contains("sweep.variable"), ConfigError);
}

TEST_CASE("strict detuning is on by default") {
    std::string cfg = R"({
      "mode": "ideal",
      "branches": {"g_mhz": 60, "delta_mhz": 400, "kc_mhz": 25},
      "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30}
    })";
    CHECK_THROWS_WITH_AS(parse_config_text(cfg), doctest::Contains("large-detuning"),
                         InvalidInputError);
    std::string relaxed = cfg;
    relaxed.insert(relaxed.rfind('}'), R"(, "strict_detuning": false)");
    CHECK_NOTHROW(parse_config_text(relaxed));
}

TEST_CASE("motion sweep sizes the Fock truncation for the largest occupancy") {
    std::string cfg = R"({
      "mode": "motion",
      "branches": {"g_mhz": 60, "delta_mhz": 1500, "kc_mhz": 25},
      "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30},
      "motion": {"omega0_mhz": 1.0, "eta_l": 0.07, "eta_r": 0.07, "n_thermal": 0.01},
      "sweep": {"variable": "n_thermal", "values": [0.01, 0.1, 0.5, 1.0]}
    })";
    ExperimentConfig parsed = parse_config_text(cfg);
    CHECK(parsed.motion.n_max == MotionSpec::auto_n_max(1.0));
}

TEST_CASE("two explicit branches") {
    std::string cfg = R"({
      "mode": "ideal",
      "branches": [
        {"g_mhz": 60, "delta_mhz": 1500, "kc_mhz": 25},
        {"g_mhz": 55, "delta_mhz": 1500, "kc_mhz": 22}
      ],
      "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30}
    })";
    ExperimentConfig parsed = parse_config_text(cfg);
    CHECK_FALSE(parsed.identical_branches);
    CHECK(parsed.setup[1].branch.g == 55.0);
    // grid must cover the wider of the two linewidths
    CHECK(parsed.grid.half_bandwidth >= 8.0 * 25.0);
}

TEST_CASE("initial superposition must be normalized") {
    std::string cfg = R"({
      "mode": "ideal",
      "branches": {"g_mhz": 60, "delta_mhz": 1500, "kc_mhz": 25},
      "pulse": {"shape": "square", "intensity_mhz2": 3600, "duration_us": 30},
      "initial": {"c0": 1.0, "c1": 0.5}
    })";
    CHECK_THROWS_AS(parse_config_text(cfg), InvalidInputError);
}

TEST_CASE("config must be valid JSON") {
    CHECK_THROWS_AS(parse_config_text("{oops"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
}
