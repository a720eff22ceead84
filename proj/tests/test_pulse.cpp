#include <doctest.h>

#include <cmath>

#include "cases.hpp"
#include "qsrc/envelope.hpp"
#include "qsrc/errors.hpp"
#include "qsrc/pulse.hpp"

using namespace qsrc;

namespace {
// brute-force oracle for pulse areas, independent of the Simpson path
double trapezoid_area(const Pulse& p, int n = 400000) {
    double h = p.duration() / n;
    double acc = 0.5 * (p.intensity_at(0.0) + p.intensity_at(p.duration()));
    for (int j = 1; j < n; ++j) acc += p.intensity_at(j * h);
    return acc * h;
}
} // namespace

TEST_CASE("pulse validation") {
    CHECK_THROWS_AS(Pulse::square(3600.0, 0.0), InvalidInputError);
    CHECK_THROWS_AS(Pulse::square(-1.0, 30.0), InvalidInputError);
    CHECK_THROWS_AS(Pulse::square(std::nan(""), 30.0), InvalidInputError);
    CHECK_THROWS_AS(Pulse(SineSquaredRampPulse{100.0, 10.0, 0.6}), InvalidInputError);
    // sampled grids must be strictly increasing and cover [0, T]
    CHECK_THROWS_AS(Pulse(SampledPulse{{0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}}), InvalidInputError);
    CHECK_THROWS_AS(Pulse(SampledPulse{{0.5, 1.0}, {1.0, 2.0}}), InvalidInputError);
    CHECK_THROWS_AS(Pulse(SampledPulse{{0.0, 1.0}, {1.0, -2.0}}), InvalidInputError);
    CHECK_THROWS_AS(Pulse(SampledPulse{{0.0, 1.0}, {1.0, std::nan("")}}), InvalidInputError);
}

TEST_CASE("pulse areas against brute-force quadrature") {
    Pulse ramp(SineSquaredRampPulse{3600.0, 30.0, 0.25});
    CHECK(ramp.area() == doctest::Approx(trapezoid_area(ramp)).epsilon(1e-8));
    CHECK(ramp.area() == doctest::Approx(3600.0 * 30.0 * 0.75).epsilon(1e-12));

    Pulse hann(SineSquaredRampPulse{3600.0, 30.0, 0.5});
    CHECK(hann.area() == doctest::Approx(3600.0 * 15.0).epsilon(1e-12));

    Pulse sampled(SampledPulse{{0.0, 10.0, 30.0}, {0.0, 1000.0, 500.0}});
    CHECK(sampled.area() == doctest::Approx(trapezoid_area(sampled)).epsilon(1e-8));
}

TEST_CASE("pulse integral mu: Fig. 2 parameters") {
    // closed form g^2 I T / (4 delta^2 k_c) = 1.728
    double mu = pulse_integral_mu(cases::fig_pulse(), cases::fig_branch());
    CHECK(mu == doctest::Approx(1.728).epsilon(1e-12));
    // brute-force quadrature oracle for the same integral
    double pref = 60.0 * 60.0 / (4.0 * 1500.0 * 1500.0 * 25.0);
    CHECK(mu == doctest::Approx(pref * trapezoid_area(cases::fig_pulse())).epsilon(1e-10));
}

TEST_CASE("pulse integral mu: trivial cases") {
    CHECK(pulse_integral_mu(Pulse::square(0.0, 30.0), cases::fig_branch()) == 0.0);
    double mu1 = pulse_integral_mu(Pulse::square(3600.0, 30.0), cases::fig_branch());
    double mu2 = pulse_integral_mu(Pulse::square(3600.0, 60.0), cases::fig_branch());
    CHECK(mu2 == doctest::Approx(2.0 * mu1).epsilon(1e-13));
    // loss channel enters through the total decay rate
    PolarizationBranch lossy = cases::fig_branch();
    lossy.k_a = 0.25;
    CHECK(pulse_integral_mu(cases::fig_pulse(), lossy, true) ==
          doctest::Approx(1.728 * 25.0 / 25.25).epsilon(1e-12));
}

TEST_CASE("pulse integral theta") {
    CHECK(pulse_integral_theta(cases::fig_pulse(), 1500.0) == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(pulse_integral_theta(Pulse::square(0.0, 30.0), 1500.0) == 0.0);
    CHECK(pulse_integral_theta(cases::fig_pulse(), 3000.0) ==
          doctest::Approx(9.0).epsilon(1e-12));
    CHECK_THROWS_AS(pulse_integral_theta(cases::fig_pulse(), 0.0), InvalidInputError);
}

TEST_CASE("branch validation") {
    PolarizationBranch b = cases::fig_branch();
    CHECK_NOTHROW(b.validate(true));
    b.k_c = -1.0;
    CHECK_THROWS_WITH_AS(b.validate(), doctest::Contains("k_c"), InvalidInputError);
    b = cases::fig_branch();
    b.delta = 400.0;  // < 10*g
    CHECK_NOTHROW(b.validate(false));
    CHECK_THROWS_AS(b.validate(true), InvalidInputError);
}
