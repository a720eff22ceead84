#pragma once

#include <variant>
#include <vector>

namespace qsrc {

// Units everywhere: angular MHz for rates/frequencies, us for times, so
// rate*time products are dimensionless.

struct SquarePulse {
    double intensity;  // Omega_s^2, MHz^2
    double duration;   // us
};

// sin^2 ramp up over ramp_fraction*T, flat top, sin^2 ramp down.
// ramp_fraction = 0.5 gives the pure Hann intensity profile.
struct SineSquaredRampPulse {
    double peak;           // MHz^2
    double duration;       // us
    double ramp_fraction;  // (0, 0.5]
};

// Piecewise-linear Omega_s^2 samples on a strictly increasing grid covering [0, T].
struct SampledPulse {
    std::vector<double> t;         // us
    std::vector<double> omega_sq;  // MHz^2
};

struct PhaseProfile {
    // constant unless samples are given (then piecewise-linear on `t`)
    double constant = 0.0;
    std::vector<double> t;
    std::vector<double> values;
};

class Pulse {
public:
    using Shape = std::variant<SquarePulse, SineSquaredRampPulse, SampledPulse>;

    Pulse(Shape shape, PhaseProfile phase = {});

    static Pulse square(double intensity, double duration, double phase = 0.0);

    double duration() const { return duration_; }
    double intensity_at(double t) const;  // Omega_s^2(t)
    double phase_at(double t) const;      // phi(t), radians
    double peak_intensity() const;

    // integral of Omega_s^2 over [0, T]: closed form for square and ramp,
    // composite Simpson (fixed step <= T/2000) for sampled profiles
    double area() const;

    const Shape& shape() const { return shape_; }
    bool is_square() const { return std::holds_alternative<SquarePulse>(shape_); }
    bool has_constant_phase() const { return phase_.t.empty(); }

private:
    void validate() const;

    Shape shape_;
    PhaseProfile phase_;
    double duration_;
};

namespace detail {
// cumulative integral of f sampled on n+1 uniform nodes (n even), spacing h;
// composite Simpson on even nodes, 3-point Newton-Cotes fill on odd nodes
std::vector<double> cumulative_simpson(const std::vector<double>& f, double h);
} // namespace detail

} // namespace qsrc
