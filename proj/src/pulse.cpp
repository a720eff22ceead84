#include "qsrc/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsrc/errors.hpp"

namespace qsrc {

namespace {

double lerp_on_grid(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

void check_sample_grid(const std::vector<double>& t, const std::vector<double>& v,
                       double duration, const char* what) {
    if (t.size() < 2 || t.size() != v.size())
        throw InvalidInputError(std::string(what) + ": need matching t/value arrays with >= 2 samples");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw InvalidInputError(std::string(what) + ": sample grid must be strictly increasing");
    if (t.front() > 0.0 || t.back() < duration)
        throw InvalidInputError(std::string(what) + ": sample grid must cover [0, T]");
    for (double x : v)
        if (!std::isfinite(x))
            throw InvalidInputError(std::string(what) + ": non-finite sample");
}

} // namespace

Pulse::Pulse(Shape shape, PhaseProfile phase) : shape_(std::move(shape)), phase_(std::move(phase)) {
    duration_ = std::visit([](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SampledPulse>)
            return s.t.empty() ? 0.0 : s.t.back();
        else
            return s.duration;
    }, shape_);
    validate();
}

Pulse Pulse::square(double intensity, double duration, double phase) {
    PhaseProfile p;
    p.constant = phase;
    return Pulse(SquarePulse{intensity, duration}, std::move(p));
}

void Pulse::validate() const {
    if (!(duration_ > 0.0)) throw InvalidInputError("pulse: duration must be > 0");
    if (const auto* sq = std::get_if<SquarePulse>(&shape_)) {
        if (!std::isfinite(sq->intensity) || sq->intensity < 0.0)
            throw InvalidInputError("pulse: square intensity must be finite and >= 0");
    } else if (const auto* rp = std::get_if<SineSquaredRampPulse>(&shape_)) {
        if (!std::isfinite(rp->peak) || rp->peak < 0.0)
            throw InvalidInputError("pulse: ramp peak must be finite and >= 0");
        if (!(rp->ramp_fraction > 0.0) || rp->ramp_fraction > 0.5)
            throw InvalidInputError("pulse: ramp_fraction must be in (0, 0.5]");
    } else {
        const auto& sp = std::get<SampledPulse>(shape_);
        check_sample_grid(sp.t, sp.omega_sq, duration_, "pulse");
        for (double v : sp.omega_sq)
            if (v < 0.0) throw InvalidInputError("pulse: Omega_s^2 samples must be >= 0");
    }
    if (!phase_.t.empty())
        check_sample_grid(phase_.t, phase_.values, duration_, "pulse phase");
    else if (!std::isfinite(phase_.constant))
        throw InvalidInputError("pulse phase: non-finite constant");
}

double Pulse::intensity_at(double t) const {
    if (t < 0.0 || t > duration_) return 0.0;
    return std::visit([&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SquarePulse>) {
            return s.intensity;
        } else if constexpr (std::is_same_v<S, SineSquaredRampPulse>) {
            double tr = s.ramp_fraction * s.duration;
            if (t < tr) {
                double u = std::sin(0.5 * M_PI * t / tr);
                return s.peak * u * u;
            }
            if (t > s.duration - tr) {
                double u = std::sin(0.5 * M_PI * (s.duration - t) / tr);
                return s.peak * u * u;
            }
            return s.peak;
        } else {
            return lerp_on_grid(s.t, s.omega_sq, t);
        }
    }, shape_);
}

double Pulse::phase_at(double t) const {
    if (phase_.t.empty()) return phase_.constant;
    return lerp_on_grid(phase_.t, phase_.values, t);
}

double Pulse::peak_intensity() const {
    return std::visit([&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SquarePulse>) return s.intensity;
        else if constexpr (std::is_same_v<S, SineSquaredRampPulse>) return s.peak;
        else return *std::max_element(s.omega_sq.begin(), s.omega_sq.end());
    }, shape_);
}

double Pulse::area() const {
    if (const auto* sq = std::get_if<SquarePulse>(&shape_))
        return sq->intensity * sq->duration;
    if (const auto* rp = std::get_if<SineSquaredRampPulse>(&shape_))
        return rp->peak * rp->duration * (1.0 - rp->ramp_fraction);
    int n = 2000;
    double h = duration_ / n;
    std::vector<double> f(n + 1);
    for (int j = 0; j <= n; ++j) f[j] = intensity_at(j * h);
    return detail::cumulative_simpson(f, h).back();
}

namespace detail {

std::vector<double> cumulative_simpson(const std::vector<double>& f, double h) {
    std::size_t n = f.size() - 1;
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 2; k <= n; k += 2)
        out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
    for (std::size_t k = 1; k <= n; k += 2) {
        if (k + 1 <= n)
            out[k] = out[k - 1] + h / 12.0 * (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1]);
        else
            out[k] = out[k - 1] + h / 2.0 * (f[k - 1] + f[k]);
    }
    return out;
}

} // namespace detail

} // namespace qsrc
