#include "qsrc/grid.hpp"

#include <cmath>
#include <sstream>

#include "qsrc/errors.hpp"

namespace qsrc {

double ContinuumGrid::recurrence_time() const {
    return 2.0 * M_PI / spacing();
}

ContinuumGrid ContinuumGrid::auto_sized(double total_decay, double duration) {
    double w = std::max(8.0 * total_decay, 16.0 * M_PI / duration);
    double max_spacing = 0.5 * M_PI / duration;
    int m = static_cast<int>(std::ceil(2.0 * w / max_spacing));
    return {w, m};
}

void ContinuumGrid::validate(double total_decay, double duration) const {
    std::ostringstream err;
    if (mode_count < 2) {
        err << "grid.mode_count must be >= 2 (got " << mode_count << ")";
    } else if (spacing() * duration > 0.5 * M_PI * (1.0 + 1e-12)) {
        err << "grid spacing " << spacing() << " MHz violates the recurrence bound d_omega*T <= pi/2 "
            << "(T = " << duration << " us); need mode_count >= "
            << std::ceil(4.0 * half_bandwidth * duration / M_PI);
    } else if (half_bandwidth < 8.0 * std::max(total_decay, 2.0 * M_PI / duration) * (1.0 - 1e-12)) {
        err << "grid.half_bandwidth_mhz = " << half_bandwidth << " too small; need >= "
            << 8.0 * std::max(total_decay, 2.0 * M_PI / duration);
    } else {
        return;
    }
    throw ConfigError(err.str());
}

} // namespace qsrc
