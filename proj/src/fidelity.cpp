#include "qsrc/fidelity.hpp"

#include <cmath>
#include <sstream>

#include "qsrc/envelope.hpp"
#include "qsrc/errors.hpp"

namespace qsrc {

void PolarizationBranch::validate(bool strict) const {
    std::ostringstream err;
    if (!(g > 0.0)) err << "branch " << label << ": g must be > 0 (got " << g << ")";
    else if (!(delta > 0.0)) err << "branch " << label << ": delta must be > 0 (got " << delta << ")";
    else if (!(k_c > 0.0)) err << "branch " << label << ": k_c must be > 0 (got " << k_c << ")";
    else if (k_a < 0.0) err << "branch " << label << ": k_a must be >= 0 (got " << k_a << ")";
    else if (strict && delta < 10.0 * std::max(g, k_c))
        err << "branch " << label << ": large-detuning regime requires delta >= 10*max(g, k_c) = "
            << 10.0 * std::max(g, k_c) << " (got " << delta << "); disable strict_detuning to override";
    else return;
    throw InvalidInputError(err.str());
}

void InitialSuperposition::validate() const {
    double norm = w0() + w1();
    if (std::abs(norm - 1.0) > 1e-12) {
        std::ostringstream err;
        err << "initial superposition: |c0|^2 + |c1|^2 = " << norm << ", must be 1 within 1e-12";
        throw InvalidInputError(err.str());
    }
}

double ideal_fidelity(int n, const std::array<BranchSetup, 2>& setup,
                      const InitialSuperposition& c) {
    if (n < 0) throw InvalidInputError("ideal_fidelity: n must be >= 0");
    double p = 0.0;
    const double w[2] = {c.w0(), c.w1()};
    for (int a = 0; a < 2; ++a) {
        double mu = pulse_integral_mu(setup[a].pulse, setup[a].branch);
        p += w[a] * std::pow(1.0 - std::exp(-2.0 * mu), n);
    }
    return p;
}

EntangledStateCoefficients project_measurement(const InitialSuperposition& c, int sign, int n) {
    if (n < 1) throw InvalidInputError("project_measurement: n must be >= 1");
    if (sign != 1 && sign != -1) throw InvalidInputError("project_measurement: sign must be +1 or -1");
    double norm = std::sqrt(c.w0() + c.w1());
    if (norm == 0.0) throw InvalidInputError("project_measurement: c0 = c1 = 0");
    return {c.c0 / norm, static_cast<double>(sign) * c.c1 / norm, n};
}

} // namespace qsrc
