#include "qsrc/motion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsrc/errors.hpp"
#include "qsrc/reduce.hpp"

namespace qsrc {

// ---------------------------------------------------------------------------
// Fock-space pieces

void MotionSpec::validate() const {
    std::ostringstream err;
    int nm = resolved_n_max();
    if (!(omega0 > 0.0)) err << "motion.omega0_mhz must be > 0 (got " << omega0 << ")";
    else if (eta_l < 0.0 || eta_l > 0.5)
        err << "motion.eta_l must be in [0, 0.5] (got " << eta_l << ")";
    else if (eta_r < 0.0 || eta_r > 0.5)
        err << "motion.eta_r must be in [0, 0.5] (got " << eta_r << ")";
    else if (n_thermal < 0.0) err << "motion.n_thermal must be >= 0 (got " << n_thermal << ")";
    else if (nm < static_cast<int>(std::ceil(10.0 * n_thermal + 5.0)))
        err << "motion.n_max = " << nm << " too small; need >= ceil(10 N + 5) = "
            << static_cast<int>(std::ceil(10.0 * n_thermal + 5.0));
    else if (nm > 4096) err << "motion.n_max = " << nm << " unreasonably large";
    else return;
    throw InvalidInputError(err.str());
}

int MotionSpec::auto_n_max(double n_thermal) {
    int base = static_cast<int>(std::ceil(10.0 * n_thermal + 5.0));
    if (n_thermal <= 0.0) return base;
    double q = n_thermal / (1.0 + n_thermal);
    int n = base;
    while (std::pow(q, n + 1) >= 1e-6) ++n;
    return n;
}

std::vector<double> thermal_weights(double n_thermal, int n_max) {
    if (n_thermal < 0.0) throw InvalidInputError("thermal_weights: N must be >= 0");
    if (n_max < 0) throw InvalidInputError("thermal_weights: n_max must be >= 0");
    std::vector<double> p(n_max + 1, 0.0);
    if (n_thermal == 0.0) {
        p[0] = 1.0;
        return p;
    }
    double q = n_thermal / (1.0 + n_thermal);
    double tail = std::pow(q, n_max + 1);
    if (!(tail < 1e-6)) {
        std::ostringstream err;
        err << "thermal_weights: discarded mass " << tail << " >= 1e-6 at n_max = " << n_max
            << " for N = " << n_thermal;
        throw InvalidInputError(err.str());
    }
    double w = 1.0 - q;
    for (int n = 0; n <= n_max; ++n, w *= q) p[n] = w;
    double sum = pairwise_sum(std::span<const double>(p));
    for (double& x : p) x /= sum;
    return p;
}

LambDickeCoefficients lamb_dicke_coefficients(int n_max) {
    if (n_max < 0) throw InvalidInputError("lamb_dicke_coefficients: n_max must be >= 0");
    LambDickeCoefficients k;
    k.diag.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) k.diag[n] = 2.0 * n + 1.0;
    if (n_max >= 2) {
        k.off.resize(n_max - 1);
        for (int n = 0; n + 2 <= n_max; ++n)
            k.off[n] = std::sqrt(static_cast<double>(n + 1) * (n + 2));
    }
    return k;
}

// ---------------------------------------------------------------------------
// Propagation

namespace {

using cd = std::complex<double>;

struct HamiltonianTables {
    std::vector<int> rows;          // active vibrational levels
    std::vector<double> stark_l_d, stark_l_o;  // (1 - eta_l^2 K) on the rows
    std::vector<double> stark_c_d, stark_c_o;  // (1 - eta_r^2 K)
    std::vector<double> raman_d, raman_o;      // (1 - (eta_l^2+eta_r^2)/2 K)
    std::vector<double> vib;        // omega0 (n + 1/2)
    double stark_c_rate = 0.0;      // g^2/delta
    double kappa = 0.0;             // sqrt(k_c d_omega / pi)
};

HamiltonianTables make_tables(const PolarizationBranch& branch, const MotionSpec& motion,
                              const ContinuumGrid& grid, int initial_level) {
    int nm = motion.resolved_n_max();
    if (initial_level < 0 || initial_level > nm)
        throw InvalidInputError("propagate: initial vibrational level outside [0, n_max]");

    HamiltonianTables tb;
    double eta_l2 = motion.eta_l * motion.eta_l;
    double eta_r2 = motion.eta_r * motion.eta_r;
    if (eta_l2 + eta_r2 == 0.0) {
        // vibrational blocks decouple entirely
        tb.rows = {initial_level};
    } else {
        // (l+l^+)^2 couples n <-> n+-2 only: parity is conserved
        for (int n = initial_level % 2; n <= nm; n += 2) tb.rows.push_back(n);
    }
    std::size_t nr = tb.rows.size();
    LambDickeCoefficients k = lamb_dicke_coefficients(nm);
    double eta_lr2 = 0.5 * (eta_l2 + eta_r2);
    tb.stark_l_d.resize(nr);
    tb.stark_c_d.resize(nr);
    tb.raman_d.resize(nr);
    tb.vib.resize(nr);
    for (std::size_t r = 0; r < nr; ++r) {
        double kd = k.diag[tb.rows[r]];
        tb.stark_l_d[r] = 1.0 - eta_l2 * kd;
        tb.stark_c_d[r] = 1.0 - eta_r2 * kd;
        tb.raman_d[r] = 1.0 - eta_lr2 * kd;
        tb.vib[r] = motion.omega0 * (tb.rows[r] + 0.5);
    }
    if (nr > 1) {
        tb.stark_l_o.resize(nr - 1);
        tb.stark_c_o.resize(nr - 1);
        tb.raman_o.resize(nr - 1);
        for (std::size_t r = 0; r + 1 < nr; ++r) {
            double ko = k.off[tb.rows[r]];
            tb.stark_l_o[r] = -eta_l2 * ko;
            tb.stark_c_o[r] = -eta_r2 * ko;
            tb.raman_o[r] = -eta_lr2 * ko;
        }
    }
    tb.stark_c_rate = branch.g * branch.g / branch.delta;
    tb.kappa = std::sqrt(branch.k_c * grid.spacing() / M_PI);
    return tb;
}

// (1 - eta^2 K) applied to a vector on the active rows (tridiagonal in row index)
inline cd banded_apply(const std::vector<double>& d, const std::vector<double>& o,
                       const std::vector<cd>& v, std::size_t r) {
    cd out = d[r] * v[r];
    if (r > 0 && !o.empty()) out += o[r - 1] * v[r - 1];
    if (r + 1 < v.size() && !o.empty()) out += o[r] * v[r + 1];
    return out;
}

// One RK4 stage over the mode block of a single vibrational row.
// KIND: 0 = first (in: y; writes u, acc), 1 = middle (in: u; writes u, acc),
// 2 = last (in: u; writes y).
// Returns S = sum_m conj(ph_m) * in_m, accumulated in eight fixed lanes.
template <int KIND>
void mode_stage_row(int m_count, const double* __restrict phr, const double* __restrict phi,
                    double* ymr, double* ymi, double* umr, double* umi, double* amr, double* ami,
                    double q_re, double q_im, double w, double cu, double ca, double& s_re,
                    double& s_im) {
    double sr[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    double si[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    int m = 0;
    for (; m + 8 <= m_count; m += 8) {
        for (int l = 0; l < 8; ++l) {
            const int j = m + l;
            const double pr = phr[j], pi = phi[j];
            double ir, ii;
            if constexpr (KIND == 0) {
                ir = ymr[j];
                ii = ymi[j];
            } else {
                ir = umr[j];
                ii = umi[j];
            }
            sr[l] += pr * ir + pi * ii;
            si[l] += pr * ii - pi * ir;
            const double kr = pr * q_re - pi * q_im + w * ii;
            const double ki = pr * q_im + pi * q_re - w * ir;
            if constexpr (KIND == 0) {
                umr[j] = ir + cu * kr;
                umi[j] = ii + cu * ki;
                amr[j] = ir + ca * kr;
                ami[j] = ii + ca * ki;
            } else if constexpr (KIND == 1) {
                umr[j] = ymr[j] + cu * kr;
                umi[j] = ymi[j] + cu * ki;
                amr[j] += ca * kr;
                ami[j] += ca * ki;
            } else {
                ymr[j] = amr[j] + ca * kr;
                ymi[j] = ami[j] + ca * ki;
            }
        }
    }
    for (; m < m_count; ++m) {
        const double pr = phr[m], pi = phi[m];
        double ir, ii;
        if constexpr (KIND == 0) {
            ir = ymr[m];
            ii = ymi[m];
        } else {
            ir = umr[m];
            ii = umi[m];
        }
        sr[0] += pr * ir + pi * ii;
        si[0] += pr * ii - pi * ir;
        const double kr = pr * q_re - pi * q_im + w * ii;
        const double ki = pr * q_im + pi * q_re - w * ir;
        if constexpr (KIND == 0) {
            umr[m] = ir + cu * kr;
            umi[m] = ii + cu * ki;
            amr[m] = ir + ca * kr;
            ami[m] = ii + ca * ki;
        } else if constexpr (KIND == 1) {
            umr[m] = ymr[m] + cu * kr;
            umi[m] = ymi[m] + cu * ki;
            amr[m] += ca * kr;
            ami[m] += ca * ki;
        } else {
            ymr[m] = amr[m] + ca * kr;
            ymi[m] = ami[m] + ca * ki;
        }
    }
    s_re = ((sr[0] + sr[1]) + (sr[2] + sr[3])) + ((sr[4] + sr[5]) + (sr[6] + sr[7]));
    s_im = ((si[0] + si[1]) + (si[2] + si[3])) + ((si[4] + si[5]) + (si[6] + si[7]));
}

struct KernelState {
    std::size_t nr = 0;
    int m_count = 0;
    std::vector<cd> y_atom, y_cav, u_atom, u_cav, a_atom, a_cav;
    std::vector<double> ymr, ymi, umr, umi, amr, ami;  // [row][mode]
};

// One RK4 stage: mode blocks row-parallel, then the small atom/cavity block.
template <int KIND>
void run_stage(KernelState& st, const HamiltonianTables& tb, const Pulse& pulse,
               const PolarizationBranch& branch, double ts, const double* phr, const double* phi,
               double cu, double ca) {
    const std::size_t nr = st.nr;
    const int M = st.m_count;
    const double t_ev = std::clamp(ts, 0.0, pulse.duration());
    const double omega_sq = pulse.intensity_at(t_ev);
    const double stark_l = omega_sq / (4.0 * branch.delta);
    const double raman = branch.g * std::sqrt(omega_sq) / (2.0 * branch.delta);
    const double phase = pulse.phase_at(t_ev);
    const cd eip(std::cos(phase), std::sin(phase));

    const std::vector<cd>& in_atom = (KIND == 0) ? st.y_atom : st.u_atom;
    const std::vector<cd>& in_cav = (KIND == 0) ? st.y_cav : st.u_cav;
    // stage input small block, saved before any overwrite
    std::vector<cd> atom_in(in_atom), cav_in(in_cav);
    std::vector<cd> gathered(nr);

#pragma omp parallel for schedule(static)
    for (long r = 0; r < static_cast<long>(nr); ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * M;
        cd q = tb.kappa * cav_in[r];
        double s_re, s_im;
        mode_stage_row<KIND>(M, phr, phi, st.ymr.data() + off, st.ymi.data() + off,
                             st.umr.data() + off, st.umi.data() + off, st.amr.data() + off,
                             st.ami.data() + off, q.real(), q.imag(), tb.vib[r], cu, ca, s_re,
                             s_im);
        gathered[r] = {s_re, s_im};
    }

    const cd minus_i(0.0, -1.0);
    for (std::size_t r = 0; r < nr; ++r) {
        cd k_atom = minus_i * (stark_l * banded_apply(tb.stark_l_d, tb.stark_l_o, atom_in, r) +
                               tb.vib[r] * atom_in[r]) -
                    raman * eip * banded_apply(tb.raman_d, tb.raman_o, cav_in, r);
        cd k_cav = minus_i * (tb.stark_c_rate * banded_apply(tb.stark_c_d, tb.stark_c_o, cav_in, r) +
                              tb.vib[r] * cav_in[r]) +
                   raman * std::conj(eip) * banded_apply(tb.raman_d, tb.raman_o, atom_in, r) -
                   tb.kappa * gathered[r];
        if constexpr (KIND == 0) {
            st.u_atom[r] = st.y_atom[r] + cu * k_atom;
            st.u_cav[r] = st.y_cav[r] + cu * k_cav;
            st.a_atom[r] = st.y_atom[r] + ca * k_atom;
            st.a_cav[r] = st.y_cav[r] + ca * k_cav;
        } else if constexpr (KIND == 1) {
            st.u_atom[r] = st.y_atom[r] + cu * k_atom;
            st.u_cav[r] = st.y_cav[r] + cu * k_cav;
            st.a_atom[r] += ca * k_atom;
            st.a_cav[r] += ca * k_cav;
        } else {
            st.y_atom[r] = st.a_atom[r] + ca * k_atom;
            st.y_cav[r] = st.a_cav[r] + ca * k_cav;
        }
    }
}

double state_norm_sq(const KernelState& st) {
    std::vector<double> parts(st.nr + 1, 0.0);
    for (std::size_t r = 0; r < st.nr; ++r) {
        const std::size_t off = r * st.m_count;
        double acc = 0.0;
        for (int m = 0; m < st.m_count; ++m)
            acc += st.ymr[off + m] * st.ymr[off + m] + st.ymi[off + m] * st.ymi[off + m];
        parts[r] = acc;
    }
    double small = 0.0;
    for (std::size_t r = 0; r < st.nr; ++r)
        small += std::norm(st.y_atom[r]) + std::norm(st.y_cav[r]);
    parts[st.nr] = small;
    return pairwise_sum(std::span<const double>(parts));
}

} // namespace

double propagation_time_step(const PolarizationBranch& branch, const Pulse& pulse,
                             const MotionSpec& motion, const ContinuumGrid& grid) {
    double nu_max = grid.half_bandwidth;
    nu_max = std::max(nu_max, pulse.peak_intensity() / (4.0 * branch.delta));
    nu_max = std::max(nu_max, branch.g * branch.g / branch.delta);
    nu_max = std::max(nu_max, motion.omega0 * (motion.resolved_n_max() + 0.5));
    return std::min(0.02 / nu_max, pulse.duration() / 60000.0);
}

PropagationResult propagate(const PolarizationBranch& branch, const Pulse& pulse,
                            const MotionSpec& motion, const ContinuumGrid& grid,
                            int initial_level, const PropagationOptions& opts) {
    branch.validate();
    motion.validate();
    grid.validate(branch.total_decay(), pulse.duration());

    const double T = pulse.duration();
    const double dt_limit = propagation_time_step(branch, pulse, motion, grid);
    double dt = opts.dt > 0.0 ? opts.dt : dt_limit;
    if (dt > dt_limit * (1.0 + 1e-12)) {
        std::ostringstream err;
        err << "propagate: dt = " << dt << " exceeds the step-size bound " << dt_limit;
        throw ConfigError(err.str());
    }
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double h = T / steps;

    HamiltonianTables tb = make_tables(branch, motion, grid, initial_level);
    const std::size_t nr = tb.rows.size();
    const int M = grid.mode_count;

    KernelState st;
    st.nr = nr;
    st.m_count = M;
    st.y_atom.assign(nr, 0.0);
    st.y_cav.assign(nr, 0.0);
    st.u_atom.assign(nr, 0.0);
    st.u_cav.assign(nr, 0.0);
    st.a_atom.assign(nr, 0.0);
    st.a_cav.assign(nr, 0.0);
    const std::size_t nm = nr * static_cast<std::size_t>(M);
    st.ymr.assign(nm, 0.0);
    st.ymi.assign(nm, 0.0);
    st.umr.assign(nm, 0.0);
    st.umi.assign(nm, 0.0);
    st.amr.assign(nm, 0.0);
    st.ami.assign(nm, 0.0);
    const std::size_t r0 =
        std::find(tb.rows.begin(), tb.rows.end(), initial_level) - tb.rows.begin();
    st.y_atom[r0] = 1.0;

    // e^{i omega t} at t, t+h/2, t+h, advanced by recurrence
    std::vector<double> phr(M, 1.0), phi(M, 0.0), ph2r(M), ph2i(M), ph3r(M), ph3i(M);
    std::vector<double> epsr(M), epsi(M);
    for (int m = 0; m < M; ++m) {
        epsr[m] = std::cos(grid.omega(m) * 0.5 * h);
        epsi[m] = std::sin(grid.omega(m) * 0.5 * h);
    }

    PropagationResult out;
    out.n_max = motion.resolved_n_max();
    out.rows = tb.rows;
    out.mode_count = M;
    out.dt = h;
    out.steps = steps;
    out.initial_norm_sq = 1.0;

    auto record = [&](double t) {
        PropagationResult::DiagnosticsRow row{};
        row.t = t;
        double pa = 0.0, pc = 0.0;
        for (std::size_t r = 0; r < nr; ++r) {
            pa += std::norm(st.y_atom[r]);
            pc += std::norm(st.y_cav[r]);
        }
        row.pop_atom = pa;
        row.pop_cavity = pc;
        row.norm = state_norm_sq(st);
        row.pop_continuum = row.norm - pa - pc;
        out.diagnostics.push_back(row);
    };
    if (opts.diagnostics_stride > 0) record(0.0);

    for (long step = 0; step < steps; ++step) {
        const double t = step * h;
#pragma omp parallel for schedule(static)
        for (int m = 0; m < M; ++m) {
            ph2r[m] = phr[m] * epsr[m] - phi[m] * epsi[m];
            ph2i[m] = phr[m] * epsi[m] + phi[m] * epsr[m];
            ph3r[m] = ph2r[m] * epsr[m] - ph2i[m] * epsi[m];
            ph3i[m] = ph2r[m] * epsi[m] + ph2i[m] * epsr[m];
        }
        run_stage<0>(st, tb, pulse, branch, t, phr.data(), phi.data(), 0.5 * h, h / 6.0);
        run_stage<1>(st, tb, pulse, branch, t + 0.5 * h, ph2r.data(), ph2i.data(), 0.5 * h, h / 3.0);
        run_stage<1>(st, tb, pulse, branch, t + 0.5 * h, ph2r.data(), ph2i.data(), h, h / 3.0);
        run_stage<2>(st, tb, pulse, branch, t + h, ph3r.data(), ph3i.data(), 0.0, h / 6.0);
        phr.swap(ph3r);
        phi.swap(ph3i);
        if (opts.diagnostics_stride > 0 &&
            ((step + 1) % opts.diagnostics_stride == 0 || step + 1 == steps))
            record((step + 1) * h);
    }

    out.final_norm_sq = state_norm_sq(st);
    if (!std::isfinite(out.final_norm_sq) ||
        std::abs(out.final_norm_sq - out.initial_norm_sq) >= 1e-6) {
        std::ostringstream err;
        err << "propagate: norm drift " << out.final_norm_sq - out.initial_norm_sq
            << " exceeds 1e-6 after " << steps << " steps";
        throw NumericalError(err.str());
    }

    out.atom.resize(nr);
    out.cavity.resize(nr);
    out.modes.resize(nm);
    for (std::size_t r = 0; r < nr; ++r) {
        out.atom[r] = st.y_atom[r];
        out.cavity[r] = st.y_cav[r];
        const std::size_t off = r * M;
        for (int m = 0; m < M; ++m) out.modes[off + m] = {st.ymr[off + m], st.ymi[off + m]};
    }
    return out;
}

PropagationResult propagate_reference(const PolarizationBranch& branch, const Pulse& pulse,
                                      const MotionSpec& motion, const ContinuumGrid& grid,
                                      int initial_level, const PropagationOptions& opts) {
    branch.validate();
    motion.validate();
    grid.validate(branch.total_decay(), pulse.duration());

    const int nm = motion.resolved_n_max();
    const int nlev = nm + 1;
    const int M = grid.mode_count;
    if (initial_level < 0 || initial_level > nm)
        throw InvalidInputError("propagate_reference: initial level outside [0, n_max]");

    const double T = pulse.duration();
    const double dt_limit = propagation_time_step(branch, pulse, motion, grid);
    double dt = opts.dt > 0.0 ? opts.dt : dt_limit;
    if (dt > dt_limit * (1.0 + 1e-12))
        throw ConfigError("propagate_reference: dt exceeds the step-size bound");
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double h = T / steps;

    LambDickeCoefficients K = lamb_dicke_coefficients(nm);
    const double eta_l2 = motion.eta_l * motion.eta_l;
    const double eta_r2 = motion.eta_r * motion.eta_r;
    const double eta_lr2 = 0.5 * (eta_l2 + eta_r2);
    const double stark_c_rate = branch.g * branch.g / branch.delta;
    const double kappa = std::sqrt(branch.k_c * grid.spacing() / M_PI);

    struct State {
        std::vector<cd> atom, cav, modes;  // modes row-major [level][mode]
    };
    State y{std::vector<cd>(nlev, 0.0), std::vector<cd>(nlev, 0.0),
            std::vector<cd>(static_cast<std::size_t>(nlev) * M, 0.0)};
    y.atom[initial_level] = 1.0;

    auto apply_banded = [&](const std::vector<cd>& v, double eta2, int n) {
        cd out = (1.0 - eta2 * K.diag[n]) * v[n];
        if (n >= 2) out += -eta2 * K.off[n - 2] * v[n - 2];
        if (n + 2 < nlev) out += -eta2 * K.off[n] * v[n + 2];
        return out;
    };

    auto rhs = [&](const State& s, double ts) {
        State d{std::vector<cd>(nlev), std::vector<cd>(nlev),
                std::vector<cd>(static_cast<std::size_t>(nlev) * M)};
        double t_ev = std::clamp(ts, 0.0, T);
        double omega_sq = pulse.intensity_at(t_ev);
        double stark_l = omega_sq / (4.0 * branch.delta);
        double raman = branch.g * std::sqrt(omega_sq) / (2.0 * branch.delta);
        cd eip = std::polar(1.0, pulse.phase_at(t_ev));
        const cd minus_i(0.0, -1.0);
        for (int n = 0; n < nlev; ++n) {
            double w = motion.omega0 * (n + 0.5);
            cd gather = 0.0;
            const std::size_t off = static_cast<std::size_t>(n) * M;
            for (int m = 0; m < M; ++m) {
                cd ph = std::polar(1.0, grid.omega(m) * ts);
                gather += std::conj(ph) * s.modes[off + m];
                d.modes[off + m] = minus_i * w * s.modes[off + m] + kappa * ph * s.cav[n];
            }
            d.atom[n] = minus_i * (stark_l * apply_banded(s.atom, eta_l2, n) + w * s.atom[n]) -
                        raman * eip * apply_banded(s.cav, eta_lr2, n);
            d.cav[n] = minus_i * (stark_c_rate * apply_banded(s.cav, eta_r2, n) + w * s.cav[n]) +
                       raman * std::conj(eip) * apply_banded(s.atom, eta_lr2, n) - kappa * gather;
        }
        return d;
    };

    auto axpy = [&](const State& a, double c, const State& b) {
        State r = a;
        for (int n = 0; n < nlev; ++n) {
            r.atom[n] += c * b.atom[n];
            r.cav[n] += c * b.cav[n];
        }
        for (std::size_t i = 0; i < r.modes.size(); ++i) r.modes[i] += c * b.modes[i];
        return r;
    };

    for (long step = 0; step < steps; ++step) {
        double t = step * h;
        State k1 = rhs(y, t);
        State k2 = rhs(axpy(y, 0.5 * h, k1), t + 0.5 * h);
        State k3 = rhs(axpy(y, 0.5 * h, k2), t + 0.5 * h);
        State k4 = rhs(axpy(y, h, k3), t + h);
        for (int n = 0; n < nlev; ++n) {
            y.atom[n] += h / 6.0 * (k1.atom[n] + 2.0 * k2.atom[n] + 2.0 * k3.atom[n] + k4.atom[n]);
            y.cav[n] += h / 6.0 * (k1.cav[n] + 2.0 * k2.cav[n] + 2.0 * k3.cav[n] + k4.cav[n]);
        }
        for (std::size_t i = 0; i < y.modes.size(); ++i)
            y.modes[i] += h / 6.0 * (k1.modes[i] + 2.0 * k2.modes[i] + 2.0 * k3.modes[i] + k4.modes[i]);
    }

    PropagationResult out;
    out.n_max = nm;
    out.rows.resize(nlev);
    for (int n = 0; n < nlev; ++n) out.rows[n] = n;
    out.mode_count = M;
    out.dt = h;
    out.steps = steps;
    out.atom = std::move(y.atom);
    out.cavity = std::move(y.cav);
    out.modes = std::move(y.modes);
    out.initial_norm_sq = 1.0;
    double norm = 0.0;
    for (const cd& v : out.atom) norm += std::norm(v);
    for (const cd& v : out.cavity) norm += std::norm(v);
    for (const cd& v : out.modes) norm += std::norm(v);
    out.final_norm_sq = norm;
    if (!std::isfinite(norm) || std::abs(norm - 1.0) >= 1e-6)
        throw NumericalError("propagate_reference: norm drift exceeds 1e-6");
    return out;
}

double PropagationResult::photon_norm_sq() const {
    std::vector<double> parts(rows.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double acc = 0.0;
        const std::size_t off = r * mode_count;
        for (int m = 0; m < mode_count; ++m) acc += std::norm(modes[off + m]);
        parts[r] = acc;
    }
    return pairwise_sum(std::span<const double>(parts));
}

double excitation_number(const PropagationResult& state) { return state.final_norm_sq; }

// ---------------------------------------------------------------------------
// Fidelity against the ideal transfer state

double TargetState::norm_sq() const {
    double total = 0.0;
    for (const auto& branch : photon) {
        std::vector<double> terms(branch.size());
        for (std::size_t m = 0; m < branch.size(); ++m) terms[m] = std::norm(branch[m]);
        total += pairwise_sum(std::span<const double>(terms));
    }
    return total;
}

TargetState target_state(const SpectralEnvelope& env0, const SpectralEnvelope& env1,
                         const InitialSuperposition& c) {
    TargetState t;
    const SpectralEnvelope* envs[2] = {&env0, &env1};
    const cd coeff[2] = {c.c0, c.c1};
    for (int a = 0; a < 2; ++a) {
        double root_dw = std::sqrt(envs[a]->grid.spacing());
        t.photon[a].resize(envs[a]->amplitude.size());
        for (std::size_t m = 0; m < t.photon[a].size(); ++m)
            t.photon[a][m] = coeff[a] * envs[a]->amplitude[m] * root_dw;
    }
    return t;
}

double MotionFidelity::pn(int n) const {
    if (n < 0) throw InvalidInputError("MotionFidelity::pn: n must be >= 0");
    return std::pow(p1, n);
}

namespace {

bool same_pulse(const Pulse& a, const Pulse& b) {
    if (a.shape().index() != b.shape().index()) return false;
    bool shapes_equal = std::visit(
        [&](const auto& sa) {
            const auto& sb = std::get<std::decay_t<decltype(sa)>>(b.shape());
            using S = std::decay_t<decltype(sa)>;
            if constexpr (std::is_same_v<S, SquarePulse>)
                return sa.intensity == sb.intensity && sa.duration == sb.duration;
            else if constexpr (std::is_same_v<S, SineSquaredRampPulse>)
                return sa.peak == sb.peak && sa.duration == sb.duration &&
                       sa.ramp_fraction == sb.ramp_fraction;
            else
                return sa.t == sb.t && sa.omega_sq == sb.omega_sq;
        },
        a.shape());
    if (!shapes_equal) return false;
    // compare phase profiles through samples at a few times
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0})
        if (a.phase_at(f * a.duration()) != b.phase_at(f * b.duration())) return false;
    return true;
}

bool same_setup(const BranchSetup& a, const BranchSetup& b) {
    return a.branch.g == b.branch.g && a.branch.delta == b.branch.delta &&
           a.branch.k_c == b.branch.k_c && a.branch.k_a == b.branch.k_a &&
           same_pulse(a.pulse, b.pulse);
}

} // namespace

MotionSolver::MotionSolver(std::array<BranchSetup, 2> setup, InitialSuperposition c,
                           MotionSpec motion, ContinuumGrid grid, PropagationOptions opts)
    : setup_(std::move(setup)),
      c_(c),
      motion_(motion),
      grid_(grid),
      opts_(opts),
      identical_branches_(same_setup(setup_[0], setup_[1])),
      env_{spectral_envelope(setup_[0].pulse, setup_[0].branch, grid_),
           identical_branches_
               ? spectral_envelope(setup_[0].pulse, setup_[0].branch, grid_)
               : spectral_envelope(setup_[1].pulse, setup_[1].branch, grid_)} {
    c_.validate();
    motion_.validate();
    double mu0 = pulse_integral_mu(setup_[0].pulse, setup_[0].branch);
    double mu1 = pulse_integral_mu(setup_[1].pulse, setup_[1].branch);
    target_norm_sq_ =
        c_.w0() * (1.0 - std::exp(-2.0 * mu0)) + c_.w1() * (1.0 - std::exp(-2.0 * mu1));
}

const MotionSolver::LevelData& MotionSolver::level(int k) {
    auto it = levels_.find(k);
    if (it != levels_.end()) return it->second;

    LevelData data;
    const double root_dw = std::sqrt(grid_.spacing());
    for (int a = 0; a < (identical_branches_ ? 1 : 2); ++a) {
        PropagationResult prop =
            propagate(setup_[a].branch, setup_[a].pulse, motion_, grid_, k, opts_);
        const std::size_t nr = prop.rows.size();
        data.overlap[a].resize(nr);
        for (std::size_t r = 0; r < nr; ++r) {
            const std::size_t off = r * prop.mode_count;
            cd acc = 0.0;
            for (int m = 0; m < prop.mode_count; ++m)
                acc += std::conj(env_[a].amplitude[m] * root_dw) * prop.modes[off + m];
            data.overlap[a][r] = acc;
        }
        data.photon_norm[a] = prop.photon_norm_sq();
    }
    if (identical_branches_) {
        data.overlap[1] = data.overlap[0];
        data.photon_norm[1] = data.photon_norm[0];
    }
    return levels_.emplace(k, std::move(data)).first->second;
}

MotionFidelity MotionSolver::fidelity(double n_thermal) {
    std::vector<double> p = thermal_weights(n_thermal, motion_.resolved_n_max());
    MotionFidelity out;
    if (target_norm_sq_ <= 0.0) return out;  // zero pulse: nothing to transfer

    const double w0 = c_.w0(), w1 = c_.w1();
    double num = 0.0, transfer = 0.0;
    for (int k = 0; k < static_cast<int>(p.size()); ++k) {
        if (p[k] < kLevelWeightCutoff) continue;
        const LevelData& L = level(k);
        double norm_sq = 0.0;
        for (std::size_t r = 0; r < L.overlap[0].size(); ++r)
            norm_sq += std::norm(w0 * L.overlap[0][r] + w1 * L.overlap[1][r]);
        num += p[k] * norm_sq;
        transfer += p[k] * (w0 * L.photon_norm[0] + w1 * L.photon_norm[1]);
    }
    out.p1 = num / target_norm_sq_;
    out.transfer_p1 = transfer;
    return out;
}

MotionFidelity motion_fidelity(const std::array<BranchSetup, 2>& setup,
                               const InitialSuperposition& c, const MotionSpec& motion,
                               const ContinuumGrid& grid, const PropagationOptions& opts) {
    MotionSolver solver(setup, c, motion, grid, opts);
    return solver.fidelity(motion.n_thermal);
}

} // namespace qsrc
