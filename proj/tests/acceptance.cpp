// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Criteria 1-4, 7, 8 run in about a minute (--fast);
// criteria 5-6 propagate the full mode-resolved wavefunction and take hours
// on a single core (--slow).
//
// Known-red clauses (see the analysis in the project notes): criterion 5's
// overlap-form P(1) and per-mode envelope comparison measure the gap between
// the exact Hamiltonian dynamics and the adiabatic closed forms (the cavity
// Stark shift pulls the emission line; the closed-form envelope ignores it).
// They are asserted as stated and reported honestly.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "qsrc/envelope.hpp"
#include "qsrc/errors.hpp"
#include "qsrc/experiment.hpp"
#include "qsrc/fidelity.hpp"
#include "qsrc/motion.hpp"
#include "qsrc/noise.hpp"

using namespace qsrc;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
    explicit Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {
        start_ = clock_type::now();
        std::cout << "criterion " << id_ << ": " << title_ << "\n" << std::flush;
    }
    void check(bool ok, const std::string& detail) {
        all_ok_ &= ok;
        std::cout << "  [" << (ok ? "ok" : "FAIL") << "] " << detail << "\n" << std::flush;
    }
    void note(const std::string& detail) { std::cout << "  [note] " << detail << "\n"; }
    ~Criterion() {
        double dt = std::chrono::duration<double>(clock_type::now() - start_).count();
        std::cout << (all_ok_ ? "[PASS]" : "[FAIL]") << " criterion " << id_ << ": " << title_
                  << "  (" << dt << " s)\n\n"
                  << std::flush;
        if (!all_ok_) ++g_failures;
    }
    int id_;
    std::string title_;
    bool all_ok_ = true;
    clock_type::time_point start_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

constexpr double kG = 60.0, kI = 3600.0, kDelta = 1500.0, kKc = 25.0, kT = 30.0;

std::array<BranchSetup, 2> fig_setup() {
    PolarizationBranch b{kG, kDelta, kKc, 0.0, 0};
    Pulse p = Pulse::square(kI, kT);
    std::array<BranchSetup, 2> s = {BranchSetup{b, p}, BranchSetup{b, p}};
    s[1].branch.label = 1;
    return s;
}

InitialSuperposition equal_c() {
    InitialSuperposition c;
    c.c0 = c.c1 = 1.0 / std::sqrt(2.0);
    return c;
}

double closed_form_mu() { return kG * kG * kI * kT / (4.0 * kDelta * kDelta * kKc); }

void criterion1() {
    Criterion cr(1, "ideal closed form at Fig. 2 parameters");
    auto setup = fig_setup();
    auto c = equal_c();
    double factor = 1.0 - std::exp(-2.0 * closed_form_mu());
    double p1 = ideal_fidelity(1, setup, c);
    double p10 = ideal_fidelity(10, setup, c);
    cr.check(std::abs(p1 - factor) < 1e-6,
             "P(1) = " + fmt(p1) + " vs independent closed form " + fmt(factor) + " (tol 1e-6)");
    cr.check(std::abs(p10 - std::pow(factor, 10)) < 1e-6,
             "P(10) = " + fmt(p10) + " vs independent closed form " + fmt(std::pow(factor, 10)) +
                 " (tol 1e-6)");
    cr.check(std::abs(p1 - 0.96845) < 1e-4, "P(1) anchors the quoted 0.96845 within 1e-4");
    cr.check(std::abs(p10 - 0.7257) < 1e-4, "P(10) anchors the quoted 0.7257 within 1e-4");
}

void criterion2() {
    Criterion cr(2, "quadrature envelope norm vs 1 - e^{-2 mu}");
    PolarizationBranch b{kG, kDelta, kKc, 0.0, 0};
    Pulse square = Pulse::square(kI, kT);
    ContinuumGrid grid = ContinuumGrid::auto_sized(kKc, kT);
    double closed = 1.0 - std::exp(-2.0 * closed_form_mu());

    double r1 = spectral_envelope(square, b, grid).norm_sq() - closed;
    cr.check(std::abs(r1) < 1e-3, "square, default grid: residual " + fmt(r1) + " (tol 1e-3)");

    ContinuumGrid fine{grid.half_bandwidth, grid.mode_count * 4};
    double r4 = spectral_envelope(square, b, fine).norm_sq() - closed;
    cr.check(std::abs(r4) < 1e-3, "square, 4x mode count: residual " + fmt(r4) + " (tol 1e-3)");
    cr.note("square residual is band truncation 2A^2(1+e^{-2mu})/W = " +
            fmt(2.0 * (kG * kG * kI / (4 * kDelta * kDelta)) / (M_PI * kKc) *
                (1 + std::exp(-2 * closed_form_mu())) / grid.half_bandwidth) +
            ", independent of mode count; the 1e-5 tightening is a quadrature-convergence "
            "statement and is asserted on a smooth pulse");

    Pulse hann(SineSquaredRampPulse{kI, kT, 0.5});
    double mu_h = pulse_integral_mu(hann, b);
    double closed_h = 1.0 - std::exp(-2.0 * mu_h);
    double h1 = spectral_envelope(hann, b, grid).norm_sq() - closed_h;
    double h4 = spectral_envelope(hann, b, fine).norm_sq() - closed_h;
    cr.check(std::abs(h1) < 1e-5, "sine^2 pulse, default grid: residual " + fmt(h1) + " (tol 1e-5)");
    cr.check(std::abs(h4) < 1e-5, "sine^2 pulse, 4x mode count: residual " + fmt(h4) + " (tol 1e-5)");
}

void criterion3() {
    Criterion cr(3, "Monte Carlo Wiener sampling vs the +2 sigma^2 Gaussian average");
    PolarizationBranch b{kG, kDelta, kKc, 0.0, 0};
    Pulse p = Pulse::square(kI, kT);
    double noiseless = 1.0 - std::exp(-2.0 * closed_form_mu());
    for (double fr : {0.05, 0.1, 0.2}) {
        double d = convert_fr_to_d(fr, p);
        MuStatistics st = mu_statistics(p, b, d);
        double closed = 1.0 - std::exp(-2.0 * st.mean + 2.0 * st.variance);
        McTransferStats mc = mc_transfer_stats(p, b, d, 20260810, 100000, 2000);
        double gap = std::abs(mc.mean - closed);
        cr.check(gap < 3.0 * mc.std_error,
                 "F_r = " + fmt(fr) + ": MC mean " + fmt(mc.mean) + " vs MGF " + fmt(closed) +
                     ", |gap| = " + fmt(gap) + " < 3 SE = " + fmt(3.0 * mc.std_error));
        cr.check(mc.mean < noiseless,
                 "F_r = " + fmt(fr) + ": MC mean lies strictly below the noiseless " +
                     fmt(noiseless) + " (printed-sign question resolved to +2 sigma^2)");
    }
}

void criterion4() {
    Criterion cr(4, "loss-corrected fidelity");
    auto setup = fig_setup();
    auto c = equal_c();
    auto lossy = setup;
    for (auto& s : lossy) s.branch.k_a = 0.01 * s.branch.k_c;
    // independent re-derivation
    double mu_loss = kG * kG * kI * kT / (4.0 * kDelta * kDelta * (kKc * 1.01));
    double per_cycle = (1.0 / 1.01) * (1.0 - std::exp(-2.0 * mu_loss));
    double p10 = loss_fidelity(10, lossy, c);
    cr.check(std::abs(p10 - std::pow(per_cycle, 10)) < 1e-9,
             "P(10) = " + fmt(p10) + " vs re-derivation " + fmt(std::pow(per_cycle, 10)));
    cr.check(std::abs(p10 - 0.6496) < 1e-3, "P(10) anchors the quoted 0.6496 within 1e-3");
    cr.check(loss_fidelity(1, setup, c) == ideal_fidelity(1, setup, c) &&
                 loss_fidelity(10, setup, c) == ideal_fidelity(10, setup, c),
             "k_a = 0 reduces exactly to criterion-1 values");
}

void criterion7() {
    Criterion cr(7, "wavepacket independence (commutator kernel)");
    PolarizationBranch b{kG, kDelta, kKc, 0.0, 0};
    SpectralEnvelope env = spectral_envelope(Pulse::square(kI, kT), b,
                                             ContinuumGrid::auto_sized(kKc, kT));
    std::complex<double> at0 = wavepacket_overlap(env, 0.0);
    cr.check(std::abs(at0 - std::complex<double>(env.norm_sq(), 0.0)) < 1e-6,
             "overlap(0) = " + fmt(at0.real()) + " equals the envelope norm within 1e-6");
    // the discrete kernel is 2pi/d_omega-periodic; probe within [3T, T_rec - T]
    double t_rec = env.grid.recurrence_time();
    for (double dt : {3.0 * kT, -3.0 * kT, std::min(3.05 * kT, t_rec - kT)}) {
        double mag = std::abs(wavepacket_overlap(env, dt));
        cr.check(mag < 0.01, "|overlap(" + fmt(dt) + " us)| = " + fmt(mag) + " < 0.01");
    }
}

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) return "<missing " + p + ">";
    return std::string(std::istreambuf_iterator<char>(f), {});
}

void criterion8() {
    Criterion cr(8, "end-to-end determinism of figure fig2");
    const char* cli_env = std::getenv("QSRC_CLI");
    std::string cli = cli_env ? cli_env : "./qedsource";
    const char* scratch_env = std::getenv("QSRC_SCRATCH");
    std::string scratch = (scratch_env ? std::string(scratch_env) : std::string("/tmp")) +
                          "/acceptance_fig2";
    std::filesystem::remove_all(scratch);
    std::filesystem::create_directories(scratch);

    auto run = [&](const std::string& prefix, const std::string& dir) {
        std::string cmd =
            prefix + cli + " figure fig2 --seed 11 --out " + dir + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    bool ok_a = run("", scratch + "/a");
    bool ok_b = run("", scratch + "/b");
    bool ok_c = run("OMP_NUM_THREADS=1 ", scratch + "/c");
    bool ok_d = run("OMP_NUM_THREADS=3 ", scratch + "/d");
    cr.check(ok_a && ok_b && ok_c && ok_d, "four CLI invocations succeeded");

    bool same_rerun = true, same_workers = true;
    for (const std::string& f : {"fig2_fr0.csv", "fig2_fr0.1.csv", "fig2_fr0.2.csv", "fig2.gp"}) {
        same_rerun &= slurp(scratch + "/a/" + f) == slurp(scratch + "/b/" + f);
        same_workers &= slurp(scratch + "/c/" + f) == slurp(scratch + "/d/" + f);
    }
    cr.check(same_rerun, "re-run with the same seed is byte-identical");
    cr.check(same_workers, "OMP_NUM_THREADS=1 vs 3 outputs are byte-identical");
}

void criterion5() {
    Criterion cr(5, "motionless-limit equivalence at the default grid");
    PolarizationBranch b{kG, kDelta, kKc, 0.0, 0};
    Pulse p = Pulse::square(kI, kT);
    ContinuumGrid grid = ContinuumGrid::auto_sized(kKc, kT);
    MotionSpec still;
    still.omega0 = 1.0;
    still.eta_l = still.eta_r = 0.0;
    still.n_thermal = 0.0;

    double closed = 1.0 - std::exp(-2.0 * closed_form_mu());
    std::cout << "  (propagating " << grid.mode_count << " modes over " << kT
              << " us; takes a minute or two)\n"
              << std::flush;
    PropagationResult prop = propagate(b, p, still, grid, 0);
    cr.check(std::abs(prop.final_norm_sq - 1.0) < 1e-6,
             "norm drift " + fmt(prop.final_norm_sq - 1.0) + " within 1e-6");

    double transfer = prop.photon_norm_sq();
    cr.check(std::abs(transfer - closed) < 1e-3,
             "photon-transfer probability sum|a_m|^2 = " + fmt(transfer) +
                 " vs closed form " + fmt(closed) + " (tol 1e-3)");

    MotionFidelity f = motion_fidelity(fig_setup(), equal_c(), still, grid);
    cr.check(std::abs(f.p1 - closed) < 1e-3,
             "overlap-form P(1) = " + fmt(f.p1) + " vs criterion-1 P(1) = " + fmt(closed) +
                 " (tol 1e-3; adiabatic-approximation gap, see decisions ledger)");

    SpectralEnvelope env = spectral_envelope(p, b, grid);
    double root_dw = std::sqrt(grid.spacing());
    double g_max = 0.0;
    for (const auto& a : env.amplitude) g_max = std::max(g_max, std::abs(a));
    double worst = 0.0;
    int dominant = 0, over = 0;
    for (int m = 0; m < grid.mode_count; ++m) {
        double g_abs = std::abs(env.amplitude[m]);
        if (g_abs <= 0.1 * g_max) continue;
        ++dominant;
        double rel = std::abs(std::abs(prop.modes[m]) - g_abs * root_dw) / (g_abs * root_dw);
        worst = std::max(worst, rel);
        if (rel >= 1e-2) ++over;
    }
    cr.check(worst < 1e-2, "per-mode |a_m| vs |G| sqrt(d_omega) on " + std::to_string(dominant) +
                               " dominant modes: worst relative error " + fmt(worst) +
                               " (tol 1e-2; " + std::to_string(over) +
                               " modes over, Stark line-pull, see decisions ledger)");
}

void criterion6() {
    Criterion cr(6, "Fig. 6 property suite (omega0 = 1 MHz, eta = 0.07)");
    ContinuumGrid grid = ContinuumGrid::auto_sized(kKc, kT);
    const std::vector<double> occupancies = {0.01, 0.1, 0.5, 1.0};

    MotionSpec motion;
    motion.omega0 = 1.0;
    motion.eta_l = motion.eta_r = 0.07;
    motion.n_thermal = 1.0;
    motion.n_max = MotionSpec::auto_n_max(1.0);

    auto p1_curve = [&](MotionSpec spec, const char* label) {
        MotionSolver solver(fig_setup(), equal_c(), spec, grid);
        std::vector<double> p1;
        for (double occupancy : occupancies) {
            auto t0 = clock_type::now();
            p1.push_back(solver.fidelity(occupancy).p1);
            std::cout << "  (" << label << " n_max=" << spec.resolved_n_max() << " N=" << occupancy
                      << ": P(1) = " << fmt(p1.back()) << ", +"
                      << std::chrono::duration<double>(clock_type::now() - t0).count() << " s)\n"
                      << std::flush;
        }
        return p1;
    };

    std::vector<double> base = p1_curve(motion, "base");
    bool decreasing = true;
    for (std::size_t i = 1; i < base.size(); ++i)
        for (int n = 1; n <= 10; ++n)
            decreasing &= std::pow(base[i], n) < std::pow(base[i - 1], n);
    cr.check(decreasing,
             "P(n) strictly decreasing in N over {0.01, 0.1, 0.5, 1} for every n in [1, 10]");

    // motionless reference: same overlap fidelity with eta = 0
    MotionSpec still;
    still.omega0 = 1.0;
    still.eta_l = still.eta_r = 0.0;
    still.n_thermal = 0.0;
    MotionFidelity f_still = motion_fidelity(fig_setup(), equal_c(), still, grid);
    cr.check(std::abs(base.front() - f_still.p1) < 0.02,
             "N = 0.01 curve at n = 1 (" + fmt(base.front()) + ") within 0.02 of the motionless " +
                 fmt(f_still.p1));

    MotionSpec bigger = motion;
    bigger.n_max += 5;
    std::vector<double> refined = p1_curve(bigger, "n_max+5");
    double worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
        for (int n = 1; n <= 10; ++n)
            worst = std::max(worst, std::abs(std::pow(base[i], n) - std::pow(refined[i], n)));
    cr.check(worst < 1e-4,
             "P(n) stable under n_max + 5: worst shift " + fmt(worst) + " (tol 1e-4)");
}

} // namespace

int main(int argc, char** argv) {
    bool fast = true, slow = true;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--fast")) slow = false;
        else if (!std::strcmp(argv[i], "--slow")) fast = false;
        else if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--all")) {
            std::cerr << "usage: qsrc_acceptance [--fast|--slow|--all|--criterion N]\n";
            return 64;
        }
    }
    try {
        auto want = [&](int id, bool in_fast) {
            if (only) return only == id;
            return in_fast ? fast : slow;
        };
        if (want(1, true)) criterion1();
        if (want(2, true)) criterion2();
        if (want(3, true)) criterion3();
        if (want(4, true)) criterion4();
        if (want(7, true)) criterion7();
        if (want(8, true)) criterion8();
        if (want(5, false)) criterion5();
        if (want(6, false)) criterion6();
    } catch (const std::exception& e) {
        std::cerr << "acceptance aborted: " << e.what() << "\n";
        return 70;
    }
    if (g_failures) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
