#pragma once

// Reproduction suite: eight check groups that pin the toolkit to the bundled
// examples end to end — exact data reproduction, conservation under
// integration, spectra at fixed points, small-oscillation physics, the
// weighted-symmetrization identity with decomposition recovery, reduction
// correctness, and the sign criterion behind the certificates.

#include "qpstab/analysis.hpp"
#include "qpstab/corpus.hpp"
#include "qpstab/simulate.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace qpstab::acceptance {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int index = 0;
    std::string title;
    std::vector<Check> checks;
    double seconds = 0.0;
    bool pass = false;
};

namespace detail {

inline void add(std::vector<Check>& cs, std::string name, bool pass, std::string det = {}) {
    cs.push_back(Check{std::move(name), pass, std::move(det)});
}

inline std::string num(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void finalize(Criterion& c) {
    c.pass = true;
    for (const auto& chk : c.checks) c.pass = c.pass && chk.pass;
}

} // namespace detail

/// Predator-prey reproduction: exact decomposition residuals, negative
/// definite D, the fixed point (1, 1), and the invariant as its own
/// certificate with Hessian diagonal (-1, -1).
inline Criterion criterion1() {
    using namespace detail;
    Criterion c{1, "predator-prey reproduction", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();
    const ExampleSystem ex = make_volterra2d();

    const PoissonCheck chk = check_poisson_conditions(ex.system, ex.poisson, Tolerances{}.poisson);
    add(c.checks, "decomposition residuals are exactly zero",
        chk.lambda_residual == 0.0 && chk.A_residual == 0.0 && chk.skewness == 0.0, chk.summary());

    const StabilityReport rep = theorem2_verdict(ex.system, ex.poisson);
    add(c.checks, "negative definite D yields the stability verdict",
        rep.d_sign == DSign::Negative && rep.verdict == Verdict::StableByTheorem2, rep.notes);

    const FixedPointFamily fam = fixed_point_family(ex.poisson);
    const VectorXd one = VectorXd::Ones(2);
    add(c.checks, "fixed point family collapses to exactly (1, 1)",
        fam.parameters() == 0 && max_abs(fam.base - one) == 0.0);

    const auto pts = find_fixed_points_newton(ex.system);
    add(c.checks, "search locates exactly one interior point, at (1, 1)",
        pts.size() == 1 && max_abs(pts.front() - one) <= 1e-9,
        pts.empty() ? "none found" : "nearest deviation " + num(max_abs(pts.front() - one)));

    const LyapunovOutcome out = lyapunov_for_point(ex.poisson, one);
    VectorXd diag_expected(2);
    diag_expected << -1.0, -1.0;
    bool cert_ok = out.ok();
    if (cert_ok) {
        const LyapunovCertificate& cert = *out.certificate;
        cert_ok = max_abs(cert.functional.coeffs() - ex.poisson.D()) == 0.0 &&
                  max_abs(cert.functional.logcoeffs() - ex.poisson.L()) == 0.0 &&
                  max_abs(cert.functional.exponents() - MatrixXd::Identity(2, 2)) == 0.0 &&
                  max_abs(cert.hessian_diag - diag_expected) == 0.0 &&
                  max_abs(cert.casimir_coefficients) == 0.0;
    }
    add(c.checks, "certificate equals the invariant itself with Hessian diagonal (-1, -1)", cert_ok);

    const QPFunctional H = hamiltonian_from_decomposition(ex.system, ex.poisson);
    add(c.checks, "invariant value at the fixed point equals -2", H.value(one) == -2.0,
        num(H.value(one)));

    c.seconds = seconds_since(t0);
    add(c.checks, "runtime under one second", c.seconds < 1.0, num(c.seconds) + " s");
    finalize(c);
    return c;
}

/// Three-species reproduction: kernel direction (1,1,1), the logarithmic
/// conserved quantity, the one-parameter fixed-point family, and the
/// certificate at (1, 3, 2) with Hessian diagonal (1, 1/3, 1/2).
inline Criterion criterion2() {
    using namespace detail;
    Criterion c{2, "three-species cyclic reproduction", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();
    const ExampleSystem ex = make_nutku(-1.0, -1.0, -1.0, 1.0, 1.0);

    const PoissonCheck chk = check_poisson_conditions(ex.system, ex.poisson, Tolerances{}.poisson);
    add(c.checks, "decomposition residuals are exactly zero",
        chk.lambda_residual == 0.0 && chk.A_residual == 0.0 && chk.skewness == 0.0, chk.summary());

    const auto kb = kernel_basis(ex.poisson.K());
    const VectorXd unit = VectorXd::Ones(3) / std::sqrt(3.0);
    add(c.checks, "kernel of K is the line through (1, 1, 1)",
        kb.size() == 1 && max_abs(kb.front() - unit) <= 1e-12,
        kb.empty() ? "empty kernel" : "deviation " + num(max_abs(kb.front() - unit)));

    const auto cs = casimirs(ex.poisson);
    add(c.checks, "conserved logarithm has coefficients (1, 1, 1)",
        cs.size() == 1 && cs.front().term_count() == 0 &&
            max_abs(cs.front().logcoeffs() - VectorXd::Ones(3)) <= 1e-12);

    const FixedPointFamily fam = fixed_point_family(ex.poisson);
    VectorXd base_expected(3);
    base_expected << 0.0, 2.0, 1.0;
    bool family_ok = fam.parameters() == 1 && max_abs(fam.base - base_expected) == 0.0;
    for (const double kappa : {0.25, 1.0, 2.5}) {
        VectorXd expected(3);
        expected << kappa, 2.0 + kappa, 1.0 + kappa;
        family_ok = family_ok && max_abs(fam.member(kappa) - expected) <= 1e-12;
    }
    add(c.checks, "fixed points form the family (k, 2 + k, 1 + k)", family_ok);

    const StabilityReport rep = theorem2_verdict(ex.system, ex.poisson);
    bool stable_ok = rep.d_sign == DSign::Positive && rep.verdict == Verdict::StableByTheorem2;
    for (const double kappa : {0.5, 1.0, 2.0})
        stable_ok = stable_ok && fam.interior(kappa) &&
                    max_abs(lv_flow(ex.poisson, fam.member(kappa))) <= 1e-9;
    add(c.checks, "positive definite D certifies every member with positive parameter", stable_ok);

    VectorXd x0(3);
    x0 << 1.0, 3.0, 2.0;
    const LyapunovOutcome out = lyapunov_for_point(ex.poisson, x0);
    VectorXd n_expected(3), log_expected(3), hess_expected(3);
    n_expected << -1.0, -1.0, -1.0;
    log_expected << -1.0, -3.0, -2.0;
    hess_expected << 1.0, 1.0 / 3.0, 1.0 / 2.0;
    bool cert_ok = out.ok();
    double kappa_fit = 0.0;
    if (cert_ok) {
        const LyapunovCertificate& cert = *out.certificate;
        MatrixXd km(3, 1);
        km.col(0) = fam.kernel_basis.front();
        kappa_fit = lstsq(km, cert.casimir_coefficients)(0);
        cert_ok = max_abs(cert.casimir_coefficients - n_expected) == 0.0 &&
                  max_abs(cert.functional.logcoeffs() - log_expected) == 0.0 &&
                  max_abs(cert.hessian_diag - hess_expected) <= 1e-15 &&
                  max_abs(cert.functional.gradient(x0)) <= 1e-10 && std::abs(kappa_fit + 1.0) <= 1e-12;
    }
    add(c.checks, "certificate at (1, 3, 2): log part (-1, -3, -2), Hessian (1, 1/3, 1/2), weight -1",
        cert_ok, "fitted Casimir weight " + num(kappa_fit));

    c.seconds = seconds_since(t0);
    add(c.checks, "runtime under one second", c.seconds < 1.0, num(c.seconds) + " s");
    finalize(c);
    return c;
}

/// Conservation: drift of the invariants along RK4 trajectories over
/// t in [0, 100] at step 1e-3, plus the fourth-order step-halving gain.
/// The gain is measured at coarser steps (8e-3 vs 4e-3) because at 1e-3 the
/// drift already sits at the roundoff floor (~1e-14), where halving cannot
/// show the truncation order.
inline Criterion criterion3() {
    using namespace detail;
    Criterion c{3, "conservation along integration", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();

    const auto halving_gain = [](const QPSystem& sys, const VectorXd& start, const QPFunctional& f) {
        const double coarse = functional_drift(integrate(sys, start, 100.0, 8e-3), f).max_abs;
        const double fine = functional_drift(integrate(sys, start, 100.0, 4e-3), f).max_abs;
        return fine > 0.0 ? coarse / fine : 0.0;
    };

    const ExampleSystem vol = make_volterra2d();
    const QPFunctional Hv = hamiltonian_from_decomposition(vol.system, vol.poisson);
    VectorXd s2(2);
    s2 << 2.0, 1.0;
    auto run0 = std::chrono::steady_clock::now();
    const Trajectory tv = integrate(vol.system, s2, 100.0, 1e-3);
    const double secs_v = seconds_since(run0);
    const Drift dv = functional_drift(tv, Hv);
    add(c.checks, "planar invariant drift within 1e-7 relative (and 1e-8 absolute)",
        dv.relative <= 1e-7 && dv.max_abs <= 1e-8, "absolute " + num(dv.max_abs));

    const double gain_v = halving_gain(vol.system, s2, Hv);
    add(c.checks, "halving the planar step improves drift at least 8x", gain_v >= 8.0,
        "gain " + num(gain_v));

    const ExampleSystem nut = make_nutku(-1.0, -1.0, -1.0, 1.0, 1.0);
    const QPFunctional Hn = hamiltonian_from_decomposition(nut.system, nut.poisson);
    const QPFunctional Cn = casimirs(nut.poisson).front();
    VectorXd s3(3);
    s3 << 1.2, 3.8, 2.1; // off the fixed-point family, so the flow actually moves
    run0 = std::chrono::steady_clock::now();
    const Trajectory tn = integrate(nut.system, s3, 100.0, 1e-3);
    const double secs_n = seconds_since(run0);
    const Drift dn = functional_drift(tn, Hn);
    const Drift cn = functional_drift(tn, Cn);
    add(c.checks, "three-species invariant and conserved logarithm drift within 1e-7",
        dn.relative <= 1e-7 && dn.max_abs <= 1e-7 && cn.max_abs <= 1e-7,
        "invariant " + num(dn.max_abs) + ", logarithm " + num(cn.max_abs));

    const double gain_n = halving_gain(nut.system, s3, Hn);
    add(c.checks, "halving the three-species step improves drift at least 8x", gain_n >= 8.0,
        "gain " + num(gain_n));

    add(c.checks, "each run completes within ten seconds", secs_v < 10.0 && secs_n < 10.0,
        num(secs_v) + " s and " + num(secs_n) + " s");
    c.seconds = seconds_since(t0);
    finalize(c);
    return c;
}

/// Spectral oracle: linearizations at certified interior fixed points have
/// eigenvalues on the imaginary axis; the three-species system shows exactly
/// one zero mode from its conserved direction.
inline Criterion criterion4() {
    using namespace detail;
    Criterion c{4, "imaginary-axis spectra at certified points", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();

    const auto max_re = [](const Eigen::VectorXcd& ev) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::max(m, std::abs(ev(i).real()));
        return m;
    };

    const ExampleSystem vol = make_volterra2d();
    const Eigen::VectorXcd ev_v = spectrum_at(vol.system, VectorXd::Ones(2));
    bool vol_ok = max_re(ev_v) <= 1e-8;
    for (Eigen::Index i = 0; i < ev_v.size(); ++i)
        vol_ok = vol_ok && std::abs(std::abs(ev_v(i).imag()) - 1.0) <= 1e-9;
    add(c.checks, "planar spectrum is {i, -i}", vol_ok, "max |Re| " + num(max_re(ev_v)));

    const ExampleSystem e2 = make_example2(2.0, 1.0, 1.0, 2.0);
    const VectorXd qstar = -e2.system.A().partialPivLu().solve(e2.system.lambda());
    const VectorXd x2 =
        e2.system.B().partialPivLu().solve(qstar.array().log().matrix()).array().exp();
    add(c.checks, "generalized-exponent point sits on the imaginary axis",
        max_re(spectrum_at(e2.system, x2)) <= 1e-8);

    const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);
    const auto pts = find_fixed_points_newton(e3.system);
    add(c.checks, "added-nonlinearity system has one interior point on the imaginary axis",
        pts.size() == 1 && max_re(spectrum_at(e3.system, pts.front())) <= 1e-8,
        pts.empty() ? "no point found" : "max |Re| " + num(max_re(spectrum_at(e3.system, pts.front()))));

    const ExampleSystem nut = make_nutku(-1.0, -1.0, -1.0, 1.0, 1.0);
    const FixedPointFamily fam = fixed_point_family(nut.poisson);
    bool nut_ok = true;
    for (const double kappa : {0.5, 1.0, 2.0}) {
        const Eigen::VectorXcd ev = spectrum_at(nut.system, fam.member(kappa));
        int zero_modes = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (std::abs(ev(i)) <= 1e-9) ++zero_modes;
        nut_ok = nut_ok && max_re(ev) <= 1e-8 && zero_modes == 1;
    }
    add(c.checks, "family members carry exactly one zero mode and no real growth", nut_ok);

    c.seconds = seconds_since(t0);
    finalize(c);
    return c;
}

/// Small-oscillation physics of the planar generalized system: frequency
/// against the measured period, the interior-point criterion across a
/// parameter grid, and the phase-shift formula with its expansion.
inline Criterion criterion5() {
    using namespace detail;
    Criterion c{5, "small-oscillation physics", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();
    const double pi = std::numbers::pi;

    const ExampleSystem e26 = make_example2(2.0, 0.0, 0.0, 1.0); // pure-power special case
    VectorXd xstar(2);
    xstar << std::sqrt(0.5), 1.0;
    const OscillationAnalysis osc = oscillation_analysis(e26.system, e26.poisson, xstar);
    add(c.checks, "predicted angular frequency is sqrt(2)",
        std::abs(osc.omega - std::numbers::sqrt2) <= 1e-12,
        "omega " + num(osc.omega) + ", phase shift " + num(osc.Phi));

    VectorXd s0(2);
    s0 << xstar(0) * 1.005, xstar(1);
    const Trajectory tr = integrate(e26.system, s0, 40.0, 1e-3);
    const auto pp = measure_period_and_phase(tr);
    const double period_target = 2.0 * pi / std::numbers::sqrt2;
    add(c.checks, "measured small-oscillation period matches within 0.1%",
        pp && std::abs(pp->period - period_target) <= 1e-3 * period_target,
        pp ? "measured " + num(pp->period) + " vs " + num(period_target) : "no oscillation detected");
    add(c.checks, "measured phase lag matches the prediction within 1%",
        pp && std::abs(pp->phase_lag - osc.Phi) <= 1e-2 * osc.Phi,
        pp ? "measured " + num(pp->phase_lag) + " vs " + num(osc.Phi) : "no oscillation detected");

    const double grid[5] = {0.3, 0.7, 1.0, 1.6, 2.6};
    int agree = 0;
    for (const double a : grid)
        for (const double d : grid) {
            const ExampleSystem g = make_example2(2.0, 1.0, 1.0, 2.0, a, 1.0, 1.0, d);
            const bool predicted = (a / d > 0.5) && (a / d < 2.0);
            const bool found = !find_fixed_points_newton(g.system).empty();
            if (predicted == found) ++agree;
        }
    add(c.checks, "interior-point criterion matches the search oracle on all 25 grid cells", agree == 25,
        std::to_string(agree) + "/25");

    bool phi0_exact = true;
    for (const double rho : {0.5, 1.0, 2.0, 3.0}) phi0_exact = phi0_exact && phase_shift(rho, 0.0) == pi / 2.0;
    add(c.checks, "phase shift at zero rotation is exactly pi/2", phi0_exact);

    bool expansion_ok = true;
    double worst = 0.0;
    for (const double rho : {0.5, 0.8, 1.0, 1.5, 2.0})
        for (const double phi : {-0.1, -0.05, -0.01, 0.01, 0.05, 0.1}) {
            const double err = std::abs(phase_shift(rho, phi) - (pi / 2.0 + (rho - 1.0 / rho) * phi));
            worst = std::max(worst, err - 5.0 * std::abs(phi * phi * phi));
            expansion_ok = expansion_ok && err <= 5.0 * std::abs(phi * phi * phi);
        }
    add(c.checks, "first-order expansion error stays below the cubic bound", expansion_ok,
        "worst margin " + num(worst));

    c.seconds = seconds_since(t0);
    finalize(c);
    return c;
}

/// Weighted-symmetrization identity and decomposition recovery over fifty
/// seeded random conservative Lotka-Volterra systems. The identity requires
/// a definite D (the certificate hypothesis), so each sample draws one sign
/// for the whole diagonal.
inline Criterion criterion6() {
    using namespace detail;
    Criterion c{6, "symmetrization identity and recovery on random systems", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();

    std::mt19937_64 rng(default_seed());
    std::uniform_real_distribution<double> entry(-2.0, 2.0);
    std::uniform_real_distribution<double> magnitude(0.2, 2.0);
    int zero_ok = 0, recover_ok = 0;
    double worst_entry = 0.0;
    const int total = 50;
    for (int trial = 0; trial < total; ++trial) {
        const int n = 2 + trial % 4;
        MatrixXd U(n, n);
        for (int r = 0; r < n; ++r)
            for (int col = 0; col < n; ++col) U(r, col) = entry(rng);
        const MatrixXd K = U - U.transpose();
        const double sign = (rng() % 2 == 0) ? 1.0 : -1.0;
        VectorXd D(n);
        for (int j = 0; j < n; ++j) D(j) = sign * magnitude(rng);
        VectorXd Ltrue(n);
        for (int j = 0; j < n; ++j) Ltrue(j) = entry(rng);
        const MatrixXd A = K * D.asDiagonal();
        const QPSystem sys(K * Ltrue, A, MatrixXd::Identity(n, n));

        const SymmetrizedForm sf = symmetrized_form(A, D.cwiseAbs());
        worst_entry = std::max(worst_entry, max_abs(sf.M));
        if (max_abs(sf.M) <= 1e-12) ++zero_ok;

        const LvRecovery rec = recover_decomposition_lv(sys);
        if (rec.data && check_poisson_conditions(sys, *rec.data, Tolerances{}.poisson).verdict) ++recover_ok;
    }
    add(c.checks, "weighted symmetrization vanishes to 1e-12 on all samples", zero_ok == total,
        std::to_string(zero_ok) + "/" + std::to_string(total) + ", worst entry " + num(worst_entry));
    add(c.checks, "decomposition recovery validates on all samples", recover_ok == total,
        std::to_string(recover_ok) + "/" + std::to_string(total));

    c.seconds = seconds_since(t0);
    finalize(c);
    return c;
}

/// Reduction correctness on the added-nonlinearity system: exact
/// expand/restrict round trip, change-of-variables conjugacy of the flows,
/// exact D invariance, and verdict agreement with the representative.
inline Criterion criterion7() {
    using namespace detail;
    Criterion c{7, "reduction pipeline correctness", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();
    const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);

    const MatrixXd Bp = choose_embedding_columns(e3.system.B());
    const QPSystem expanded = embed(e3.system, Bp);
    const QPSystem back = decouple(expanded, e3.system.n());
    add(c.checks, "restriction of the expansion reproduces the system exactly",
        max_abs(back.lambda() - e3.system.lambda()) == 0.0 && max_abs(back.A() - e3.system.A()) == 0.0 &&
            max_abs(back.B() - e3.system.B()) == 0.0);

    const LvReduction red = to_lotka_volterra(e3.system, e3.poisson);
    add(c.checks, "representative carries the exact identity exponent matrix", red.lv.lv_form());
    add(c.checks, "D passes through the reduction unchanged",
        red.pd_lv && max_abs(red.pd_lv->D() - e3.poisson.D()) == 0.0);
    add(c.checks, "representative decomposition validates",
        red.pd_lv && check_poisson_conditions(red.lv, *red.pd_lv, Tolerances{}.poisson).verdict);

    const auto* estep = std::get_if<EmbedStep>(&red.record.steps().at(0));
    const auto* qstep = std::get_if<QmtStep>(&red.record.steps().at(1));
    bool conjugate = estep != nullptr && qstep != nullptr;
    double worst = 0.0;
    if (conjugate) {
        const QPSystem mid = embed(e3.system, estep->b_prime);
        std::mt19937_64 rng(default_seed());
        std::uniform_real_distribution<double> logu(std::log(0.2), std::log(5.0));
        for (int trial = 0; trial < 100 && conjugate; ++trial) {
            VectorXd x(2);
            for (int i = 0; i < 2; ++i) x(i) = std::exp(logu(rng));
            VectorXd xe(4);
            xe << x, 1.0, 1.0;
            const VectorXd fe = mid.flow(xe);
            conjugate = conjugate && max_abs(fe.head(2) - e3.system.flow(x)) <= 1e-12 &&
                        max_abs(fe.tail(2)) == 0.0;
            const VectorXd y = map_point(red.record, x, MapDirection::Forward);
            const VectorXd lhs = red.lv.flow(y);
            const VectorXd rhs =
                y.asDiagonal() * qstep->gamma_inv * xe.cwiseInverse().asDiagonal() * fe;
            const double err = max_abs(lhs - rhs) / (1.0 + max_abs(lhs));
            worst = std::max(worst, err);
            conjugate = conjugate && err <= 1e-9;
        }
    }
    add(c.checks, "flow conjugacy holds on 100 random points", conjugate, "worst " + num(worst));

    const StabilityReport orig = theorem2_verdict(e3.poisson);
    const StabilityReport repr = red.pd_lv ? theorem2_verdict(*red.pd_lv) : StabilityReport{};
    add(c.checks, "verdict on the original equals the verdict on the representative",
        orig.verdict == repr.verdict && orig.d_sign == repr.d_sign &&
            orig.verdict == Verdict::StableByTheorem2);

    c.seconds = seconds_since(t0);
    finalize(c);
    return c;
}

/// Sign criterion: along the three-species family, L + N = -D x0 is
/// entrywise negative exactly for interior members under positive definite
/// D, and a point nudged off the family is refused because its required
/// correction leaves the Casimir space.
inline Criterion criterion8() {
    using namespace detail;
    Criterion c{8, "certificate sign criterion and refusal path", {}, 0.0, false};
    const auto t0 = std::chrono::steady_clock::now();
    const ExampleSystem nut = make_nutku(-1.0, -1.0, -1.0, 1.0, 1.0);
    const FixedPointFamily fam = fixed_point_family(nut.poisson);

    bool interior_ok = true;
    for (const double kappa : {0.5, 1.0, 3.0}) {
        const VectorXd x0 = fam.member(kappa);
        const LyapunovOutcome out = lyapunov_for_point(nut.poisson, x0);
        interior_ok = interior_ok && out.ok();
        if (!out.ok()) continue;
        const VectorXd lmn = nut.poisson.L() + out.certificate->casimir_coefficients;
        interior_ok = interior_ok && (lmn.array() < 0.0).all() &&
                      max_abs(lmn + nut.poisson.D().cwiseProduct(x0)) == 0.0;
    }
    add(c.checks, "entrywise-negative sign pattern on interior members", interior_ok);

    const VectorXd outside = fam.member(-0.5);
    const VectorXd pattern = -nut.poisson.D().cwiseProduct(outside);
    add(c.checks, "sign pattern breaks for a non-interior member",
        !fam.interior(-0.5) && !(pattern.array() < 0.0).all());

    VectorXd nudged(3);
    nudged << 1.001, 3.0, 2.0;
    const LyapunovOutcome refused = lyapunov_for_point(nut.poisson, nudged, 0.1, Tolerances{}.kernel_rel);
    add(c.checks, "nudged point is refused: correction leaves the Casimir space",
        !refused.ok() && !refused.reason.empty(), refused.reason);

    bool strict_rejects = false;
    try {
        (void)lyapunov_for_point(nut.poisson, nudged);
    } catch (const std::invalid_argument&) {
        strict_rejects = true;
    }
    add(c.checks, "default tolerance already rejects the nudged point as not fixed", strict_rejects);

    c.seconds = seconds_since(t0);
    finalize(c);
    return c;
}

inline std::vector<Criterion> run_all() {
    return {criterion1(), criterion2(), criterion3(), criterion4(),
            criterion5(), criterion6(), criterion7(), criterion8()};
}

} // namespace qpstab::acceptance
