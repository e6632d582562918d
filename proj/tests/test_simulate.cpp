#include "qpstab/corpus.hpp"
#include "qpstab/simulate.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace qpstab;
using Catch::Approx;

namespace {

VectorXd vec2(double a, double b) {
    VectorXd v(2);
    v << a, b;
    return v;
}

VectorXd vec3(double a, double b, double c) {
    VectorXd v(3);
    v << a, b, c;
    return v;
}

QPSystem logistic1d(double rate, double self) {
    VectorXd lambda(1);
    lambda << rate;
    MatrixXd A(1, 1), B(1, 1);
    A << self;
    B << 1.0;
    return QPSystem(lambda, A, B);
}

} // namespace

TEST_CASE("integration in logarithmic coordinates") {
    const ExampleSystem vol = make_volterra2d();

    SECTION("a fixed point stays put to the last bit") {
        const Trajectory traj = integrate(vol.system, vec2(1, 1), 5.0, 1e-2);
        for (const auto& x : traj.states) REQUIRE(max_abs(x - vec2(1, 1)) == 0.0);
    }

    SECTION("sample counts and time grid") {
        const Trajectory traj = integrate(vol.system, vec2(2, 1), 1.0, 0.25);
        REQUIRE(traj.size() == 5);
        REQUIRE(traj.times.front() == 0.0);
        REQUIRE(traj.times.back() == Approx(1.0).margin(1e-12));
        REQUIRE(traj.step == 0.25);

        // a non-divisible step overshoots t_end rather than truncating
        const Trajectory over = integrate(vol.system, vec2(2, 1), 1.0, 0.3);
        REQUIRE(over.size() == 5);
        REQUIRE(over.times.back() == Approx(1.2).margin(1e-12));
    }

    SECTION("states remain strictly positive") {
        const Trajectory traj = integrate(vol.system, vec2(0.05, 3.0), 10.0, 1e-2);
        for (const auto& x : traj.states) REQUIRE((x.array() > 0.0).all());
    }

    SECTION("guards") {
        REQUIRE_THROWS_AS(integrate(vol.system, vec3(1, 1, 1), 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(integrate(vol.system, vec2(1, 1), 1.0, 0.0), std::invalid_argument);
        REQUIRE_THROWS_AS(integrate(vol.system, vec2(1, 1), -1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(integrate(vol.system, vec2(0.0, 1.0), 1.0), std::domain_error);
    }
}

TEST_CASE("finite-time blowup raises a divergence error with the partial path") {
    const QPSystem blowup = logistic1d(1.0, 1.0); // x' = x (1 + x)
    VectorXd x0(1);
    x0 << 1.0;
    bool thrown = false;
    try {
        integrate(blowup, x0, 50.0, 1e-2);
    } catch (const divergence_error& e) {
        thrown = true;
        REQUIRE(std::string(e.what()).find("t = ") != std::string::npos);
        const Trajectory& partial = e.partial();
        REQUIRE(partial.size() >= 1);
        for (std::size_t i = 1; i < partial.size(); ++i)
            REQUIRE(partial.times[i] > partial.times[i - 1]);
    }
    REQUIRE(thrown);
}

TEST_CASE("functional drift along trajectories") {
    const ExampleSystem vol = make_volterra2d();
    const QPFunctional H = hamiltonian_from_decomposition(vol.system, vol.poisson);
    const Trajectory traj = integrate(vol.system, vec2(2, 1), 20.0, 1e-3);

    const Drift d = functional_drift(traj, H);
    REQUIRE(d.max_abs <= 1e-9);
    REQUIRE(d.relative <= 1e-9);

    SECTION("a constant functional never drifts") {
        const Drift zero = functional_drift(traj, QPFunctional::logs_only(VectorXd::Zero(2)));
        REQUIRE(zero.max_abs == 0.0);
        REQUIRE(zero.relative == 0.0);
    }

    SECTION("empty trajectories are rejected") {
        REQUIRE_THROWS_AS(functional_drift(Trajectory{}, H), std::invalid_argument);
    }
}

TEST_CASE("jacobian of the flow field") {
    const ExampleSystem vol = make_volterra2d();

    SECTION("at an interior fixed point of a representative it reduces to A") {
        REQUIRE(max_abs(jacobian(vol.system, vec2(1, 1)) - vol.system.A()) == 0.0);
    }

    SECTION("matches central differences away from fixed points") {
        for (const auto& sys :
             {vol.system, make_example3(-1, -1, 0.5, 0.5).system, make_nutku(-1, -1, -1, 1, 1).system}) {
            const VectorXd x = VectorXd::Constant(sys.n(), 0.9);
            const MatrixXd J = jacobian(sys, x);
            const double delta = 1e-6;
            MatrixXd fd(sys.n(), sys.n());
            for (int j = 0; j < sys.n(); ++j) {
                VectorXd hi = x, lo = x;
                hi(j) += delta;
                lo(j) -= delta;
                fd.col(j) = (sys.flow(hi) - sys.flow(lo)) / (2.0 * delta);
            }
            REQUIRE(max_abs(J - fd) <= 1e-7);
        }
    }
}

TEST_CASE("linearized spectra at fixed points") {
    const ExampleSystem vol = make_volterra2d();
    const Eigen::VectorXcd eigs = spectrum_at(vol.system, vec2(1, 1));
    REQUIRE(eigs.size() == 2);
    REQUIRE(eigs.real().cwiseAbs().maxCoeff() <= 1e-9);
    REQUIRE(eigs.imag().cwiseAbs().maxCoeff() == Approx(1.0).margin(1e-9));
    REQUIRE(eigs.imag().cwiseAbs().minCoeff() == Approx(1.0).margin(1e-9));

    SECTION("the cyclic three-species family carries one neutral direction") {
        const ExampleSystem nut = make_nutku(-1, -1, -1, 1, 1);
        const Eigen::VectorXcd e = spectrum_at(nut.system, vec3(1, 3, 2));
        REQUIRE(e.real().cwiseAbs().maxCoeff() <= 1e-8);
        int near_zero = 0;
        for (Eigen::Index i = 0; i < e.size(); ++i)
            if (std::abs(e(i)) <= 1e-9) ++near_zero;
        REQUIRE(near_zero == 1);
        REQUIRE(e.imag().cwiseAbs().maxCoeff() == Approx(std::sqrt(11.0)).margin(1e-8));
    }

    SECTION("rejects points that are not equilibria") {
        REQUIRE_THROWS_AS(spectrum_at(vol.system, vec2(2, 1)), std::invalid_argument);
    }
}

TEST_CASE("small-oscillation analysis at planar centers") {
    SECTION("pure-power invariant gives axis-aligned ellipses") {
        const ExampleSystem ex = make_example2(2.0, 0.0, 0.0, 1.0);
        VectorXd xs(2);
        xs << std::sqrt(0.5), 1.0;
        const OscillationAnalysis osc = oscillation_analysis(ex.system, ex.poisson, xs);
        REQUIRE(osc.mu1 == Approx(-1.0).margin(1e-14));
        REQUIRE(osc.mu2 == Approx(-0.5).margin(1e-14));
        REQUIRE(osc.mu == 0.0);
        REQUIRE(osc.phi == 0.0);
        REQUIRE(osc.rho == Approx(std::sqrt(2.0)).margin(1e-14));
        REQUIRE(osc.omega == Approx(std::sqrt(2.0)).margin(1e-14));
        REQUIRE(osc.Phi == Approx(std::numbers::pi / 2.0).margin(1e-15));
    }

    SECTION("a coinciding log-Hessian diagonal picks the 45-degree branch") {
        const ExampleSystem ex = make_example2(2.0, 1.0, 1.0, 2.0);
        const double xstar = std::cbrt(1.0 / 3.0);
        const OscillationAnalysis osc = oscillation_analysis(ex.system, ex.poisson, vec2(xstar, xstar));
        REQUIRE(osc.mu1 == Approx(-5.0 / 6.0).margin(1e-12));
        REQUIRE(osc.mu2 == Approx(-5.0 / 6.0).margin(1e-12));
        REQUIRE(osc.mu == Approx(-2.0 / 3.0).margin(1e-12));
        REQUIRE(osc.phi == -std::numbers::pi / 4.0);
        REQUIRE(osc.lambda1 == Approx(-1.0 / 6.0).margin(1e-12));
        REQUIRE(osc.lambda2 == Approx(-1.5).margin(1e-12));
        REQUIRE(osc.rho == Approx(1.0 / 3.0).margin(1e-12));
        REQUIRE(osc.omega == Approx(1.0).margin(1e-12));
        REQUIRE(osc.Phi == Approx(2.498091544796509).margin(1e-12));
    }

    SECTION("preconditions") {
        const ExampleSystem vol = make_volterra2d();
        const ExampleSystem e3 = make_example3(-1, -1, 0.5, 0.5);
        REQUIRE_THROWS_AS(oscillation_analysis(e3.system, e3.poisson, vec2(1, 1)), std::invalid_argument);
        REQUIRE_THROWS_AS(oscillation_analysis(vol.system, PoissonData(MatrixXd::Zero(2, 2), vec2(1, 1), vec2(1, 1)),
                                               vec2(1, 1)),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(oscillation_analysis(vol.system, vol.poisson, vec2(2, 1)), std::invalid_argument);

        // definite D is required even at a genuine fixed point
        const MatrixXd K = vol.poisson.K();
        const VectorXd Dmix = vec2(1.0, -1.0), Lmix = vec2(-1.0, 1.0);
        const QPSystem mixed(K * Lmix, K * Dmix.asDiagonal(), MatrixXd::Identity(2, 2));
        REQUIRE(max_abs(mixed.flow(vec2(1, 1))) == 0.0);
        REQUIRE_THROWS_AS(oscillation_analysis(mixed, PoissonData(K, Lmix, Dmix), vec2(1, 1)),
                          std::invalid_argument);
    }
}

TEST_CASE("phase shift between components") {
    for (const double rho : {0.5, 1.0, 2.0, 3.0}) {
        REQUIRE(phase_shift(rho, 0.0) == std::numbers::pi / 2.0);
    }
    for (const double rho : {0.5, 1.3, 2.0}) {
        for (const double phi : {-0.4, -0.1, 0.2, 0.7}) {
            REQUIRE(phase_shift(rho, phi) == Approx(phase_shift(1.0 / rho, -phi)).margin(1e-14));
        }
    }
    REQUIRE_THROWS_AS(phase_shift(0.0, 0.1), std::domain_error);
    REQUIRE_THROWS_AS(phase_shift(-1.0, 0.1), std::domain_error);
    REQUIRE_THROWS_AS(phase_shift(1.0, std::numbers::pi / 2.0), std::domain_error);
}

TEST_CASE("empirical period and phase lag near a center") {
    const ExampleSystem ex = make_example2(2.0, 0.0, 0.0, 1.0);
    VectorXd xs(2);
    xs << std::sqrt(0.5), 1.0;
    const OscillationAnalysis osc = oscillation_analysis(ex.system, ex.poisson, xs);

    VectorXd start = xs;
    start(0) *= 1.005;
    const Trajectory traj = integrate(ex.system, start, 40.0, 1e-3);
    const std::optional<PeriodPhase> measured = measure_period_and_phase(traj);
    REQUIRE(measured.has_value());

    const double predicted_period = 2.0 * std::numbers::pi / osc.omega;
    REQUIRE(std::abs(measured->period - predicted_period) <= 1e-3 * predicted_period);
    REQUIRE(std::abs(measured->phase_lag - osc.Phi) <= 0.01 * osc.Phi);

    SECTION("refusals instead of garbage") {
        const Trajectory brief = integrate(ex.system, start, 1.0, 1e-3);
        REQUIRE_FALSE(measure_period_and_phase(brief).has_value());

        const ExampleSystem vol = make_volterra2d();
        const Trajectory flat = integrate(vol.system, vec2(1, 1), 5.0, 1e-2);
        REQUIRE_FALSE(measure_period_and_phase(flat).has_value());

        VectorXd one(1);
        one << 0.5;
        const Trajectory scalar = integrate(logistic1d(1.0, -1.0), one, 5.0, 1e-2);
        REQUIRE_FALSE(measure_period_and_phase(scalar).has_value());

        REQUIRE_FALSE(measure_period_and_phase(Trajectory{}).has_value());
    }
}
