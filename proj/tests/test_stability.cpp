#include "qpstab/analysis.hpp"
#include "qpstab/corpus.hpp"
#include "qpstab/stability.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace qpstab;
using Catch::Approx;

namespace {

MatrixXd mat2(double a11, double a12, double a21, double a22) {
    MatrixXd M(2, 2);
    M << a11, a12, a21, a22;
    return M;
}

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

} // namespace

TEST_CASE("kernel bases and Casimir functionals") {
    const ExampleSystem nut = make_nutku(-1, -1, -1, 1, 1);
    const std::vector<VectorXd> ker = kernel_basis(nut.poisson.K());
    REQUIRE(ker.size() == 1);
    REQUIRE(max_abs(nut.poisson.K() * ker[0]) <= 1e-13);
    REQUIRE(std::abs(ker[0].norm() - 1.0) <= 1e-14);

    const std::vector<QPFunctional> cas = casimirs(nut.poisson);
    REQUIRE(cas.size() == 1);
    REQUIRE(cas[0].term_count() == 0);
    REQUIRE(max_abs(cas[0].logcoeffs() - VectorXd::Ones(3)) <= 1e-12);
    REQUIRE(cas[0].value(vec3(1, 3, 2)) == Approx(std::log(6.0)).margin(2e-12));

    SECTION("an invertible structure matrix has no Casimirs") {
        REQUIRE(casimirs(make_volterra2d().poisson).empty());
    }

    SECTION("guards") {
        REQUIRE_THROWS_AS(kernel_basis(MatrixXd::Zero(2, 3)), std::invalid_argument);
        REQUIRE_THROWS_AS(kernel_basis(mat2(0, 1, 1, 0)), std::invalid_argument);
    }
}

TEST_CASE("fixed point families") {
    const ExampleSystem nut = make_nutku(-1, -1, -1, 1, 1);
    const FixedPointFamily fam = fixed_point_family(nut.poisson);
    REQUIRE(fam.parameters() == 1);
    REQUIRE(max_abs(fam.base - vec3(0, 2, 1)) == 0.0);
    REQUIRE(max_abs(fam.member(1.0) - vec3(1, 3, 2)) <= 1e-12);
    REQUIRE(fam.interior(1.0));
    REQUIRE(fam.interior(0.25));
    REQUIRE_FALSE(fam.interior(0.0));
    REQUIRE_FALSE(fam.interior(-0.5));

    SECTION("members are genuine fixed points of the representative") {
        for (const double kappa : {0.5, 1.0, 2.0, 3.0}) {
            const VectorXd x0 = fam.member(kappa);
            REQUIRE(max_abs(lv_flow(nut.poisson, x0)) <= 1e-9);
            REQUIRE(max_abs(nut.system.flow(x0)) <= 1e-9);
        }
    }

    SECTION("coefficient count is checked") {
        REQUIRE_THROWS_AS(fam.member(VectorXd::Ones(3)), std::invalid_argument);
    }

    SECTION("an invertible structure matrix pins the family to a point") {
        const FixedPointFamily only = fixed_point_family(make_volterra2d().poisson);
        REQUIRE(only.parameters() == 0);
        REQUIRE(max_abs(only.base - vec2(1, 1)) == 0.0);
    }
}

TEST_CASE("diagonal sign classification") {
    REQUIRE(classify_diagonal(vec2(1, 2)) == DSign::Positive);
    REQUIRE(classify_diagonal(vec2(-1, -2)) == DSign::Negative);
    REQUIRE(classify_diagonal(vec2(1, -1)) == DSign::Indefinite);
    REQUIRE(classify_diagonal(vec2(1, 1e-15)) == DSign::Indefinite);
    REQUIRE(classify_diagonal(vec2(1, 1e-11)) == DSign::Positive);
    REQUIRE(classify_diagonal(vec2(1, 1e-11), 1e-10) == DSign::Indefinite);
    REQUIRE(std::string(to_string(DSign::Negative)) == "negative");
}

TEST_CASE("definiteness verdicts") {
    const ExampleSystem vol = make_volterra2d();
    const StabilityReport neg = theorem2_verdict(vol.poisson);
    REQUIRE(neg.verdict == Verdict::StableByTheorem2);
    REQUIRE(neg.d_sign == DSign::Negative);

    const StabilityReport pos = theorem2_verdict(make_nutku(-1, -1, -1, 1, 1).poisson);
    REQUIRE(pos.verdict == Verdict::StableByTheorem2);
    REQUIRE(pos.d_sign == DSign::Positive);

    const StabilityReport mixed = theorem2_verdict(PoissonData(mat2(0, 1, -1, 0), vec2(1, 1), vec2(1, -1)));
    REQUIRE(mixed.verdict == Verdict::Inconclusive);
    REQUIRE(mixed.d_sign == DSign::Indefinite);

    SECTION("the checked overload validates the decomposition first") {
        const StabilityReport rep = theorem2_verdict(vol.system, vol.poisson);
        REQUIRE(rep.verdict == Verdict::StableByTheorem2);
        REQUIRE(rep.notes.find("reduction hypotheses hold") != std::string::npos);

        VectorXd lam = vol.system.lambda();
        lam(0) += 1e-3;
        REQUIRE_THROWS_AS(theorem2_verdict(QPSystem(lam, vol.system.A(), vol.system.B()), vol.poisson),
                          std::invalid_argument);
    }

    SECTION("a square exponent matrix must be orientation-preserving") {
        // exact decomposition of a system whose B has negative determinant
        const MatrixXd K = mat2(0, 1, -1, 0);
        const MatrixXd B = mat2(0, 1, 1, 0);
        const VectorXd L = vec2(1, 1), D = vec2(-1, -1);
        const QPSystem sys(K * L, K * B.transpose() * D.asDiagonal(), B);
        const PoissonData pd(K, L, D);
        REQUIRE(check_poisson_conditions(sys, pd, 1e-12).verdict);
        REQUIRE_THROWS_AS(theorem2_verdict(sys, pd), std::invalid_argument);
    }
}

TEST_CASE("energy-Casimir certificates on the representative") {
    const ExampleSystem vol = make_volterra2d();

    SECTION("at the predator-prey equilibrium the invariant itself certifies") {
        const LyapunovOutcome out = lyapunov_for_point(vol.poisson, vec2(1, 1));
        REQUIRE(out.ok());
        const LyapunovCertificate& cert = *out.certificate;
        REQUIRE(max_abs(cert.casimir_coefficients) == 0.0);
        REQUIRE(cert.kernel_residual == 0.0);
        REQUIRE(max_abs(cert.functional.coeffs() - vec2(-1, -1)) == 0.0);
        REQUIRE(max_abs(cert.functional.logcoeffs() - vec2(1, 1)) == 0.0);
        REQUIRE(max_abs(cert.hessian_diag - vec2(-1, -1)) == 0.0);
        REQUIRE(cert.functional.value(vec2(1, 1)) == -2.0);
    }

    SECTION("on the cyclic three-species family the Casimir direction is -1") {
        const ExampleSystem nut = make_nutku(-1, -1, -1, 1, 1);
        const LyapunovOutcome out = lyapunov_for_point(nut.poisson, vec3(1, 3, 2));
        REQUIRE(out.ok());
        REQUIRE(max_abs(out.certificate->casimir_coefficients - vec3(-1, -1, -1)) <= 1e-12);
        REQUIRE(max_abs(out.certificate->functional.logcoeffs() - vec3(-1, -3, -2)) <= 1e-12);
        REQUIRE(max_abs(out.certificate->hessian_diag - vec3(1.0, 1.0 / 3.0, 0.5)) <= 1e-14);
    }

    SECTION("points off the fixed-point set are rejected") {
        REQUIRE_THROWS_AS(lyapunov_for_point(vol.poisson, vec2(2, 2)), std::invalid_argument);
        REQUIRE_THROWS_AS(lyapunov_for_point(vol.poisson, vec2(-1, 1)), std::domain_error);
    }

    SECTION("an approximate fixed point may admit no Casimir direction") {
        const ExampleSystem nut = make_nutku(-1, -1, -1, 1, 1);
        VectorXd nudged = vec3(1.001, 3, 2);
        // loose flow gate accepts the point, strict kernel gate refuses it
        const LyapunovOutcome out = lyapunov_for_point(nut.poisson, nudged, 0.1, 1e-9);
        REQUIRE_FALSE(out.ok());
        REQUIRE(out.reason.find("no energy-Casimir certificate") != std::string::npos);
        REQUIRE_THROWS_AS(lyapunov_for_point(nut.poisson, nudged), std::invalid_argument);
    }
}

TEST_CASE("certificates pulled back to the original coordinates") {
    const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);
    const std::vector<VectorXd> pts = find_fixed_points_newton(e3.system);
    REQUIRE(pts.size() == 1);
    REQUIRE(max_abs(e3.system.flow(pts[0])) <= 1e-9);

    const QPFunctional cert = lyapunov_original_coordinates(e3.system, e3.poisson, pts[0]);
    REQUIRE(max_abs(cert.exponents() - e3.system.B()) == 0.0);
    REQUIRE(max_abs(cert.coeffs() - e3.poisson.D()) == 0.0);
    REQUIRE(max_abs(cert.gradient(pts[0])) <= 1e-8);

    SECTION("the certificate has a strict local maximum at the fixed point") {
        const double v0 = cert.value(pts[0]);
        for (int j = 0; j < 2; ++j) {
            for (const double eps : {1e-3, -1e-3}) {
                VectorXd x = pts[0];
                x(j) += eps;
                REQUIRE(cert.value(x) < v0);
            }
        }
    }

    SECTION("failures surface as exceptions") {
        const ExampleSystem nut = make_nutku(-1, -1, -1, 1, 1);
        REQUIRE_THROWS_AS(
            lyapunov_original_coordinates(nut.system, nut.poisson, vec3(1.001, 3, 2), 0.1, 1e-9),
            std::runtime_error);
        const ExampleSystem vol = make_volterra2d();
        VectorXd lam = vol.system.lambda();
        lam(0) += 1e-3;
        REQUIRE_THROWS_AS(lyapunov_original_coordinates(QPSystem(lam, vol.system.A(), vol.system.B()),
                                                        vol.poisson, vec2(1, 1)),
                          std::invalid_argument);
    }
}

TEST_CASE("weighted symmetrized interaction forms") {
    SECTION("conservative interactions cancel exactly under |D| weights") {
        const ExampleSystem vol = make_volterra2d();
        const SymmetrizedForm zero = symmetrized_form(vol.system.A(), vol.poisson.D().cwiseAbs());
        REQUIRE(zero.classification == FormClass::Zero);
        REQUIRE(max_abs(zero.M) == 0.0);

        const MatrixXd K = mat2(0, 1, -1, 0);
        const VectorXd D = vec2(2.0, 0.5);
        const SymmetrizedForm z2 = symmetrized_form(K * D.asDiagonal(), D);
        REQUIRE(z2.classification == FormClass::Zero);
        REQUIRE(max_abs(z2.M) == 0.0);
    }

    SECTION("all sign classes are reachable") {
        const VectorXd ones = VectorXd::Ones(2);
        REQUIRE(symmetrized_form(-MatrixXd::Identity(2, 2), ones).classification ==
                FormClass::NegativeDefinite);
        REQUIRE(symmetrized_form(MatrixXd::Identity(2, 2), ones).classification ==
                FormClass::PositiveDefinite);
        REQUIRE(symmetrized_form(mat2(1, 0, 0, -1), ones).classification == FormClass::Indefinite);
        REQUIRE(symmetrized_form(mat2(-1, 0, 0, 0), ones).classification ==
                FormClass::NegativeSemidefinite);
        REQUIRE(symmetrized_form(mat2(1, 0, 0, 0), ones).classification ==
                FormClass::PositiveSemidefinite);
        REQUIRE(std::string(to_string(FormClass::NegativeDefinite)) == "negative definite");
    }

    SECTION("guards") {
        REQUIRE_THROWS_AS(symmetrized_form(MatrixXd::Zero(2, 3), VectorXd::Ones(2)), std::invalid_argument);
        REQUIRE_THROWS_AS(symmetrized_form(MatrixXd::Zero(2, 2), VectorXd::Ones(3)), std::invalid_argument);
        REQUIRE_THROWS_AS(symmetrized_form(MatrixXd::Zero(2, 2), vec2(1, -1)), std::domain_error);
    }
}

TEST_CASE("classical distance functional") {
    const VectorXd x0 = vec2(0.5, 2.0);
    const VectorXd d = vec2(1.0, 3.0);
    const QPFunctional V = volterra_functional(x0, d);

    REQUIRE(std::abs(V.value(x0)) <= 1e-14);
    REQUIRE(max_abs(V.gradient(x0)) == 0.0);
    for (const auto& x : {vec2(0.6, 2.0), vec2(0.5, 1.5), vec2(1.0, 3.0), vec2(0.1, 0.1)}) {
        REQUIRE(V.value(x) > 0.0);
    }

    REQUIRE_THROWS_AS(volterra_functional(vec2(0, 1), d), std::domain_error);
    REQUIRE_THROWS_AS(volterra_functional(x0, vec2(-1, 1)), std::domain_error);
    REQUIRE_THROWS_AS(volterra_functional(x0, VectorXd::Ones(3)), std::invalid_argument);
}
