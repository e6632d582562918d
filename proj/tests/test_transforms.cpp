#include "qpstab/corpus.hpp"
#include "qpstab/transforms.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

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

VectorXd random_positive(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = std::exp(u(rng));
    return x;
}

} // namespace

TEST_CASE("transform records map points step by step") {
    SECTION("an empty record is the identity") {
        const TransformRecord rec;
        const VectorXd x = vec2(0.3, 1.9);
        REQUIRE(max_abs(map_point(rec, x, MapDirection::Forward) - x) == 0.0);
        REQUIRE(max_abs(map_point(rec, x, MapDirection::Inverse) - x) == 0.0);
    }

    SECTION("embedding appends unit entries, its inverse drops them") {
        TransformRecord rec;
        MatrixXd Bprime(3, 1);
        Bprime << 0, 0, 1;
        rec.push_embed(Bprime);
        const VectorXd fwd = map_point(rec, vec2(2.0, 5.0), MapDirection::Forward);
        REQUIRE(fwd.size() == 3);
        REQUIRE(fwd(0) == 2.0);
        REQUIRE(fwd(1) == 5.0);
        REQUIRE(fwd(2) == 1.0);
        REQUIRE(max_abs(map_point(rec, fwd, MapDirection::Inverse) - vec2(2.0, 5.0)) == 0.0);
    }

    SECTION("quasimonomial steps exponentiate with the inverse matrix") {
        TransformRecord rec;
        const MatrixXd gamma = mat2(1, 0, 1, 1); // inverse [[1,0],[-1,1]]
        rec.push_qmt(gamma);
        const VectorXd y = map_point(rec, vec2(2.0, 6.0), MapDirection::Forward);
        REQUIRE(y(0) == Approx(2.0).margin(1e-14));
        REQUIRE(y(1) == Approx(3.0).margin(1e-14));
        const VectorXd back = map_point(rec, y, MapDirection::Inverse);
        REQUIRE(max_abs(back - vec2(2.0, 6.0)) <= 1e-13);
    }

    SECTION("decoupling keeps the leading block, its inverse pads with ones") {
        TransformRecord rec;
        rec.push_decouple(1, 2);
        const VectorXd fwd = map_point(rec, vec2(3.0, 7.0), MapDirection::Forward);
        REQUIRE(fwd.size() == 1);
        REQUIRE(fwd(0) == 3.0);
        const VectorXd inv = map_point(rec, fwd, MapDirection::Inverse);
        REQUIRE(inv.size() == 2);
        REQUIRE(inv(1) == 1.0);
    }

    SECTION("guards") {
        TransformRecord rec;
        rec.push_qmt(mat2(1, 0, 1, 1));
        REQUIRE_THROWS_AS(map_point(rec, vec2(1.0, 0.0), MapDirection::Forward), std::domain_error);
        VectorXd three(3);
        three << 1, 1, 1;
        REQUIRE_THROWS_AS(map_point(rec, three, MapDirection::Forward), std::invalid_argument);
        REQUIRE_THROWS_AS(rec.push_qmt(MatrixXd::Zero(2, 2)), std::invalid_argument);
        REQUIRE_THROWS_AS(rec.push_qmt(mat2(1, 0, 0, 1), mat2(1, 0, 0, 2)), std::invalid_argument);
        REQUIRE_THROWS_AS(rec.push_decouple(0, 2), std::invalid_argument);
    }
}

TEST_CASE("functional transport matches point transport") {
    const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);
    const LvReduction red = to_lotka_volterra(e3.system, e3.poisson);
    const QPFunctional h_lv = hamiltonian_from_decomposition(red.lv, *red.pd_lv);
    const QPFunctional h_orig = map_functional(red.record, h_lv, MapDirection::Inverse);

    std::mt19937_64 rng(default_seed());
    for (int trial = 0; trial < 100; ++trial) {
        const VectorXd x = random_positive(rng, e3.system.n());
        const VectorXd y = random_positive(rng, red.lv.n());
        const double fwd_lhs = map_functional(red.record, h_orig, MapDirection::Forward).value(y);
        const double fwd_rhs = h_orig.value(map_point(red.record, y, MapDirection::Inverse));
        REQUIRE(fwd_lhs == Approx(fwd_rhs).margin(1e-10 * (1.0 + std::abs(fwd_rhs))));
        const double inv_lhs = h_orig.value(x);
        const double inv_rhs = h_lv.value(map_point(red.record, x, MapDirection::Forward));
        REQUIRE(inv_lhs == Approx(inv_rhs).margin(1e-10 * (1.0 + std::abs(inv_rhs))));
    }

    SECTION("dimension mismatches are rejected") {
        REQUIRE_THROWS_AS(map_functional(red.record, QPFunctional::logs_only(VectorXd::Ones(3)),
                                         MapDirection::Forward),
                          std::invalid_argument);
    }
}

TEST_CASE("embedding a rectangular system") {
    const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);
    const MatrixXd Bprime = choose_embedding_columns(e3.system.B());
    REQUIRE(Bprime.rows() == 4);
    REQUIRE(Bprime.cols() == 2);

    MatrixXd full(4, 4);
    full << e3.system.B(), Bprime;
    REQUIRE(full.determinant() > 0.0);

    const QPSystem expanded = embed(e3.system, Bprime);
    REQUIRE(expanded.n() == 4);
    REQUIRE(expanded.m() == 4);
    REQUIRE(max_abs(expanded.lambda().tail(2)) == 0.0);
    REQUIRE(max_abs(expanded.A().bottomRows(2)) == 0.0);
    REQUIRE(max_abs(expanded.B() - full) == 0.0);

    SECTION("the expanded flow restricts to the original on the unit slice") {
        const VectorXd x = vec2(0.8, 1.3);
        VectorXd xe(4);
        xe << x, 1.0, 1.0;
        const VectorXd fe = expanded.flow(xe);
        REQUIRE(max_abs(fe.head(2) - e3.system.flow(x)) <= 1e-14);
        REQUIRE(max_abs(fe.tail(2)) == 0.0);
    }

    SECTION("rejects square systems, bad shapes, and wrong orientation") {
        REQUIRE_THROWS_AS(embed(make_volterra2d().system, MatrixXd::Zero(2, 0)), std::invalid_argument);
        REQUIRE_THROWS_AS(embed(e3.system, MatrixXd::Zero(4, 1)), std::invalid_argument);
        MatrixXd swapped(4, 2);
        swapped << Bprime.col(1), Bprime.col(0);
        REQUIRE_THROWS_AS(embed(e3.system, swapped), std::invalid_argument);
    }

    SECTION("column completion handles square and rank-deficient inputs") {
        REQUIRE(choose_embedding_columns(MatrixXd::Identity(3, 3)).cols() == 0);
        MatrixXd flat(3, 2);
        flat << 1, 1, 1, 1, 1, 1;
        REQUIRE_THROWS_AS(choose_embedding_columns(flat), std::invalid_argument);
    }

    SECTION("decomposition extension is zero-padded with D unchanged") {
        const PoissonData pde = embed_poisson(e3.poisson, 4);
        REQUIRE(pde.n() == 4);
        REQUIRE(max_abs(pde.K().topLeftCorner(2, 2) - e3.poisson.K()) == 0.0);
        REQUIRE(max_abs(pde.K().bottomRows(2)) == 0.0);
        REQUIRE(max_abs(pde.L().tail(2)) == 0.0);
        REQUIRE(max_abs(pde.D() - e3.poisson.D()) == 0.0);
        REQUIRE_THROWS_AS(embed_poisson(e3.poisson, 2), std::invalid_argument);
    }
}

TEST_CASE("quasimonomial changes of variables") {
    const ExampleSystem e2 = make_example2(2.0, 1.0, 1.0, 2.0);
    const MatrixXd B = e2.system.B();
    const MatrixXd gamma = mat2(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0); // B^{-1}

    SECTION("transformed matrices follow the conjugation rules") {
        const QPSystem out = apply_qmt(e2.system, gamma);
        REQUIRE(max_abs(out.B() - MatrixXd::Identity(2, 2)) <= 1e-15);
        REQUIRE(max_abs(out.A() - mat2(0, -3, 3, 0)) <= 1e-13);
        REQUIRE(max_abs(out.lambda() - vec2(1.0, -1.0)) <= 1e-14);
    }

    SECTION("decomposition conjugation") {
        const PoissonData pd2 = qmt_poisson(e2.poisson, gamma, B);
        REQUIRE(max_abs(pd2.K() - mat2(0, 3, -3, 0)) <= 1e-13);
        REQUIRE(max_abs(pd2.L() - vec2(1.0 / 3.0, 1.0 / 3.0)) <= 1e-14);
        REQUIRE(max_abs(pd2.D() - e2.poisson.D()) == 0.0);
    }

    SECTION("vector fields are conjugate under the point map") {
        std::mt19937_64 rng(default_seed() + 1);
        std::uniform_real_distribution<double> entry(-2.0, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            MatrixXd G(2, 2);
            do {
                G << entry(rng), entry(rng), entry(rng), entry(rng);
            } while (std::abs(G.determinant()) < 0.3);
            const MatrixXd Ginv = G.inverse();
            const QPSystem out = apply_qmt(e2.system, G);
            for (int pt = 0; pt < 5; ++pt) {
                const VectorXd y = random_positive(rng, 2);
                const VectorXd x = (G * y.array().log().matrix()).array().exp();
                const VectorXd expected =
                    y.asDiagonal() * (Ginv * e2.system.flow(x).cwiseQuotient(x));
                const double scale = 1.0 + max_abs(expected);
                REQUIRE(max_abs(out.flow(y) - expected) <= 1e-9 * scale);
            }
        }
    }

    SECTION("guards") {
        REQUIRE_THROWS_AS(apply_qmt(e2.system, MatrixXd::Identity(3, 3)), std::invalid_argument);
        REQUIRE_THROWS_AS(apply_qmt(e2.system, MatrixXd::Zero(2, 2)), std::invalid_argument);
        warnings_enabled() = false;
        REQUIRE_NOTHROW(apply_qmt(e2.system, mat2(0, 1, 1, 0)));
        warnings_enabled() = true;
    }
}

TEST_CASE("reduction to the Lotka-Volterra representative") {
    SECTION("a square system needs only one change of variables") {
        const ExampleSystem e2 = make_example2(2.0, 1.0, 1.0, 2.0);
        const LvReduction red = to_lotka_volterra(e2.system, e2.poisson);
        REQUIRE(red.record.size() == 1);
        REQUIRE(red.lv.lv_form());
        REQUIRE(max_abs(red.lv.B() - MatrixXd::Identity(2, 2)) == 0.0);
        REQUIRE(max_abs(red.lv.A() - mat2(0, -3, 3, 0)) <= 1e-13);
        REQUIRE(max_abs(red.lv.lambda() - vec2(1.0, -1.0)) <= 1e-14);
        REQUIRE(red.pd_lv.has_value());
        REQUIRE(max_abs(red.pd_lv->K() - mat2(0, 3, -3, 0)) <= 1e-13);
        REQUIRE(max_abs(red.pd_lv->L() - vec2(1.0 / 3.0, 1.0 / 3.0)) <= 1e-14);
        REQUIRE(max_abs(red.pd_lv->D() - e2.poisson.D()) == 0.0);
        REQUIRE(check_poisson_conditions(red.lv, *red.pd_lv, 1e-9).verdict);
    }

    SECTION("a rectangular system embeds first") {
        const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);
        const LvReduction red = to_lotka_volterra(e3.system, e3.poisson);
        REQUIRE(red.record.size() == 2);
        REQUIRE(red.lv.n() == 4);
        REQUIRE(max_abs(red.lv.B() - MatrixXd::Identity(4, 4)) == 0.0);
        REQUIRE(red.pd_lv.has_value());
        for (int j = 0; j < 4; ++j) REQUIRE(red.pd_lv->D()(j) == e3.poisson.D()(j));
        REQUIRE(check_poisson_conditions(red.lv, *red.pd_lv, 1e-9).verdict);

        std::mt19937_64 rng(default_seed());
        for (int trial = 0; trial < 50; ++trial) {
            const VectorXd x = random_positive(rng, 2);
            const VectorXd there = map_point(red.record, x, MapDirection::Forward);
            const VectorXd back = map_point(red.record, there, MapDirection::Inverse);
            REQUIRE(max_abs(back - x) <= 1e-12 * (1.0 + max_abs(x)));
        }
    }

    SECTION("systems already in representative form pass through untouched") {
        const ExampleSystem vol = make_volterra2d();
        const LvReduction red = to_lotka_volterra(vol.system, vol.poisson);
        REQUIRE(red.record.empty());
        REQUIRE(max_abs(red.lv.A() - vol.system.A()) == 0.0);
        REQUIRE(red.pd_lv.has_value());
        REQUIRE(max_abs(red.pd_lv->K() - vol.poisson.K()) == 0.0);
    }

    SECTION("rejects ineligible systems and mismatched decompositions") {
        const QPSystem flat(vec2(1, 1), mat2(1, 1, 1, 1), mat2(1, 1, 1, 1));
        REQUIRE_THROWS_AS(to_lotka_volterra(flat), std::invalid_argument);
        const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);
        REQUIRE_THROWS_AS(to_lotka_volterra(e3.system, make_volterra2d().poisson), std::invalid_argument);
    }
}

TEST_CASE("decoupling constant trailing variables") {
    const ExampleSystem e3 = make_example3(-1.0, -1.0, 0.5, 0.5);
    const MatrixXd Bprime = choose_embedding_columns(e3.system.B());
    const QPSystem expanded = embed(e3.system, Bprime);

    const QPSystem back = decouple(expanded, 2);
    REQUIRE(max_abs(back.lambda() - e3.system.lambda()) == 0.0);
    REQUIRE(max_abs(back.A() - e3.system.A()) == 0.0);
    REQUIRE(max_abs(back.B() - e3.system.B()) == 0.0);
    REQUIRE_NOTHROW(decouple(expanded, 3));

    REQUIRE_THROWS_AS(decouple(expanded, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(decouple(make_volterra2d().system, 1), std::invalid_argument);
}
