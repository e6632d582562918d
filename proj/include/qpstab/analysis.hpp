#pragma once

// End-to-end analysis driver: obtain (or recover) a decomposition, reduce to
// the Lotka-Volterra representative, enumerate Casimirs and the fixed-point
// family, search for interior fixed points of the original flow, and issue
// the stability verdict.

#include "qpstab/stability.hpp"
#include "qpstab/system.hpp"
#include "qpstab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qpstab {

struct NewtonOptions {
    int max_iterations = 100;
    double tol = 1e-12;        ///< accept when max |rhs| falls below this
    int grid_per_dim = 7;      ///< log-uniform starts per dimension (n <= 3)
    int random_starts = 250;   ///< seeded random starts for n > 3
    double lo = 1e-3, hi = 1e3; ///< start-box bounds per coordinate
    std::uint64_t seed = default_seed();
};

namespace detail {

/// One damped Newton run on G(y) = lambda + A exp(B y) from a log-space
/// start; returns the state x = exp(y) on convergence.
inline std::optional<VectorXd> newton_from(const QPSystem& sys, VectorXd y, const NewtonOptions& opt) {
    const auto residual = [&](const VectorXd& yy) { return sys.log_flow(yy); };
    VectorXd g = residual(y);
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double gn = g.cwiseAbs().maxCoeff();
        if (gn <= opt.tol) return VectorXd(y.array().exp());
        const VectorXd q = (sys.B() * y).array().exp();
        const MatrixXd J = sys.A() * q.asDiagonal() * sys.B();
        const VectorXd step = lstsq(J, -g);
        if (!step.allFinite() || step.cwiseAbs().maxCoeff() > 1e6) return std::nullopt;
        double t = 1.0;
        bool advanced = false;
        for (int half = 0; half < 40; ++half) {
            const VectorXd y_try = y + t * step;
            const VectorXd g_try = residual(y_try);
            if (g_try.allFinite() && g_try.cwiseAbs().maxCoeff() < gn) {
                y = y_try;
                g = g_try;
                advanced = true;
                break;
            }
            t *= 0.5;
        }
        if (!advanced) return std::nullopt;
    }
    return (g.cwiseAbs().maxCoeff() <= opt.tol) ? std::optional<VectorXd>(y.array().exp()) : std::nullopt;
}

} // namespace detail

/// Multi-start damped Newton search for interior fixed points, run in log
/// coordinates so candidates stay in the positive orthant. Returns deduplicated
/// points in lexicographic order; an empty result means no start converged.
inline std::vector<VectorXd> find_fixed_points_newton(const QPSystem& sys, const NewtonOptions& opt = {}) {
    const int n = sys.n();
    std::vector<VectorXd> starts;
    const double ylo = std::log(opt.lo), yhi = std::log(opt.hi);
    if (n <= 3) {
        const int g = std::max(2, opt.grid_per_dim);
        const auto total = static_cast<std::size_t>(std::pow(g, n));
        for (std::size_t k = 0; k < total; ++k) {
            VectorXd y(n);
            std::size_t r = k;
            for (int i = 0; i < n; ++i) {
                y(i) = ylo + (yhi - ylo) * static_cast<double>(r % g) / static_cast<double>(g - 1);
                r /= g;
            }
            starts.push_back(y);
        }
    } else {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> coord(ylo, yhi);
        for (int k = 0; k < opt.random_starts; ++k) {
            VectorXd y(n);
            for (int i = 0; i < n; ++i) y(i) = coord(rng);
            starts.push_back(y);
        }
    }

    std::vector<VectorXd> points;
    for (const auto& y0 : starts) {
        auto x = detail::newton_from(sys, y0, opt);
        if (!x) continue;
        if (max_abs(sys.flow(*x)) > 10.0 * opt.tol * (1.0 + x->cwiseAbs().maxCoeff())) continue;
        bool duplicate = false;
        for (const auto& p : points)
            if (max_abs(*x - p) <= 1e-6 * (1.0 + max_abs(p))) {
                duplicate = true;
                break;
            }
        if (!duplicate) points.push_back(*x);
    }
    std::sort(points.begin(), points.end(), [](const VectorXd& u, const VectorXd& v) {
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (u(i) != v(i)) return u(i) < v(i);
        return false;
    });
    return points;
}

struct AnalysisResult {
    std::optional<PoissonData> poisson;   ///< supplied or recovered triple
    std::optional<PoissonCheck> check;    ///< residuals of the triple
    std::optional<LvReduction> reduction; ///< pipeline to the representative
    std::optional<FixedPointFamily> family; ///< fixed points of the representative
    std::vector<QPFunctional> casimirs_representative;
    std::vector<QPFunctional> casimirs_original; ///< pulled back through the record
    std::vector<VectorXd> fixed_points;          ///< interior points of the original flow
    std::optional<SymmetrizedForm> dissipation;  ///< classification when no valid triple
    StabilityReport report;
    std::string notes;
};

/// Full pipeline. When no decomposition is supplied and the system is already
/// in Lotka-Volterra form, recovery from A is attempted. A missing or invalid
/// triple yields an Inconclusive report with diagnostics instead of an error.
inline AnalysisResult analyze(const QPSystem& sys, std::optional<PoissonData> pd = std::nullopt,
                              double tol = Tolerances{}.poisson) {
    AnalysisResult res;
    const auto append_note = [&res](const std::string& s) {
        if (!res.notes.empty()) res.notes += "; ";
        res.notes += s;
    };

    if (!pd) {
        if (sys.lv_form()) {
            LvRecovery rec = recover_decomposition_lv(sys, tol);
            append_note("decomposition recovery: " + rec.note);
            if (rec.data) pd = std::move(rec.data);
        } else {
            append_note("no decomposition supplied and the system is not in Lotka-Volterra form");
        }
    }

    if (pd) {
        res.check = check_poisson_conditions(sys, *pd, tol);
        res.poisson = std::move(pd);
        if (!res.check->verdict) {
            append_note("decomposition conditions fail: " + res.check->summary());
            res.poisson.reset();
        }
    }

    if (!res.poisson) {
        res.report.verdict = Verdict::Inconclusive;
        res.report.d_sign = DSign::Indefinite;
        if (sys.lv_form()) {
            res.dissipation = symmetrized_form(sys.A(), VectorXd::Ones(sys.n()));
            append_note(std::string("symmetrized interaction form is ") +
                        to_string(res.dissipation->classification));
        }
        res.fixed_points = find_fixed_points_newton(sys);
        res.report.notes = res.notes;
        return res;
    }

    if (sys.m() == sys.n() && sys.B().determinant() <= 0.0) {
        append_note("square exponent matrix has nonpositive determinant; reduction hypotheses fail");
        res.report.verdict = Verdict::Inconclusive;
        res.report.d_sign = classify_diagonal(res.poisson->D());
        res.report.notes = res.notes;
        return res;
    }

    res.reduction = to_lotka_volterra(sys, res.poisson);
    const PoissonData& pd_lv = *res.reduction->pd_lv;
    res.family = fixed_point_family(pd_lv);
    res.casimirs_representative = casimirs(pd_lv);
    for (const auto& c : res.casimirs_representative)
        res.casimirs_original.push_back(map_functional(res.reduction->record, c, MapDirection::Inverse));
    res.report = theorem2_verdict(*res.poisson);
    res.fixed_points = find_fixed_points_newton(sys);
    append_note(res.report.notes);
    append_note(std::to_string(res.fixed_points.size()) + " interior fixed point(s) located by Newton search");
    res.report.notes = res.notes;
    return res;
}

} // namespace qpstab
