#pragma once

// Stability machinery for conservative Lotka-Volterra representatives:
// Casimir functions from the kernel of K, the parametric family of interior
// fixed points x0(N) = -D^{-1}(L - N), definiteness verdicts on D, and
// explicit energy-Casimir Lyapunov functionals H_C = H + sum_k N_k ln x_k.

#include "qpstab/system.hpp"
#include "qpstab/transforms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qpstab {

/// Orthonormal basis of the numerical null space of a skew matrix K;
/// empty when K is invertible.
inline std::vector<VectorXd> kernel_basis(const MatrixXd& K, double tol = Tolerances{}.skew_rel) {
    if (K.rows() != K.cols()) throw std::invalid_argument("kernel_basis: K must be square");
    if (!is_skew(K, tol)) throw std::invalid_argument("kernel_basis: K must be skew-symmetric");
    const MatrixXd ns = nullspace_basis(K);
    std::vector<VectorXd> out;
    out.reserve(static_cast<std::size_t>(ns.cols()));
    for (Eigen::Index c = 0; c < ns.cols(); ++c) out.emplace_back(ns.col(c));
    return out;
}

namespace detail {

/// Kernel vectors rescaled so the largest-magnitude entry equals +1; this is
/// the representative used for Casimirs and fixed-point families.
inline std::vector<VectorXd> unit_max_kernel(const MatrixXd& K) {
    std::vector<VectorXd> vecs = kernel_basis(K);
    for (auto& v : vecs) v /= v.cwiseAbs().maxCoeff();
    return vecs;
}

} // namespace detail

/// One logarithmic Casimir C = sum_j N_j ln x_j per kernel direction of K,
/// each normalized to a largest coefficient of +1. Every returned functional
/// is conserved by any flow with structure matrix J_ij = K_ij x_i x_j.
inline std::vector<QPFunctional> casimirs(const PoissonData& pd) {
    std::vector<QPFunctional> out;
    for (const auto& v : detail::unit_max_kernel(pd.K())) out.push_back(QPFunctional::logs_only(v));
    return out;
}

/// Parametric family of fixed points of the Lotka-Volterra representative:
/// x0(kappa) = base + D^{-1} N(kappa) with N(kappa) = sum_i kappa_i basis_i
/// ranging over ker K. Members need not be positive; interior() tells.
struct FixedPointFamily {
    VectorXd base;                      ///< -D^{-1} L
    std::vector<VectorXd> kernel_basis; ///< ker K, scaled to max-abs entry 1
    VectorXd Dinv;                      ///< 1 / D_jj

    int parameters() const { return static_cast<int>(kernel_basis.size()); }

    VectorXd member(const VectorXd& kappa) const {
        if (kappa.size() != static_cast<Eigen::Index>(kernel_basis.size()))
            throw std::invalid_argument("FixedPointFamily::member: expected " +
                                        std::to_string(kernel_basis.size()) + " coefficients");
        VectorXd x0 = base;
        for (std::size_t i = 0; i < kernel_basis.size(); ++i)
            x0 += kappa(static_cast<Eigen::Index>(i)) * Dinv.cwiseProduct(kernel_basis[i]);
        return x0;
    }

    VectorXd member(double kappa) const {
        VectorXd k(1);
        k(0) = kappa;
        return member(k);
    }

    bool interior(const VectorXd& kappa) const { return (member(kappa).array() > 0.0).all(); }
    bool interior(double kappa) const { return (member(kappa).array() > 0.0).all(); }
};

inline FixedPointFamily fixed_point_family(const PoissonData& pd) {
    FixedPointFamily fam;
    fam.Dinv = pd.Dinv();
    fam.base = -fam.Dinv.cwiseProduct(pd.L());
    fam.kernel_basis = detail::unit_max_kernel(pd.K());
    return fam;
}

enum class DSign { Positive, Negative, Indefinite };
enum class Verdict { StableByTheorem2, Inconclusive };

inline const char* to_string(DSign s) {
    switch (s) {
    case DSign::Positive: return "positive";
    case DSign::Negative: return "negative";
    default: return "indefinite";
    }
}

inline const char* to_string(Verdict v) {
    return v == Verdict::StableByTheorem2 ? "StableByTheorem2" : "Inconclusive";
}

/// Sign pattern of a diagonal matrix given by its diagonal. Entries within
/// zero_tol of zero demote the verdict to indefinite.
inline DSign classify_diagonal(const VectorXd& D, double zero_tol = Tolerances{}.definite_zero) {
    bool pos = true, neg = true;
    for (Eigen::Index j = 0; j < D.size(); ++j) {
        if (!(D(j) > zero_tol)) pos = false;
        if (!(D(j) < -zero_tol)) neg = false;
    }
    if (pos) return DSign::Positive;
    if (neg) return DSign::Negative;
    return DSign::Indefinite;
}

struct StabilityReport {
    Verdict verdict = Verdict::Inconclusive;
    DSign d_sign = DSign::Indefinite;
    std::optional<QPFunctional> lyapunov;
    std::optional<VectorXd> hessian_diag;
    std::string notes;
};

/// Definiteness verdict from the decomposition alone: a definite D makes
/// every interior fixed point of the representative stable.
inline StabilityReport theorem2_verdict(const PoissonData& pd) {
    StabilityReport rep;
    rep.d_sign = classify_diagonal(pd.D());
    if (rep.d_sign == DSign::Indefinite) {
        rep.verdict = Verdict::Inconclusive;
        rep.notes = "D has mixed-sign or near-zero diagonal entries; the definiteness criterion does not apply";
    } else {
        rep.verdict = Verdict::StableByTheorem2;
        rep.notes = std::string("D is ") + to_string(rep.d_sign) +
                    " definite; every interior fixed point of the representative is stable";
    }
    return rep;
}

/// Same verdict, but first validates the decomposition against the system and
/// the reduction hypotheses (square exponent matrix with positive
/// determinant, or m > n with full-rank B).
inline StabilityReport theorem2_verdict(const QPSystem& sys, const PoissonData& pd,
                                        double tol = Tolerances{}.poisson) {
    const PoissonCheck chk = check_poisson_conditions(sys, pd, tol);
    if (!chk.verdict)
        throw std::invalid_argument("theorem2_verdict: decomposition conditions fail (" + chk.summary() + ")");
    if (sys.m() == sys.n() && sys.B().determinant() <= 0.0)
        throw std::invalid_argument(
            "theorem2_verdict: square exponent matrix must have positive determinant for the reduction");
    StabilityReport rep = theorem2_verdict(pd);
    rep.notes += (sys.m() == sys.n()) ? "; reduction hypotheses hold (m = n, det B > 0)"
                                      : "; reduction hypotheses hold (m > n, full-rank B)";
    return rep;
}

struct LyapunovCertificate {
    QPFunctional functional;        ///< H_C with coefficients D and log part L + N
    VectorXd hessian_diag;          ///< D_jj / x0_j (diagonal Hessian at x0)
    VectorXd casimir_coefficients;  ///< N, the kernel element used
    double kernel_residual = 0.0;   ///< max |K N|
};

/// Refusals carry an empty certificate and a reason.
struct LyapunovOutcome {
    std::optional<LyapunovCertificate> certificate;
    std::string reason;

    bool ok() const { return certificate.has_value(); }
};

/// Flow of the Lotka-Volterra representative implied by a decomposition with
/// B = I: x' = x . (K L + K D x).
inline VectorXd lv_flow(const PoissonData& pd, const VectorXd& x) {
    detail::require_positive(x, "lv_flow");
    if (x.size() != pd.m()) throw std::invalid_argument("lv_flow: dimension mismatch");
    return x.cwiseProduct(pd.K() * (pd.L() + pd.D().cwiseProduct(x)));
}

/// Energy-Casimir certificate at a fixed point x0 of the representative.
/// The vanishing-gradient condition fixes N_j = -L_j - D_jj x0_j uniquely;
/// the certificate exists iff that N lies in ker K (checked, not assumed).
/// flow_tol gates the fixed-point precondition; kernel_tol gates the
/// (relative) kernel-membership residual. Keeping them separate lets a
/// caller accept an approximate fixed point while still demanding a genuine
/// Casimir direction.
inline LyapunovOutcome lyapunov_for_point(const PoissonData& pd, const VectorXd& x0,
                                          double flow_tol = Tolerances{}.fixed_point,
                                          double kernel_tol = Tolerances{}.kernel_rel) {
    detail::require_positive(x0, "lyapunov_for_point");
    const double flow_norm = max_abs(lv_flow(pd, x0));
    if (flow_norm > flow_tol)
        throw std::invalid_argument("lyapunov_for_point: x0 is not a fixed point (flow norm " +
                                    std::to_string(flow_norm) + ")");
    LyapunovOutcome out;
    const VectorXd N = -pd.L() - pd.D().cwiseProduct(x0);
    const double residual = max_abs(pd.K() * N);
    const double allowed = kernel_tol * (1.0 + max_abs(pd.K()) * max_abs(N));
    if (residual > allowed) {
        out.reason = "no energy-Casimir certificate: the gradient condition requires N outside ker K "
                     "(residual " +
                     std::to_string(residual) + ")";
        return out;
    }
    const int m = pd.m();
    LyapunovCertificate cert{
        QPFunctional(pd.D(), MatrixXd::Identity(m, m), pd.L() + N),
        pd.D().cwiseQuotient(x0),
        N,
        residual,
    };
    out.certificate = std::move(cert);
    return out;
}

/// Certificate for a fixed point of the original system: reduce to the
/// Lotka-Volterra representative, build H_C there, and pull it back. The
/// result has the form H + sum_k N_k ln x_k on the original coordinates.
inline QPFunctional lyapunov_original_coordinates(const QPSystem& sys, const PoissonData& pd,
                                                  const VectorXd& x0,
                                                  double flow_tol = Tolerances{}.fixed_point,
                                                  double kernel_tol = Tolerances{}.kernel_rel) {
    const PoissonCheck chk = check_poisson_conditions(sys, pd, Tolerances{}.poisson);
    if (!chk.verdict)
        throw std::invalid_argument("lyapunov_original_coordinates: decomposition conditions fail (" +
                                    chk.summary() + ")");
    const LvReduction red = to_lotka_volterra(sys, pd);
    const VectorXd x0_lv = map_point(red.record, x0, MapDirection::Forward);
    LyapunovOutcome outcome = lyapunov_for_point(*red.pd_lv, x0_lv, flow_tol, kernel_tol);
    if (!outcome.ok()) throw std::runtime_error("lyapunov_original_coordinates: " + outcome.reason);
    return map_functional(red.record, outcome.certificate->functional, MapDirection::Inverse);
}

enum class FormClass {
    NegativeDefinite,
    NegativeSemidefinite,
    Zero,
    Indefinite,
    PositiveSemidefinite,
    PositiveDefinite,
};

inline const char* to_string(FormClass c) {
    switch (c) {
    case FormClass::NegativeDefinite: return "negative definite";
    case FormClass::NegativeSemidefinite: return "negative semidefinite";
    case FormClass::Zero: return "zero";
    case FormClass::Indefinite: return "indefinite";
    case FormClass::PositiveSemidefinite: return "positive semidefinite";
    default: return "positive definite";
    }
}

struct SymmetrizedForm {
    MatrixXd M; ///< diag(dbar) A + A^T diag(dbar)
    VectorXd eigenvalues;
    FormClass classification = FormClass::Zero;
};

/// Symmetric part of A weighted by a positive diagonal; classifies the
/// dissipativity of x' = x . (lambda + A x). Conservative systems with
/// A = K D, K skew, dbar = |D| give exactly the zero matrix.
inline SymmetrizedForm symmetrized_form(const MatrixXd& A, const VectorXd& dbar) {
    if (A.rows() != A.cols()) throw std::invalid_argument("symmetrized_form: A must be square");
    if (dbar.size() != A.rows()) throw std::invalid_argument("symmetrized_form: dimension mismatch");
    detail::require_positive(dbar, "symmetrized_form");
    SymmetrizedForm out;
    out.M = dbar.asDiagonal() * A + A.transpose() * dbar.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.M, Eigen::EigenvaluesOnly);
    out.eigenvalues = es.eigenvalues();
    const double thr = 1e-10 * max_abs(out.M);
    const bool any_pos = (out.eigenvalues.array() > thr).any();
    const bool any_neg = (out.eigenvalues.array() < -thr).any();
    const bool all_pos = (out.eigenvalues.array() > thr).all();
    const bool all_neg = (out.eigenvalues.array() < -thr).all();
    if (!any_pos && !any_neg) out.classification = FormClass::Zero;
    else if (all_pos) out.classification = FormClass::PositiveDefinite;
    else if (all_neg) out.classification = FormClass::NegativeDefinite;
    else if (any_pos && any_neg) out.classification = FormClass::Indefinite;
    else if (any_pos) out.classification = FormClass::PositiveSemidefinite;
    else out.classification = FormClass::NegativeSemidefinite;
    return out;
}

/// Classical Lotka-Volterra distance functional
/// V(x) = sum_i d_i (x_i - x0_i - x0_i ln(x_i / x0_i)),
/// encoded with its additive constant so V(x0) = 0 exactly up to roundoff.
inline QPFunctional volterra_functional(const VectorXd& x0, const VectorXd& d) {
    detail::require_positive(x0, "volterra_functional");
    detail::require_positive(d, "volterra_functional");
    if (x0.size() != d.size()) throw std::invalid_argument("volterra_functional: dimension mismatch");
    const Eigen::Index n = x0.size();
    const VectorXd logc = -d.cwiseProduct(x0);
    const double constant = (d.array() * x0.array() * (x0.array().log() - 1.0)).sum();
    return QPFunctional(d, MatrixXd::Identity(n, n), logc, constant);
}

} // namespace qpstab
