#pragma once

// Shared numerical utilities: tolerance policy, rank/null-space helpers and
// the deterministic RNG used by randomized fallbacks.

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>

namespace qpstab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Central tolerance block. Every report echoes the values it was run with.
struct Tolerances {
    double rank_rel = 1e-10;      ///< singular values below rank_rel * sigma_max count as zero
    double skew_rel = 1e-12;      ///< ||K + K^T||_max <= skew_rel * (1 + ||K||_max)
    double poisson = 1e-9;        ///< acceptance for decomposition residuals
    double kernel_rel = 1e-9;     ///< ||K N|| <= kernel_rel * (1 + ||K|| * ||N||)
    double fixed_point = 1e-9;    ///< ||flow|| at candidate fixed points
    double definite_zero = 1e-12; ///< |entry| below this is "zero" in diagonal sign checks
    double condition_warn = 1e12; ///< QMT inverse condition-number warning threshold
};

inline double max_abs(const MatrixXd& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

/// ||K + K^T||_max; zero for an exactly skew-symmetric matrix.
inline double skewness_defect(const MatrixXd& K) {
    return max_abs(K + K.transpose());
}

inline bool is_skew(const MatrixXd& K, double skew_rel = Tolerances{}.skew_rel) {
    return skewness_defect(K) <= skew_rel * (1.0 + max_abs(K));
}

/// Numerical rank: singular values <= rel_tol * sigma_max count as zero.
inline int numerical_rank(const MatrixXd& M, double rel_tol = Tolerances{}.rank_rel) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cut = rel_tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return r;
}

/// Orthonormal basis of the numerical null space, as matrix columns.
/// Deterministic sign: the largest-magnitude component of each column
/// (lowest index on ties) is made positive.
inline MatrixXd nullspace_basis(const MatrixXd& M, double rel_tol = Tolerances{}.rank_rel) {
    const Eigen::Index n = M.cols();
    if (M.rows() == 0 || n == 0) return MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double cut = rel_tol * smax;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut && smax > 0.0) ++rank;
    MatrixXd basis = svd.matrixV().rightCols(n - rank);
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index imax = 0;
        basis.col(c).cwiseAbs().maxCoeff(&imax);
        if (basis(imax, c) < 0.0) basis.col(c) = -basis.col(c);
    }
    return basis;
}

/// Minimum-norm least-squares solve via SVD.
inline VectorXd lstsq(const MatrixXd& M, const VectorXd& b) {
    return M.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
}

/// Seed for randomized fallbacks; QPP_STAB_SEED overrides the default.
inline std::uint64_t default_seed() {
    if (const char* env = std::getenv("QPP_STAB_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env) return static_cast<std::uint64_t>(v);
    }
    return 20977u;
}

inline std::atomic<bool>& warnings_enabled() {
    static std::atomic<bool> enabled{true};
    return enabled;
}

/// Non-fatal diagnostics (orientation flips, ill-conditioned inverses).
inline void warn(const std::string& message) {
    if (warnings_enabled().load()) std::cerr << "[qpstab] warning: " << message << "\n";
}

} // namespace qpstab
