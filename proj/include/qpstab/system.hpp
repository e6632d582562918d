#pragma once

// Quasipolynomial systems x_i' = x_i (lambda_i + sum_j A_ij prod_k x_k^{B_jk})
// and their Poisson decompositions lambda = K L, A = K B^T D with K skew and
// D diagonal nonsingular. Systems admitting such a triple conserve
// H = sum_i D_ii prod_k x_k^{B_ik} + sum_j L_j ln x_j.

#include "qpstab/functional.hpp"
#include "qpstab/numeric.hpp"

#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpstab {

class QPSystem {
public:
    /// lambda is n x 1, A is n x m, B is m x n. Real (non-integer) exponents
    /// in B are supported throughout; evaluation goes through exp/log.
    QPSystem(VectorXd lambda, MatrixXd A, MatrixXd B, double rank_rel = Tolerances{}.rank_rel)
        : lambda_(std::move(lambda)), A_(std::move(A)), B_(std::move(B)) {
        n_ = static_cast<int>(lambda_.size());
        m_ = static_cast<int>(A_.cols());
        if (n_ < 1 || m_ < 1) throw std::invalid_argument("QPSystem: need n >= 1 and m >= 1");
        if (A_.rows() != n_) throw std::invalid_argument("QPSystem: A must be n x m");
        if (B_.rows() != m_ || B_.cols() != n_) throw std::invalid_argument("QPSystem: B must be m x n");
        detail::require_finite(lambda_, "QPSystem");
        detail::require_finite(A_, "QPSystem");
        detail::require_finite(B_, "QPSystem");
        rank_B_ = numerical_rank(B_, rank_rel);
        theorem1_eligible_ = (m_ >= n_) && (rank_B_ == n_);
    }

    int n() const { return n_; }
    int m() const { return m_; }
    const VectorXd& lambda() const { return lambda_; }
    const MatrixXd& A() const { return A_; }
    const MatrixXd& B() const { return B_; }
    int rank_B() const { return rank_B_; }
    bool theorem1_eligible() const { return theorem1_eligible_; }

    /// B equal to the identity (Lotka-Volterra form)?
    bool lv_form(double tol = 0.0) const {
        return m_ == n_ && max_abs(B_ - MatrixXd::Identity(m_, n_)) <= tol;
    }

    /// Quasimonomial values q_j = prod_k x_k^{B_jk}.
    VectorXd monomials(const VectorXd& x) const {
        detail::require_positive(x, "QPSystem::monomials");
        check_state(x);
        return (B_ * x.array().log().matrix()).array().exp();
    }

    /// Flow x_i' = x_i (lambda_i + (A q(x))_i).
    VectorXd flow(const VectorXd& x) const {
        detail::require_positive(x, "QPSystem::flow");
        check_state(x);
        return x.cwiseProduct(lambda_ + A_ * monomials(x));
    }

    /// Right-hand side in y = ln x coordinates: y' = lambda + A exp(B y).
    VectorXd log_flow(const VectorXd& y) const {
        check_state(y);
        return lambda_ + A_ * (B_ * y).array().exp().matrix();
    }

private:
    void check_state(const VectorXd& x) const {
        if (x.size() != n_)
            throw std::invalid_argument("QPSystem: expected a state of dimension " + std::to_string(n_));
    }

    VectorXd lambda_;
    MatrixXd A_, B_;
    int n_ = 0, m_ = 0, rank_B_ = 0;
    bool theorem1_eligible_ = false;
};

/// Decomposition triple (K, L, D). K must be skew within tolerance and every
/// diagonal entry of D nonzero. D is stored as the m-vector of its diagonal.
class PoissonData {
public:
    PoissonData(MatrixXd K, VectorXd L, VectorXd D, double skew_rel = Tolerances{}.skew_rel,
                double rank_rel = Tolerances{}.rank_rel)
        : K_(std::move(K)), L_(std::move(L)), D_(std::move(D)) {
        if (K_.rows() != K_.cols()) throw std::invalid_argument("PoissonData: K must be square");
        if (L_.size() != K_.rows()) throw std::invalid_argument("PoissonData: L must have K's dimension");
        detail::require_finite(K_, "PoissonData");
        detail::require_finite(L_, "PoissonData");
        detail::require_finite(D_, "PoissonData");
        if (!is_skew(K_, skew_rel)) {
            std::ostringstream os;
            os << "PoissonData: K is not skew-symmetric (defect " << skewness_defect(K_) << ")";
            throw std::invalid_argument(os.str());
        }
        for (Eigen::Index j = 0; j < D_.size(); ++j)
            if (D_(j) == 0.0)
                throw std::invalid_argument("PoissonData: D must have nonzero diagonal entries (entry " +
                                            std::to_string(j + 1) + " is zero)");
        rank_K_ = numerical_rank(K_, rank_rel);
    }

    int n() const { return static_cast<int>(K_.rows()); }
    int m() const { return static_cast<int>(D_.size()); }
    const MatrixXd& K() const { return K_; }
    const VectorXd& L() const { return L_; }
    const VectorXd& D() const { return D_; }
    int rank_K() const { return rank_K_; }

    VectorXd Dinv() const { return D_.cwiseInverse(); }

private:
    MatrixXd K_;
    VectorXd L_, D_;
    int rank_K_ = 0;
};

/// Quadratic structure matrix J_ij = K_ij x_i x_j, with K skew.
struct StructureMatrixSpec {
    MatrixXd K;

    explicit StructureMatrixSpec(MatrixXd k, double skew_rel = Tolerances{}.skew_rel) : K(std::move(k)) {
        if (K.rows() != K.cols()) throw std::invalid_argument("StructureMatrixSpec: K must be square");
        if (!is_skew(K, skew_rel)) throw std::invalid_argument("StructureMatrixSpec: K must be skew-symmetric");
    }

    MatrixXd J(const VectorXd& x) const {
        detail::require_positive(x, "StructureMatrixSpec::J");
        if (x.size() != K.rows()) throw std::invalid_argument("StructureMatrixSpec: dimension mismatch");
        return x.asDiagonal() * K * x.asDiagonal();
    }
};

/// Residuals of the decomposition conditions plus the verdict.
struct PoissonCheck {
    double lambda_residual = 0.0;  ///< max |lambda - K L|
    double A_residual = 0.0;       ///< max |A - K B^T D|
    double skewness = 0.0;         ///< max |K + K^T|
    bool theorem1_eligible = false;
    bool verdict = false;

    std::string summary() const {
        std::ostringstream os;
        os << "lambda residual " << lambda_residual << ", A residual " << A_residual << ", skewness defect "
           << skewness << (theorem1_eligible ? "" : "; system is not Theorem-1 eligible");
        return os.str();
    }
};

inline PoissonCheck check_poisson_conditions(const QPSystem& sys, const PoissonData& pd, double tol) {
    if (pd.n() != sys.n() || pd.m() != sys.m())
        throw std::invalid_argument("check_poisson_conditions: decomposition dimensions do not match the system");
    PoissonCheck chk;
    chk.lambda_residual = max_abs(sys.lambda() - pd.K() * pd.L());
    chk.A_residual = max_abs(sys.A() - pd.K() * sys.B().transpose() * pd.D().asDiagonal());
    chk.skewness = skewness_defect(pd.K());
    chk.theorem1_eligible = sys.theorem1_eligible();
    chk.verdict = chk.theorem1_eligible && chk.lambda_residual <= tol && chk.A_residual <= tol &&
                  chk.skewness <= tol;
    return chk;
}

/// The conserved functional of a valid decomposition: coefficients D on the
/// rows of B plus log part L. Refuses when the conditions fail.
inline QPFunctional hamiltonian_from_decomposition(const QPSystem& sys, const PoissonData& pd,
                                                   double tol = Tolerances{}.poisson) {
    const PoissonCheck chk = check_poisson_conditions(sys, pd, tol);
    if (!chk.verdict)
        throw std::invalid_argument("hamiltonian_from_decomposition: decomposition conditions fail (" +
                                    chk.summary() + ")");
    return QPFunctional(pd.D(), sys.B(), pd.L());
}

/// Result of the Lotka-Volterra inverse problem. `data` is empty when no
/// admissible triple exists; `note` says why.
struct LvRecovery {
    std::optional<PoissonData> data;
    double lambda_residual = 0.0;
    std::string note;
};

namespace detail {

/// Search a null-space basis for a combination with every component nonzero.
/// Tries single basis vectors, then +/- sign patterns, then seeded random
/// combinations. Deterministic for a fixed seed.
inline std::optional<VectorXd> nonvanishing_null_vector(const MatrixXd& basis, double rel = 1e-9) {
    const Eigen::Index n = basis.rows();
    const Eigen::Index k = basis.cols();
    if (k == 0) return std::nullopt;
    // A component identically zero across the null space cannot be fixed by
    // any combination.
    for (Eigen::Index i = 0; i < n; ++i)
        if (basis.row(i).cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
    const auto all_nonzero = [&](const VectorXd& v) {
        const double top = v.cwiseAbs().maxCoeff();
        return top > 0.0 && v.cwiseAbs().minCoeff() > rel * top;
    };
    for (Eigen::Index c = 0; c < k; ++c)
        if (all_nonzero(basis.col(c))) return VectorXd(basis.col(c));
    if (k <= 12) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (k - 1)); ++mask) {
            VectorXd v = basis.col(0);
            for (Eigen::Index c = 1; c < k; ++c)
                v += (((mask >> (c - 1)) & 1u) ? -1.0 : 1.0) * basis.col(c);
            if (all_nonzero(v)) return v;
        }
    }
    std::mt19937_64 rng(default_seed());
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
        VectorXd v = VectorXd::Zero(n);
        for (Eigen::Index c = 0; c < k; ++c) v += coef(rng) * basis.col(c);
        if (all_nonzero(v)) return v;
    }
    return std::nullopt;
}

} // namespace detail

/// Inverse problem for Lotka-Volterra systems (B = identity): find (K, L, D)
/// with K = A diag(d) skew, D = diag(1/d), and L solving lambda = K L.
///
/// The skewness requirement reduces to the homogeneous linear system
/// A_ij d_j + A_ji d_i = 0 (i <= j); a null vector with no zero component is
/// selected and normalized to max |d_j| = 1, with the sign chosen so the
/// first nonzero entry of the strict upper triangle of K is positive.
/// Any admissible triple is scale-equivalent (K -> cK, D -> D/c, L -> L/c);
/// the normalization only picks a representative.
inline LvRecovery recover_decomposition_lv(const QPSystem& sys, double tol = Tolerances{}.poisson) {
    const int n = sys.n();
    if (sys.m() != n || !sys.lv_form(tol))
        throw std::invalid_argument("recover_decomposition_lv: system must have B = identity");
    const MatrixXd& A = sys.A();

    MatrixXd constraints(n * (n + 1) / 2, n);
    constraints.setZero();
    Eigen::Index row = 0;
    for (int i = 0; i < n; ++i) {
        constraints(row++, i) = A(i, i); // K_ii = A_ii d_i must vanish
        for (int j = i + 1; j < n; ++j) {
            constraints(row, j) += A(i, j);
            constraints(row, i) += A(j, i);
            ++row;
        }
    }

    LvRecovery out;
    const MatrixXd null_basis = nullspace_basis(constraints);
    auto d_opt = detail::nonvanishing_null_vector(null_basis);
    if (!d_opt) {
        out.note = "no admissible scaling vector: the skewness system has no null vector with all components nonzero";
        return out;
    }
    VectorXd d = *d_opt;
    d /= d.cwiseAbs().maxCoeff();

    MatrixXd K = A * d.asDiagonal();
    // Canonical sign: first nonzero strict-upper-triangle entry of K positive.
    for (int i = 0; i < n; ++i) {
        bool decided = false;
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(K(i, j)) > tol) {
                if (K(i, j) < 0.0) {
                    d = -d;
                    K = -K;
                }
                decided = true;
                break;
            }
        }
        if (decided) break;
    }
    if (!is_skew(K, Tolerances{}.skew_rel)) {
        out.note = "recovered K fails the skewness tolerance";
        return out;
    }
    K = 0.5 * (K - K.transpose().eval()); // symmetrize away roundoff

    const VectorXd L = lstsq(K, sys.lambda());
    out.lambda_residual = max_abs(sys.lambda() - K * L);
    if (out.lambda_residual > tol) {
        out.note = "lambda is not in the range of the recovered K (residual " +
                   std::to_string(out.lambda_residual) + ")";
        return out;
    }
    out.data = PoissonData(std::move(K), L, d.cwiseInverse());
    out.note = "recovered; representative normalized to max |1/D_jj| = 1";
    return out;
}

} // namespace qpstab
