#pragma once

// Reduction pipeline between quasipolynomial representations: embedding to a
// square exponent matrix, quasimonomial changes of variables x_i = prod_k
// y_k^{Gamma_ik}, the Lotka-Volterra representative, and decoupling of
// constant auxiliary variables. Every pipeline is captured in a
// TransformRecord that maps points and functionals both ways.

#include "qpstab/system.hpp"

#include <optional>
#include <random>
#include <utility>
#include <variant>
#include <vector>

namespace qpstab {

/// Appends `added` auxiliary state variables (initialized at 1) so the
/// exponent matrix becomes square. b_prime holds their exponent columns.
struct EmbedStep {
    MatrixXd b_prime; ///< m x added block appended to B
    int added = 0;
};

/// Change of variables x_i = prod_k y_k^{gamma_ik}.
struct QmtStep {
    MatrixXd gamma;
    MatrixXd gamma_inv;
};

/// Restriction to the leading `kept` variables of a `full_dim`-dimensional
/// state; the dropped trailing variables sit at 1.
struct DecoupleStep {
    int kept = 0;
    int full_dim = 0;
};

enum class MapDirection { Forward, Inverse };

namespace detail {

inline MatrixXd checked_inverse(const MatrixXd& gamma, const char* who) {
    Eigen::FullPivLU<MatrixXd> lu(gamma);
    if (gamma.rows() != gamma.cols() || !lu.isInvertible())
        throw std::invalid_argument(std::string(who) + ": matrix must be square and invertible");
    Eigen::JacobiSVD<MatrixXd> svd(gamma);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin > 0.0 && smax / smin > Tolerances{}.condition_warn)
        warn(std::string(who) + ": transformation matrix is ill-conditioned (condition number " +
             std::to_string(smax / smin) + ")");
    return Eigen::PartialPivLU<MatrixXd>(gamma).inverse();
}

} // namespace detail

/// Ordered list of reduction steps, applied left to right in the forward
/// direction (original coordinates toward the representative).
class TransformRecord {
public:
    using Step = std::variant<EmbedStep, QmtStep, DecoupleStep>;

    void push_embed(MatrixXd b_prime) {
        EmbedStep s;
        s.added = static_cast<int>(b_prime.cols());
        s.b_prime = std::move(b_prime);
        steps_.push_back(std::move(s));
    }

    void push_qmt(MatrixXd gamma) {
        QmtStep s;
        s.gamma_inv = detail::checked_inverse(gamma, "TransformRecord::push_qmt");
        s.gamma = std::move(gamma);
        steps_.push_back(std::move(s));
    }

    /// Stores a precomputed (gamma, gamma_inv) pair, e.g. when the inverse is
    /// known exactly; the pair is sanity-checked against the identity.
    void push_qmt(MatrixXd gamma, MatrixXd gamma_inv) {
        if (gamma.rows() != gamma.cols() || gamma_inv.rows() != gamma.rows() || gamma_inv.cols() != gamma.cols())
            throw std::invalid_argument("TransformRecord::push_qmt: inconsistent pair dimensions");
        const MatrixXd residual = gamma * gamma_inv - MatrixXd::Identity(gamma.rows(), gamma.cols());
        if (max_abs(residual) > 1e-8 * (1.0 + max_abs(gamma) * max_abs(gamma_inv)))
            throw std::invalid_argument("TransformRecord::push_qmt: supplied matrices are not mutual inverses");
        steps_.push_back(QmtStep{std::move(gamma), std::move(gamma_inv)});
    }

    void push_decouple(int kept, int full_dim) {
        if (kept < 1 || kept > full_dim)
            throw std::invalid_argument("TransformRecord::push_decouple: need 1 <= kept <= full_dim");
        steps_.push_back(DecoupleStep{kept, full_dim});
    }

    const std::vector<Step>& steps() const { return steps_; }
    bool empty() const { return steps_.empty(); }
    std::size_t size() const { return steps_.size(); }

private:
    std::vector<Step> steps_;
};

/// Pushes a positive point through the record. Forward runs the recorded
/// pipeline (Embed appends ones, QMT applies the inverse-exponent map,
/// Decouple drops the trailing variables); Inverse undoes it right to left.
inline VectorXd map_point(const TransformRecord& rec, VectorXd x, MapDirection dir) {
    detail::require_positive(x, "map_point");
    const auto expect = [&](Eigen::Index want) {
        if (x.size() != want)
            throw std::invalid_argument("map_point: point has dimension " + std::to_string(x.size()) +
                                        ", step expects " + std::to_string(want));
    };
    const auto apply = [&](const TransformRecord::Step& step, bool forward) {
        if (const auto* e = std::get_if<EmbedStep>(&step)) {
            if (forward) {
                expect(e->b_prime.rows() - e->added);
                VectorXd out(e->b_prime.rows());
                out << x, VectorXd::Ones(e->added);
                x = std::move(out);
            } else {
                expect(e->b_prime.rows());
                x = x.head(e->b_prime.rows() - e->added).eval();
            }
        } else if (const auto* q = std::get_if<QmtStep>(&step)) {
            expect(q->gamma.rows());
            const MatrixXd& M = forward ? q->gamma_inv : q->gamma;
            x = (M * x.array().log().matrix()).array().exp();
        } else {
            const auto& d = std::get<DecoupleStep>(step);
            if (forward) {
                expect(d.full_dim);
                x = x.head(d.kept).eval();
            } else {
                expect(d.kept);
                VectorXd out = VectorXd::Ones(d.full_dim);
                out.head(d.kept) = x;
                x = std::move(out);
            }
        }
    };
    if (dir == MapDirection::Forward) {
        for (const auto& s : rec.steps()) apply(s, true);
    } else {
        for (auto it = rec.steps().rbegin(); it != rec.steps().rend(); ++it) apply(*it, false);
    }
    return x;
}

/// Rewrites a functional in the record's target coordinates (Forward) or back
/// in the source coordinates (Inverse). Under a QMT with matrix Gamma the
/// exponents map E -> E Gamma and the log coefficients l -> Gamma^T l; Embed
/// appends zero exponent columns; Decouple restricts by evaluating the
/// dropped variables at 1. Values are preserved across the matching point
/// map: map_functional(rec, f, Forward)(y) = f(map_point(rec, y, Inverse)).
inline QPFunctional map_functional(const TransformRecord& rec, QPFunctional f, MapDirection dir) {
    const auto expect = [&](int want) {
        if (f.dimension() != want)
            throw std::invalid_argument("map_functional: functional has dimension " +
                                        std::to_string(f.dimension()) + ", step expects " + std::to_string(want));
    };
    const auto extend = [&](int extra) {
        MatrixXd E(f.term_count(), f.dimension() + extra);
        E << f.exponents(), MatrixXd::Zero(f.term_count(), extra);
        VectorXd l(f.dimension() + extra);
        l << f.logcoeffs(), VectorXd::Zero(extra);
        f = QPFunctional(f.coeffs(), std::move(E), std::move(l), f.constant());
    };
    const auto restrict_to = [&](int kept) {
        f = QPFunctional(f.coeffs(), f.exponents().leftCols(kept), f.logcoeffs().head(kept), f.constant());
    };
    const auto substitute = [&](const MatrixXd& G) {
        f = QPFunctional(f.coeffs(), f.exponents() * G, G.transpose() * f.logcoeffs(), f.constant());
    };
    const auto apply = [&](const TransformRecord::Step& step, bool forward) {
        if (const auto* e = std::get_if<EmbedStep>(&step)) {
            const int full = static_cast<int>(e->b_prime.rows());
            if (forward) {
                expect(full - e->added);
                extend(e->added);
            } else {
                expect(full);
                restrict_to(full - e->added);
            }
        } else if (const auto* q = std::get_if<QmtStep>(&step)) {
            expect(static_cast<int>(q->gamma.rows()));
            substitute(forward ? q->gamma : q->gamma_inv);
        } else {
            const auto& d = std::get<DecoupleStep>(step);
            if (forward) {
                expect(d.full_dim);
                restrict_to(d.kept);
            } else {
                expect(d.kept);
                extend(d.full_dim - d.kept);
            }
        }
    };
    if (dir == MapDirection::Forward) {
        for (const auto& s : rec.steps()) apply(s, true);
    } else {
        for (auto it = rec.steps().rbegin(); it != rec.steps().rend(); ++it) apply(*it, false);
    }
    return f;
}

/// Expands a rectangular system (m > n) by m - n auxiliary variables so the
/// exponent matrix [B | Bprime] is square with positive determinant. The new
/// variables carry zero rates and stay at their initial value 1.
inline QPSystem embed(const QPSystem& sys, const MatrixXd& Bprime) {
    const int n = sys.n();
    const int m = sys.m();
    if (m <= n) throw std::invalid_argument("embed: system already has a square exponent matrix");
    if (Bprime.rows() != m || Bprime.cols() != m - n)
        throw std::invalid_argument("embed: Bprime must be m x (m - n)");
    MatrixXd Bt(m, m);
    Bt << sys.B(), Bprime;
    if (Bt.determinant() <= 0.0)
        throw std::invalid_argument("embed: det [B | Bprime] must be positive");
    MatrixXd At = MatrixXd::Zero(m, m);
    At.topRows(n) = sys.A();
    VectorXd lt = VectorXd::Zero(m);
    lt.head(n) = sys.lambda();
    return QPSystem(std::move(lt), std::move(At), std::move(Bt));
}

/// Block extension of a decomposition along embed: K gains zero rows and
/// columns, L gains zeros, D is unchanged.
inline PoissonData embed_poisson(const PoissonData& pd, int m) {
    const int n = pd.n();
    if (m <= n) throw std::invalid_argument("embed_poisson: target dimension must exceed n");
    MatrixXd K = MatrixXd::Zero(m, m);
    K.topLeftCorner(n, n) = pd.K();
    VectorXd L = VectorXd::Zero(m);
    L.head(n) = pd.L();
    return PoissonData(std::move(K), std::move(L), pd.D());
}

/// Completes B (m x n, full column rank) to a square matrix [B | Bprime] with
/// positive determinant. Greedy choice among standard basis columns, picking
/// the candidate of largest resulting volume; if the completed determinant
/// is negative the last column's sign is flipped. Falls back to seeded random
/// integer columns when the greedy pass stalls.
inline MatrixXd choose_embedding_columns(const MatrixXd& B, double rank_rel = Tolerances{}.rank_rel) {
    const int m = static_cast<int>(B.rows());
    const int n = static_cast<int>(B.cols());
    if (numerical_rank(B, rank_rel) < n)
        throw std::invalid_argument("choose_embedding_columns: B must have full column rank");
    if (m == n) return MatrixXd(m, 0);

    const auto volume = [](const MatrixXd& M) {
        Eigen::JacobiSVD<MatrixXd> svd(M);
        return svd.singularValues().prod();
    };
    MatrixXd cur = B;
    MatrixXd Bprime(m, m - n);
    bool stalled = false;
    for (int slot = 0; slot < m - n && !stalled; ++slot) {
        int best = -1;
        double best_vol = -1.0;
        for (int i = 0; i < m; ++i) {
            MatrixXd trial(m, cur.cols() + 1);
            trial << cur, VectorXd::Unit(m, i);
            const double vol = volume(trial);
            if (vol > best_vol * (1.0 + 1e-12)) { // first maximizer wins ties
                best_vol = vol;
                best = i;
            }
        }
        if (best < 0 || best_vol <= 0.0) {
            stalled = true;
            break;
        }
        Bprime.col(slot) = VectorXd::Unit(m, best);
        MatrixXd next(m, cur.cols() + 1);
        next << cur, Bprime.col(slot);
        cur = std::move(next);
    }
    if (!stalled) {
        MatrixXd full(m, m);
        full << B, Bprime;
        const double det = full.determinant();
        if (det > 0.0) return Bprime;
        if (det < 0.0) {
            Bprime.col(m - n - 1) *= -1.0;
            return Bprime;
        }
        stalled = true;
    }

    std::mt19937_64 rng(default_seed());
    std::uniform_int_distribution<int> entry(-2, 2);
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (int c = 0; c < m - n; ++c)
            for (int r = 0; r < m; ++r) Bprime(r, c) = static_cast<double>(entry(rng));
        MatrixXd full(m, m);
        full << B, Bprime;
        const double det = full.determinant();
        if (det == 0.0) continue;
        if (det < 0.0) Bprime.col(m - n - 1) *= -1.0;
        return Bprime;
    }
    throw std::runtime_error("choose_embedding_columns: no completion with positive determinant found");
}

/// Quasimonomial change of variables: the returned system has matrices
/// A' = Gamma^{-1} A, B' = B Gamma, lambda' = Gamma^{-1} lambda. A negative
/// determinant is accepted with a warning (the construction used by the
/// reduction pipeline always produces a positive one).
inline QPSystem apply_qmt(const QPSystem& sys, const MatrixXd& gamma) {
    if (gamma.rows() != sys.n() || gamma.cols() != sys.n())
        throw std::invalid_argument("apply_qmt: Gamma must be n x n");
    const MatrixXd ginv = detail::checked_inverse(gamma, "apply_qmt");
    if (gamma.determinant() < 0.0)
        warn("apply_qmt: det Gamma is negative (orientation-reversing change of variables)");
    return QPSystem(ginv * sys.lambda(), ginv * sys.A(), sys.B() * gamma);
}

/// Conjugation of a decomposition along a QMT: K' = Gamma^{-1} K Gamma^{-T},
/// L' = Gamma^T L, D unchanged.
inline PoissonData qmt_poisson(const PoissonData& pd, const MatrixXd& gamma, const MatrixXd& gamma_inv) {
    MatrixXd K = gamma_inv * pd.K() * gamma_inv.transpose();
    K = 0.5 * (K - K.transpose().eval()); // remove roundoff skewness defect
    return PoissonData(std::move(K), gamma.transpose() * pd.L(), pd.D());
}

struct LvReduction {
    QPSystem lv;
    TransformRecord record;
    std::optional<PoissonData> pd_lv;
};

/// Reduction to the Lotka-Volterra representative: embed when m > n so the
/// exponent matrix is square, then change variables with Gamma equal to its
/// inverse. The returned system carries B = identity exactly. A supplied
/// decomposition is transported alongside, with D copied unchanged.
inline LvReduction to_lotka_volterra(const QPSystem& sys, const std::optional<PoissonData>& pd = std::nullopt) {
    if (!sys.theorem1_eligible())
        throw std::invalid_argument("to_lotka_volterra: system needs m >= n and full-rank B");
    if (pd && (pd->n() != sys.n() || pd->m() != sys.m()))
        throw std::invalid_argument("to_lotka_volterra: decomposition dimensions do not match the system");

    if (sys.lv_form()) return LvReduction{sys, TransformRecord{}, pd};

    const int m = sys.m();
    TransformRecord rec;
    MatrixXd Bt;
    VectorXd lt;
    MatrixXd At;
    std::optional<PoissonData> pde = pd;
    if (m > sys.n()) {
        MatrixXd Bprime = choose_embedding_columns(sys.B());
        rec.push_embed(Bprime);
        const QPSystem expanded = embed(sys, Bprime);
        Bt = expanded.B();
        At = expanded.A();
        lt = expanded.lambda();
        if (pde) pde = embed_poisson(*pde, m);
    } else {
        Bt = sys.B();
        At = sys.A();
        lt = sys.lambda();
    }

    const MatrixXd gamma = Eigen::PartialPivLU<MatrixXd>(Bt).inverse(); // Gamma = B^{-1}, so B Gamma = I
    rec.push_qmt(gamma, Bt);
    QPSystem lv(Bt * lt, Bt * At, MatrixXd::Identity(m, m));

    std::optional<PoissonData> pd_lv;
    if (pde) {
        MatrixXd K = Bt * pde->K() * Bt.transpose();
        K = 0.5 * (K - K.transpose().eval());
        const VectorXd L = Bt.transpose().partialPivLu().solve(pde->L());
        pd_lv = PoissonData(std::move(K), L, pde->D());
    }
    return LvReduction{std::move(lv), std::move(rec), std::move(pd_lv)};
}

/// Restriction of an expanded system to its leading `keep` variables. Valid
/// only when the dropped variables are genuinely constant: their rates and
/// interaction rows must vanish identically.
inline QPSystem decouple(const QPSystem& sys, int keep) {
    if (keep < 1 || keep > sys.n()) throw std::invalid_argument("decouple: need 1 <= keep <= n");
    for (int i = keep; i < sys.n(); ++i)
        if (sys.lambda()(i) != 0.0 || sys.A().row(i).cwiseAbs().maxCoeff() != 0.0)
            throw std::invalid_argument("decouple: variable " + std::to_string(i + 1) +
                                        " has nonzero dynamics; not a valid embedding image");
    return QPSystem(sys.lambda().head(keep), sys.A().topRows(keep), sys.B().leftCols(keep));
}

} // namespace qpstab
