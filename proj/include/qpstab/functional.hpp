#pragma once

// Quasipolynomial functionals: finite sums of real-exponent monomials plus a
// logarithmic part, f(x) = sum_i c_i prod_k x_k^{E_ik} + sum_j l_j ln x_j + const.
// This one shape carries Hamiltonians, Casimir invariants, energy-Casimir
// certificates and the classical Volterra functional.

#include "qpstab/numeric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpstab {

namespace detail {

inline void require_positive(const VectorXd& x, const char* who) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!(x(i) > 0.0))
            throw std::domain_error(std::string(who) + ": state must lie in the open positive orthant (component " +
                                    std::to_string(i + 1) + " = " + std::to_string(x(i)) + ")");
}

inline void require_finite(const MatrixXd& M, const char* who) {
    if (!M.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

} // namespace detail

class QPFunctional {
public:
    /// p monomial terms over n variables plus one log coefficient per variable.
    QPFunctional(VectorXd coeffs, MatrixXd exponents, VectorXd logcoeffs, double constant = 0.0)
        : coeffs_(std::move(coeffs)), exponents_(std::move(exponents)),
          logcoeffs_(std::move(logcoeffs)), constant_(constant) {
        if (exponents_.rows() != coeffs_.size())
            throw std::invalid_argument("QPFunctional: one exponent row per coefficient required");
        if (coeffs_.size() > 0 && exponents_.cols() != logcoeffs_.size())
            throw std::invalid_argument("QPFunctional: exponent columns must match log-coefficient count");
        detail::require_finite(coeffs_, "QPFunctional");
        detail::require_finite(exponents_, "QPFunctional");
        detail::require_finite(logcoeffs_, "QPFunctional");
        if (!std::isfinite(constant_)) throw std::invalid_argument("QPFunctional: non-finite constant");
    }

    /// Purely logarithmic functional sum_j l_j ln x_j (Casimir shape).
    static QPFunctional logs_only(VectorXd logcoeffs) {
        const auto n = logcoeffs.size();
        return QPFunctional(VectorXd::Zero(0), MatrixXd::Zero(0, n), std::move(logcoeffs));
    }

    int dimension() const { return static_cast<int>(logcoeffs_.size()); }
    int term_count() const { return static_cast<int>(coeffs_.size()); }

    const VectorXd& coeffs() const { return coeffs_; }
    const MatrixXd& exponents() const { return exponents_; }
    const VectorXd& logcoeffs() const { return logcoeffs_; }
    double constant() const { return constant_; }

    /// Monomial values prod_k x_k^{E_ik}, computed as exp(E ln x).
    VectorXd monomials(const VectorXd& x) const {
        detail::require_positive(x, "QPFunctional::monomials");
        check_dim(x);
        return (exponents_ * x.array().log().matrix()).array().exp();
    }

    double value(const VectorXd& x) const {
        detail::require_positive(x, "QPFunctional::value");
        check_dim(x);
        double v = constant_ + logcoeffs_.dot(x.array().log().matrix());
        if (coeffs_.size() > 0) v += coeffs_.dot(monomials(x));
        return v;
    }

    /// Gradient component j: sum_i c_i E_ij x_j^{-1} prod_k x_k^{E_ik} + l_j / x_j.
    VectorXd gradient(const VectorXd& x) const {
        detail::require_positive(x, "QPFunctional::gradient");
        check_dim(x);
        VectorXd g = logcoeffs_.cwiseQuotient(x);
        if (coeffs_.size() > 0) {
            const VectorXd mono = monomials(x);
            g += (exponents_.transpose() * coeffs_.cwiseProduct(mono)).cwiseQuotient(x);
        }
        return g;
    }

    MatrixXd hessian(const VectorXd& x) const {
        detail::require_positive(x, "QPFunctional::hessian");
        check_dim(x);
        const Eigen::Index n = x.size();
        MatrixXd h = MatrixXd::Zero(n, n);
        h.diagonal() -= logcoeffs_.cwiseQuotient(x.cwiseProduct(x));
        if (coeffs_.size() > 0) {
            const VectorXd w = coeffs_.cwiseProduct(monomials(x));
            // sum_i w_i E_ij (E_il - delta_jl) / (x_j x_l)
            MatrixXd outer = exponents_.transpose() * w.asDiagonal() * exponents_;
            outer.diagonal() -= exponents_.transpose() * w;
            h += x.cwiseInverse().asDiagonal() * outer * x.cwiseInverse().asDiagonal();
        }
        return h;
    }

    /// f(exp(y)): the same functional read in logarithmic coordinates.
    double log_value(const VectorXd& y) const {
        if (y.size() != logcoeffs_.size())
            throw std::invalid_argument("QPFunctional::log_value: dimension mismatch");
        double v = constant_ + logcoeffs_.dot(y);
        if (coeffs_.size() > 0) v += coeffs_.dot((exponents_ * y).array().exp().matrix());
        return v;
    }

    /// Hessian of f(exp(y)) in y; log terms drop out, monomials contribute
    /// sum_i c_i E_i E_i^T exp(E_i y).
    MatrixXd log_hessian(const VectorXd& y) const {
        if (y.size() != logcoeffs_.size())
            throw std::invalid_argument("QPFunctional::log_hessian: dimension mismatch");
        const Eigen::Index n = y.size();
        if (coeffs_.size() == 0) return MatrixXd::Zero(n, n);
        const VectorXd w = coeffs_.cwiseProduct((exponents_ * y).array().exp().matrix());
        return exponents_.transpose() * w.asDiagonal() * exponents_;
    }

    /// f plus an extra log part (energy-Casimir composition H + kappa C).
    QPFunctional with_logs_added(const VectorXd& extra, double scale = 1.0) const {
        if (extra.size() != logcoeffs_.size())
            throw std::invalid_argument("QPFunctional::with_logs_added: dimension mismatch");
        return QPFunctional(coeffs_, exponents_, logcoeffs_ + scale * extra, constant_);
    }

private:
    void check_dim(const VectorXd& x) const {
        if (x.size() != logcoeffs_.size())
            throw std::invalid_argument("QPFunctional: expected a vector of dimension " +
                                        std::to_string(logcoeffs_.size()) + ", got " + std::to_string(x.size()));
    }

    VectorXd coeffs_;
    MatrixXd exponents_;
    VectorXd logcoeffs_;
    double constant_ = 0.0;
};

} // namespace qpstab
