#pragma once

// Bundled example systems: the classical predator-prey model, its
// generalized-exponent and added-nonlinearity variants, and the
// three-species cyclic system. Each factory returns the system together with
// its decomposition triple.

#include "qpstab/system.hpp"

#include <cmath>
#include <stdexcept>

namespace qpstab {

struct ExampleSystem {
    QPSystem system;
    PoissonData poisson;
};

/// Predator-prey system x1' = x1 (a - b x2), x2' = x2 (-d + c x1) with
/// positive parameters; D = diag(-c, -b) is negative definite, so the unique
/// interior fixed point (d/c, a/b) is stable.
inline ExampleSystem make_volterra2d(double a = 1.0, double b = 1.0, double c = 1.0, double d = 1.0) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0))
        throw std::domain_error("make_volterra2d: parameters must be positive");
    VectorXd lambda(2);
    lambda << a, -d;
    MatrixXd A(2, 2);
    A << 0.0, -b, c, 0.0;
    MatrixXd K(2, 2);
    K << 0.0, 1.0, -1.0, 0.0;
    VectorXd L(2);
    L << d, a;
    VectorXd D(2);
    D << -c, -b;
    return ExampleSystem{QPSystem(lambda, A, MatrixXd::Identity(2, 2)), PoissonData(K, L, D)};
}

/// Generalized predator-prey flow with monomials x1^alpha x2^beta and
/// x1^gamma x2^delta:
///   x1' = x1 (a - beta c x1^alpha x2^beta - delta b x1^gamma x2^delta)
///   x2' = x2 (-d + alpha c x1^alpha x2^beta + gamma b x1^gamma x2^delta)
/// The exponent matrix must satisfy alpha delta - beta gamma > 0; D keeps
/// the diag(-c, -b) form, so any interior fixed point is stable.
inline ExampleSystem make_example2(double alpha, double beta, double gamma, double delta, double a = 1.0,
                                   double b = 1.0, double c = 1.0, double d = 1.0) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0))
        throw std::domain_error("make_example2: a, b, c, d must be positive");
    if (!(alpha * delta - beta * gamma > 0.0))
        throw std::invalid_argument("make_example2: need alpha*delta - beta*gamma > 0");
    VectorXd lambda(2);
    lambda << a, -d;
    MatrixXd A(2, 2);
    A << -beta * c, -delta * b, alpha * c, gamma * b;
    MatrixXd B(2, 2);
    B << alpha, beta, gamma, delta;
    MatrixXd K(2, 2);
    K << 0.0, 1.0, -1.0, 0.0;
    VectorXd L(2);
    L << d, a;
    VectorXd D(2);
    D << -c, -b;
    return ExampleSystem{QPSystem(lambda, A, B), PoissonData(K, L, D)};
}

/// Predator-prey flow with two extra nonlinear conservative terms
/// sigma1 x1^alpha and sigma2 x2^beta in the invariant:
///   x1' = x1 (a - b x2 + beta sigma2 x2^beta)
///   x2' = x2 (-d + c x1 - alpha sigma1 x1^alpha)
/// Four monomials over two states; D = diag(-c, -b, sigma1, sigma2) is
/// negative definite when both sigmas are negative.
inline ExampleSystem make_example3(double sigma1, double sigma2, double alpha, double beta, double a = 1.0,
                                   double b = 1.0, double c = 1.0, double d = 1.0) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0))
        throw std::domain_error("make_example3: a, b, c, d must be positive");
    if (!(alpha > 0.0 && beta > 0.0) || alpha == 1.0 || beta == 1.0)
        throw std::invalid_argument("make_example3: alpha and beta must be positive and different from 1");
    if (sigma1 == 0.0 || sigma2 == 0.0)
        throw std::invalid_argument("make_example3: sigma1 and sigma2 must be nonzero");
    VectorXd lambda(2);
    lambda << a, -d;
    MatrixXd A(2, 4);
    A << 0.0, -b, 0.0, beta * sigma2, c, 0.0, -alpha * sigma1, 0.0;
    MatrixXd B(4, 2);
    B << 1.0, 0.0, 0.0, 1.0, alpha, 0.0, 0.0, beta;
    MatrixXd K(2, 2);
    K << 0.0, 1.0, -1.0, 0.0;
    VectorXd L(2);
    L << d, a;
    VectorXd D(4);
    D << -c, -b, sigma1, sigma2;
    return ExampleSystem{QPSystem(lambda, A, B), PoissonData(K, L, D)};
}

/// Three-species cyclic system
///   x1' = x1 (rho + c x2 + x3)
///   x2' = x2 (mu + x1 + a x3)
///   x3' = x3 (nu + b x1 + x2)
/// with nu = mu b - rho a b; conservative exactly when a b c = -1. Stable
/// family for a, b, c all negative, where D = diag(ab, 1, -a) is positive
/// definite.
inline ExampleSystem make_nutku(double a, double b, double c, double rho = 1.0, double mu = 1.0) {
    if (std::abs(a * b * c + 1.0) > 1e-9)
        throw std::invalid_argument("make_nutku: parameters must satisfy a*b*c = -1");
    const double nu = mu * b - rho * a * b;
    VectorXd lambda(3);
    lambda << rho, mu, nu;
    MatrixXd A(3, 3);
    A << 0.0, c, 1.0, 1.0, 0.0, a, b, 1.0, 0.0;
    MatrixXd K(3, 3);
    K << 0.0, c, b * c, -c, 0.0, -1.0, -b * c, 1.0, 0.0;
    VectorXd L(3);
    L << 0.0, nu, -mu;
    VectorXd D(3);
    D << a * b, 1.0, -a;
    return ExampleSystem{QPSystem(lambda, A, MatrixXd::Identity(3, 3)), PoissonData(K, L, D)};
}

} // namespace qpstab
