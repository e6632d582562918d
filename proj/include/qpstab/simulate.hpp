#pragma once

// Numerical verification layer: fixed-step RK4 integration in y = ln x
// (positivity is structural), drift monitoring of conserved functionals,
// linearization and spectra at fixed points, and the small-oscillation
// analysis of two-dimensional conservative systems (frequency, principal
// axes, predator-prey phase shift).

#include "qpstab/stability.hpp"
#include "qpstab/system.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qpstab {

struct Trajectory {
    std::vector<double> times;
    std::vector<VectorXd> states; ///< strictly positive samples
    double step = 0.0;            ///< nominal step size

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
};

/// Thrown when the integration blows up; carries the valid prefix.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, Trajectory partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}

    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

/// Classical RK4 on y' = lambda + A exp(B y), sampled every step; the final
/// time is the first multiple of `step` at or past t_end. States leaving the
/// representable positive orthant (|ln x| > 700) raise divergence_error.
inline Trajectory integrate(const QPSystem& sys, const VectorXd& x0, double t_end,
                            double step = 1e-3) {
    detail::require_positive(x0, "integrate");
    if (x0.size() != sys.n()) throw std::invalid_argument("integrate: state dimension mismatch");
    if (!(step > 0.0)) throw std::invalid_argument("integrate: step must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");

    const auto rhs = [&sys](const VectorXd& y) { return sys.log_flow(y); };
    const std::size_t count = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));

    Trajectory traj;
    traj.step = step;
    traj.times.reserve(count + 1);
    traj.states.reserve(count + 1);
    VectorXd y = x0.array().log();
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    for (std::size_t k = 1; k <= count; ++k) {
        const VectorXd k1 = rhs(y);
        const VectorXd k2 = rhs(y + 0.5 * step * k1);
        const VectorXd k3 = rhs(y + 0.5 * step * k2);
        const VectorXd k4 = rhs(y + step * k3);
        y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > 700.0)
            throw divergence_error("integrate: trajectory left the representable positive orthant at t = " +
                                       std::to_string(static_cast<double>(k) * step),
                                   std::move(traj));
        traj.times.push_back(static_cast<double>(k) * step);
        traj.states.push_back(y.array().exp());
    }
    return traj;
}

struct Drift {
    double max_abs = 0.0;  ///< max_t |f(x(t)) - f(x(0))|
    double relative = 0.0; ///< max_abs / |f(x(0))| (absolute when f(x(0)) = 0)
};

inline Drift functional_drift(const Trajectory& traj, const QPFunctional& f) {
    if (traj.empty()) throw std::invalid_argument("functional_drift: empty trajectory");
    const double f0 = f.value(traj.states.front());
    Drift d;
    for (const auto& x : traj.states) d.max_abs = std::max(d.max_abs, std::abs(f.value(x) - f0));
    d.relative = d.max_abs / (std::abs(f0) > 0.0 ? std::abs(f0) : 1.0);
    return d;
}

/// Derivative matrix of the flow at x:
/// d(x_i')/dx_l = delta_il (lambda_i + (A q)_i) + x_i sum_j A_ij q_j B_jl / x_l.
inline MatrixXd jacobian(const QPSystem& sys, const VectorXd& x) {
    detail::require_positive(x, "jacobian");
    const VectorXd q = sys.monomials(x);
    MatrixXd J = (sys.lambda() + sys.A() * q).asDiagonal();
    J += x.asDiagonal() * sys.A() * q.asDiagonal() * sys.B() * x.cwiseInverse().asDiagonal();
    return J;
}

/// Eigenvalues of the linearization at a fixed point.
inline Eigen::VectorXcd spectrum_at(const QPSystem& sys, const VectorXd& x0,
                                    double tol = Tolerances{}.fixed_point) {
    const double flow_norm = max_abs(sys.flow(x0));
    if (flow_norm > tol)
        throw std::invalid_argument("spectrum_at: x0 is not a fixed point (flow norm " +
                                    std::to_string(flow_norm) + ")");
    return Eigen::EigenSolver<MatrixXd>(jacobian(sys, x0), false).eigenvalues();
}

/// Quadratic normal form of a two-dimensional conservative system near a
/// stable fixed point, in the notation of the small-oscillation expansion:
/// H(y) ~ mu1 eta1^2 + mu2 eta2^2 + 2 mu eta1 eta2 after centering,
/// diagonalized by a rotation of angle phi into lambda1, lambda2.
struct OscillationAnalysis {
    double mu1 = 0.0, mu2 = 0.0, mu = 0.0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double phi = 0.0;   ///< principal-axis rotation angle
    double rho = 0.0;   ///< sqrt(lambda1 / lambda2)
    double omega = 0.0; ///< angular frequency 2|k| sqrt(lambda1 lambda2)
    double Phi = 0.0;   ///< phase shift between the two components
};

/// Phase shift between the two components of the small oscillation:
/// pi/2 + arctan(rho tan phi) - arctan(tan phi / rho).
inline double phase_shift(double rho, double phi) {
    if (!(rho > 0.0)) throw std::domain_error("phase_shift: rho must be positive");
    if (!(std::abs(phi) < std::numbers::pi / 2.0))
        throw std::domain_error("phase_shift: phi must lie strictly inside (-pi/2, pi/2)");
    const double t = std::tan(phi);
    return std::numbers::pi / 2.0 + std::atan(rho * t) - std::atan(t / rho);
}

/// Small-oscillation data at a stable fixed point of a planar conservative
/// system with invertible K. Half the log-coordinate Hessian of H supplies
/// (mu1, mu2, mu); the rotated eigenvalues must share a sign (a center),
/// otherwise the point is not oscillatory and the analysis refuses.
///
/// The frequency follows from y' = K grad Hhat(y) with quadratic Hhat: with
/// K = [[0, k], [-k, 0]] the linearized motion is a rotation of angular
/// velocity 2|k| sqrt(lambda1 lambda2).
inline OscillationAnalysis oscillation_analysis(const QPSystem& sys, const PoissonData& pd,
                                                const VectorXd& x0,
                                                double tol = Tolerances{}.fixed_point) {
    if (sys.n() != 2 || sys.m() != 2)
        throw std::invalid_argument("oscillation_analysis: requires n = m = 2");
    if (pd.rank_K() != 2)
        throw std::invalid_argument("oscillation_analysis: requires invertible K (no Casimir directions)");
    const double flow_norm = max_abs(sys.flow(x0));
    if (flow_norm > tol)
        throw std::invalid_argument("oscillation_analysis: x0 is not a fixed point (flow norm " +
                                    std::to_string(flow_norm) + ")");
    if (theorem2_verdict(pd).verdict != Verdict::StableByTheorem2)
        throw std::invalid_argument("oscillation_analysis: D is not definite; no stability certificate");

    const QPFunctional H = hamiltonian_from_decomposition(sys, pd);
    const MatrixXd Hy = H.log_hessian(x0.array().log());

    OscillationAnalysis osc;
    osc.mu1 = 0.5 * Hy(0, 0);
    osc.mu2 = 0.5 * Hy(1, 1);
    osc.mu = 0.5 * Hy(0, 1);

    // When mu1 and mu2 agree (to roundoff) the rotation is +-45 degrees and
    // the sign of the numerator must decide; the raw difference would pick a
    // branch from its last ulp. Either branch yields the same Phi, since
    // (rho, phi) and (1/rho, -phi) describe the same ellipse.
    const double scale = std::max({std::abs(osc.mu1), std::abs(osc.mu2), std::abs(osc.mu)});
    if (std::abs(osc.mu1 - osc.mu2) <= 1e-12 * scale) {
        osc.phi = (osc.mu == 0.0) ? 0.0 : std::copysign(std::numbers::pi / 4.0, osc.mu);
    } else {
        osc.phi = 0.5 * std::atan(2.0 * osc.mu / (osc.mu1 - osc.mu2));
    }
    const double c = std::cos(osc.phi);
    const double s = std::sin(osc.phi);
    osc.lambda1 = c * c * osc.mu1 + s * s * osc.mu2 + 2.0 * osc.mu * s * c;
    osc.lambda2 = s * s * osc.mu1 + c * c * osc.mu2 - 2.0 * osc.mu * s * c;
    if (!(osc.lambda1 * osc.lambda2 > 0.0))
        throw std::domain_error("oscillation_analysis: indefinite quadratic form; the point is not a center");
    osc.rho = std::sqrt(osc.lambda1 / osc.lambda2);
    osc.omega = 2.0 * std::abs(pd.K()(0, 1)) * std::sqrt(osc.lambda1 * osc.lambda2);
    osc.Phi = phase_shift(osc.rho, osc.phi);
    return osc;
}

struct PeriodPhase {
    double period = 0.0;
    double phase_lag = 0.0; ///< radians by which component 2 peaks after component 1
};

namespace detail {

/// Strict local maxima of one component, refined by fitting a parabola
/// through the three samples around each peak.
inline std::vector<double> refined_maxima(const Trajectory& traj, int component) {
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        const double fm = traj.states[i - 1](component);
        const double f0 = traj.states[i](component);
        const double fp = traj.states[i + 1](component);
        if (!(f0 > fm && f0 > fp)) continue;
        const double denom = fm - 2.0 * f0 + fp;
        const double offset = (denom < 0.0) ? 0.5 * (fm - fp) / denom : 0.0;
        const double h = traj.times[i + 1] - traj.times[i];
        peaks.push_back(traj.times[i] + offset * h);
    }
    return peaks;
}

} // namespace detail

/// Empirical period of component 1 plus the phase by which component 2 lags
/// it. Refuses (empty optional) unless both components show at least three
/// maxima.
inline std::optional<PeriodPhase> measure_period_and_phase(const Trajectory& traj) {
    if (traj.empty() || traj.states.front().size() < 2) return std::nullopt;
    const std::vector<double> p1 = detail::refined_maxima(traj, 0);
    const std::vector<double> p2 = detail::refined_maxima(traj, 1);
    if (p1.size() < 3 || p2.size() < 3) return std::nullopt;

    double gap_sum = 0.0;
    for (std::size_t i = 1; i < p1.size(); ++i) gap_sum += p1[i] - p1[i - 1];
    const double period = gap_sum / static_cast<double>(p1.size() - 1);
    if (!(period > 0.0)) return std::nullopt;

    double offset_sum = 0.0;
    std::size_t matched = 0;
    std::size_t j = 0;
    for (const double t1 : p1) {
        while (j < p2.size() && p2[j] < t1) ++j;
        if (j == p2.size()) break;
        offset_sum += p2[j] - t1;
        ++matched;
    }
    if (matched == 0) return std::nullopt;
    return PeriodPhase{period, 2.0 * std::numbers::pi * (offset_sum / static_cast<double>(matched)) / period};
}

} // namespace qpstab
