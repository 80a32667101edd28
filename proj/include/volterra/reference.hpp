#pragma once

#include "volterra/fem1d.hpp"
#include "volterra/noise.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace volterra {

/// Arguments at or below this use the Taylor series.
inline constexpr double kMittagLefflerSwitch = 8.0;

/**
 * E_rho(-x) for 1 < rho < 2 and x >= 0.
 *
 * x <= kMittagLefflerSwitch: Taylor series summed smallest-term-first in
 * long double. Beyond it: the pole pair plus the algebraic asymptotic
 * series when its optimal truncation reaches 1e-15, otherwise the pole
 * pair plus the exact Hankel-cut integral.
 */
double mittag_leffler(double rho, double x);

/// Taylor branch alone: sum_m (-x)^m / Gamma(rho m + 1).
double mittag_leffler_taylor(double rho, double x);

/// Pole pair (2/rho) e^{x^{1/rho} cos(pi/rho)} cos(x^{1/rho} sin(pi/rho))
/// plus the real integral along the branch cut; exact for every x > 0.
double mittag_leffler_integral(double rho, double x);

struct AsymptoticValue {
    double value;
    double error_estimate; ///< magnitude of the first omitted term
    int terms;
};

/// Pole pair plus -sum_{m>=1} (-x)^{-m} / Gamma(1 - rho m), truncated at
/// the smallest term; terms at poles of Gamma(1 - rho m) vanish.
AsymptoticValue mittag_leffler_asymptotic(double rho, double x);

/// Scalar resolvent s(t) = E_rho(-lambda t^rho), the action of S(t) on mode lambda.
double resolvent_mode(double rho, double lambda, double t);

/// Coefficients of an element of L2(0, L) in the sine basis e_1, e_2, ...
struct SpectralVector {
    double length = 1.0;
    std::vector<double> coeffs;

    std::size_t size() const noexcept { return coeffs.size(); }
    double norm() const;
};

/// S(t) x0 computed mode by mode.
SpectralVector exact_solution_action(double rho, const SpectralVector& x0, double t);

/**
 * I(lambda) = int_0^T E_rho(-lambda s^rho)^2 ds for a batch of lambdas.
 * Uses I = lambda^{-1/rho} F(T lambda^{1/rho}) with F accumulated once over
 * the sorted scaled horizons. Throws NumericalError if abs_tol is not met.
 */
std::vector<double> squared_resolvent_integrals(double rho, double T, std::span<const double> lambdas,
                                                double abs_tol = 1e-10);

/// int_0^infinity E_rho(-u^rho)^2 du.
double squared_resolvent_integral_infinity(double rho, double abs_tol = 1e-12);

struct SecondMomentOptions {
    double tolerance = 1e-10;
    /// Explicit noise modes; 0 selects the covariance truncation for custom
    /// models and 4096 otherwise.
    std::size_t modes = 0;
    /// Add the modes beyond `modes` for identity / inverse-power models using
    /// int_0^T E^2 ~ lambda^{-1/rho} F(infinity) and Euler-Maclaurin.
    bool include_tail = true;
};

struct SecondMoment {
    double value = 0.0;         ///< E ||X(T)||^2
    double deterministic = 0.0; ///< ||S(T) x0||^2
    double noise = 0.0;         ///< explicitly summed noise modes
    double tail = 0.0;          ///< analytic estimate for modes beyond `modes`
    double tail_uncertainty = 0.0;
    std::size_t modes = 0;
};

/// E ||X(T)||^2 = ||S(T) x0||^2 + sum_j q_j int_0^T E_rho(-lambda_j s^rho)^2 ds.
SecondMoment exact_second_moment(double rho, const SpectralVector& x0, const CovarianceSpec& cov,
                                 double T, const SecondMomentOptions& options = {});

/// max over the grid of lambda^{nu/2} |E_rho(-lambda t^rho)| t^{rho nu / 2}.
double smoothing_envelope(double rho, double nu, double t, std::span<const double> lambda_grid);

// Space-discrete, time-continuous solution u_h' + int b(t-s) A_h u_h = dW_h,
// evaluated in the (stiffness, mass) eigenbasis. This is the dt -> 0 limit
// of the fully discrete scheme and isolates spatial errors.

/// S_h(t) applied to FEM coefficients x.
std::vector<double> semidiscrete_solution(const FemOperators& ops, const GeneralizedEigenbasis& basis,
                                          double rho, std::span<const double> x, double t);

/// E ||X_h(T)||^2 with initial coefficients x0 and noise P_h W restricted to
/// the covariance truncation.
double semidiscrete_second_moment(const FemOperators& ops, const GeneralizedEigenbasis& basis,
                                  double rho, std::span<const double> x0, const CovarianceSpec& cov,
                                  double T, double tolerance = 1e-10);

} // namespace volterra
