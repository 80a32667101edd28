#pragma once

#include "volterra/config.hpp"
#include "volterra/fem1d.hpp"
#include "volterra/kernel_cq.hpp"
#include "volterra/noise.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace volterra {

struct ConvergenceRow {
    double h = 0.0;
    /// 0 for time-continuous (semidiscrete) rows.
    double dt = 0.0;
    /// 0 for time-continuous (semidiscrete) rows.
    std::size_t N = 0;
    double error = 0.0;
    /// Monte Carlo standard error of `error`; 0 for exact estimators.
    double std_error = 0.0;
    /// ln(T / (h^{2/rho} + dt)).
    double log_factor = 0.0;
};

enum class SlopeVariable { automatic, dt, h };

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// ln(error) minus the fitted line, one entry per fitted row.
    std::vector<double> residuals;
};

/**
 * Least-squares slope of ln(error) (or ln(error / log_factor) when
 * log_correct is set) against ln(dt) or ln(h). `automatic` picks dt when
 * the rows have distinct positive time steps and h otherwise.
 */
SlopeFit fit_slope(std::span<const ConvergenceRow> rows, bool log_correct,
                   SlopeVariable variable = SlopeVariable::automatic);

struct ConvergenceReport {
    std::string experiment;
    LadderKind ladder = LadderKind::time;
    std::vector<ConvergenceRow> rows;
    /// Leading rows excluded from the fits.
    std::size_t drop_coarse = 0;
    SlopeFit raw;
    SlopeFit log_corrected;
    std::vector<std::pair<std::string, std::string>> metadata;

    double slope_raw() const noexcept { return raw.slope; }
    double slope_log_corrected() const noexcept { return log_corrected.slope; }
    /// Refits both slopes after excluding the first k rows.
    void refit(std::size_t k);
};

/// CSV with header h,dt,N,error,stderr,log_factor, 17 significant digits, LF endings.
std::string to_csv(const ConvergenceReport& report);
void write_csv(const ConvergenceReport& report, const std::string& path);
/// Metadata, slopes and per-row residuals as a JSON document.
std::string to_json(const ConvergenceReport& report);

/// FNV-1a hash of the canonical config text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Error in the M-norm between X_h^N (or S_h(T) P_h X_0 on space ladders)
/// and the nodal interpolant of S(T) X_0.
ConvergenceReport deterministic_convergence(const ExperimentConfig& config);

/// |E ||X_h^N||^2 - E ||X(T)||^2| with both moments computed exactly.
/// Throws InadmissibleNoise when nu_max leaves no positive rate.
ConvergenceReport weak_convergence_exact(const ExperimentConfig& config);

/// |E phi(X_row) - E phi(X_ref)| by Monte Carlo over coupled paths, where
/// X_ref is a reference_factor times finer solution driven by the same noise.
ConvergenceReport weak_convergence_mc(const ExperimentConfig& config);

/// Dispatches on config.estimator.
ConvergenceReport weak_convergence(const ExperimentConfig& config);

/// (E ||X_row - X_ref||^2)^{1/2} over coupled paths.
ConvergenceReport strong_convergence_mc(const ExperimentConfig& config);

struct FunctionalInfo {
    Functional id;
    std::string name;
    /// Conditions phi satisfies: "bounded_d2" (D^2 phi bounded) and/or "bounded_d1" (D phi bounded).
    std::string conditions;
    std::string description;
};

const std::vector<FunctionalInfo>& functional_registry();

/// phi(X_h) for FEM coefficients x; linear_sq uses g = e_mode.
double evaluate_functional(Functional functional, const FemOperators& ops, std::span<const double> x,
                           std::size_t mode);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
};

/// Plain Monte Carlo estimate of E phi(X_h^N) for one (h, dt).
MonteCarloEstimate mc_functional(const FemOperators& ops, CqWeightsPtr weights, std::span<const double> x0,
                                 const CovarianceSpec& cov, std::size_t N, Functional functional,
                                 std::size_t functional_mode, std::size_t paths, std::uint64_t seed,
                                 std::size_t threads);

/// FEM coefficients of P_h X_0 for sine coefficients c.
std::vector<double> project_initial(const FemOperators& ops, std::span<const double> c);

/// Named configurations for the regimes of the weak-rate examples:
/// white noise, trace-class noise, intermediate A^{-1/4} noise, smooth
/// deterministic data and the strong-rate study.
std::vector<std::pair<std::string, ExperimentConfig>> presets();
ExperimentConfig preset(const std::string& name);

} // namespace volterra
