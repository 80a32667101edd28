#pragma once

#include "volterra/kernel_cq.hpp"
#include "volterra/noise.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace volterra {

enum class NoiseModel { none, identity, inverse_power, custom };
enum class LadderKind { time, space };
enum class EstimatorKind { exact_cov, monte_carlo };
enum class Functional { norm_sq, exp_neg_norm_sq, linear_sq };

/**
 * One convergence study. Time ladders refine dt = T / N over `steps` on the
 * finest mesh in `elements`; space ladders refine h = L / n_elem over
 * `elements` (with `steps` giving the fixed N where a time grid is needed).
 */
struct ExperimentConfig {
    // [kernel]
    KernelVariant variant = KernelVariant::riesz;
    double rho = 1.5;
    double eta = 0.0;

    // [domain]
    double length = 1.0;
    double horizon = 1.0;
    /// Sine coefficients of X_0; empty means X_0 = 0.
    std::vector<double> initial;

    // [noise]
    NoiseModel noise = NoiseModel::none;
    double alpha = 0.0;
    /// Number of noise modes J; 0 selects n_dof of the finest mesh.
    std::size_t truncation = 0;
    std::vector<double> custom_q;

    // [ladder]
    LadderKind ladder = LadderKind::time;
    std::vector<std::size_t> steps;
    std::vector<std::size_t> elements;

    // [estimator]
    EstimatorKind estimator = EstimatorKind::exact_cov;
    std::size_t paths = 1000;
    Functional functional = Functional::norm_sq;
    /// Mode j of g = e_j for linear_sq.
    std::size_t functional_mode = 1;
    std::uint64_t seed = 20240601;
    /// Refinement factor of self-referenced solutions relative to the finest row.
    std::size_t reference_factor = 4;
    double tolerance = 1e-10;
    /// Explicit modes in the exact reference; 0 selects the default.
    std::size_t reference_modes = 0;
    std::size_t threads = 1;

    // [output]
    std::string output;
    std::size_t drop_coarse = 0;

    KernelSpec kernel() const;
    /// Covariance restricted to `modes` noise modes.
    CovarianceSpec covariance(std::size_t modes) const;
    /// J for a mesh with the given number of degrees of freedom; 0 without noise.
    std::size_t noise_modes(std::size_t n_dof) const;
    std::size_t finest_elements() const;
    std::size_t finest_steps() const;

    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Canonical text; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);

std::string to_string(NoiseModel v);
std::string to_string(LadderKind v);
std::string to_string(EstimatorKind v);
std::string to_string(Functional v);
std::string to_string(KernelVariant v);

} // namespace volterra
