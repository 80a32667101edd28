#pragma once

#include "volterra/fem1d.hpp"
#include "volterra/kernel_cq.hpp"
#include "volterra/noise.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace volterra {

/**
 * Fully discrete backward-Euler / convolution-quadrature stepper:
 *
 *   (M + dt w_0 K) X^{n+1} = M X^n - dt sum_{k=1}^{n} w_{n+1-k} K X^k + b^{n+1},
 *
 * where b^{n+1} holds the inner products (w^{n+1}, phi_i). The full history
 * X^0..X^n is kept because the memory sum needs all of it.
 *
 * Single writer; separate instances may run concurrently.
 */
class SchemeState {
public:
    SchemeState(const FemOperators& ops, CqWeightsPtr weights, std::span<const double> x0);

    std::size_t step_count() const noexcept { return steps_; }
    std::size_t n_dof() const noexcept { return n_dof_; }
    std::span<const double> history(std::size_t n) const;
    std::span<const double> current() const { return history(steps_); }
    const FemOperators& ops() const noexcept { return ops_; }
    const CqWeights& weights() const noexcept { return *weights_; }

    /// Advances one step. Throws std::out_of_range when the weight sequence
    /// is too short for the next step.
    void step(std::span<const double> load);
    void step_homogeneous();

private:
    void advance(std::span<const double> load);

    FemOperators ops_;
    CqWeightsPtr weights_;
    TridiagonalSolver lhs_;
    std::size_t n_dof_;
    std::size_t steps_ = 0;
    std::vector<double> history_; // level-major, (steps_ + 1) x n_dof_
    std::vector<double> memory_, rhs_, scratch_;
};

using Trajectory = std::vector<std::vector<double>>;

/// X^0..X^N with zero loads; column n realizes B_{n,h} applied to x0.
Trajectory run_homogeneous(const FemOperators& ops, CqWeightsPtr weights,
                           std::span<const double> x0, std::size_t N);

/// X^N of the driven scheme; loads[k] is the load for step k + 1.
std::vector<double> run_driven(const FemOperators& ops, CqWeightsPtr weights,
                               std::span<const double> x0,
                               std::span<const std::vector<double>> loads);

/**
 * beta^0..beta^N of the scalar recursion for one (stiffness, mass)
 * eigenvalue lambda; beta^n is B_{n,h} restricted to that eigenvector.
 */
std::vector<double> scalar_propagator(const CqWeights& weights, double lambda, std::size_t N);

enum class MomentRoute {
    /// One full vector homogeneous run per noise mode.
    per_noise_mode,
    /// Generalized eigenbasis of (K, M) and one scalar recursion per eigenvalue.
    modal,
};

struct DiscreteMomentOptions {
    MomentRoute route = MomentRoute::modal;
    std::size_t threads = 1;
};

/**
 * E ||X_h^N||_M^2 = ||B_N P_h x0||^2 + dt sum_{m=1}^{N} sum_{j<=J} q_j ||B_m P_h e_j||^2,
 * exact, with no sampling. x0 are FEM coefficients.
 */
double exact_discrete_second_moment(const FemOperators& ops, CqWeightsPtr weights,
                                    std::span<const double> x0, const CovarianceSpec& cov,
                                    std::size_t N, const DiscreteMomentOptions& options = {});

} // namespace volterra
