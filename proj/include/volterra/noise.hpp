#pragma once

#include "volterra/fem1d.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace volterra {

enum class CovarianceModel { identity, inverse_power, custom };

/**
 * Covariance Q diagonal in the Dirichlet sine basis: Q e_j = q_j e_j.
 *
 * inverse_power(alpha) is Q = A^{-alpha}, q_j = lambda_j^{-alpha}; it has
 * A^alpha Q = I, so ||A^kappa Q|| = 1 for kappa = alpha. identity is
 * inverse_power(0). Only modes j <= truncation() are sampled.
 */
class CovarianceSpec {
public:
    static CovarianceSpec identity(double length, std::size_t truncation);
    static CovarianceSpec inverse_power(double alpha, double length, std::size_t truncation);
    /// q[j-1] = q_j; truncation is q.size().
    static CovarianceSpec custom(std::vector<double> q, double length);
    /// Q = 0.
    static CovarianceSpec zero(double length);

    CovarianceModel model() const noexcept { return model_; }
    double alpha() const noexcept { return alpha_; }
    double length() const noexcept { return length_; }
    std::size_t truncation() const noexcept { return truncation_; }
    /// Eigenvalue q_j of Q (1-based j); defined for every j, including beyond truncation.
    double q(std::size_t j) const;
    bool is_zero() const;

    CovarianceSpec with_truncation(std::size_t truncation) const;

private:
    CovarianceSpec(CovarianceModel model, double alpha, double length, std::size_t truncation,
                   std::vector<double> custom_q);

    CovarianceModel model_;
    double alpha_;
    double length_;
    std::size_t truncation_;
    std::vector<double> custom_q_;
};

struct AdmissibleNu {
    double nu_max;
    bool exclusive;      ///< nu_max itself is not admissible
    bool boundary;       ///< alpha = 1/2: both caps coincide
    bool user_supplied;  ///< custom model; admissibility must come from the user
};

/// Supremum of nu with sum_j lambda_j^{nu - 1/rho} q_j < infinity, capped at 1/rho.
AdmissibleNu admissible_nu(const CovarianceSpec& cov, double rho);

struct HsNormEstimate {
    double partial_sum;
    double tail_bound;  ///< integral-test bound on sum_{j > J}; infinite when divergent
    bool divergent;
};

/// ||A^{(nu - 1/rho)/2} Q^{1/2}||_HS^2 truncated at J modes, with tail bound.
HsNormEstimate hs_norm_estimate(const CovarianceSpec& cov, double rho, double nu, std::size_t J);

/**
 * Counter-based seeding: the draw for (path, step, mode) is a pure
 * function of the master seed, independent of evaluation order.
 */
class SeedPolicy {
public:
    explicit SeedPolicy(std::uint64_t master_seed) noexcept : master_seed_(master_seed) {}

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    /// Standard normal draw for the given triple (Box-Muller on Philox output).
    double normal(std::uint64_t path, std::uint32_t step, std::uint32_t mode) const noexcept;
    /// Independent policy for a separate family of draws.
    SeedPolicy derive(std::uint64_t tag) const noexcept;

private:
    std::uint64_t master_seed_;
};

/**
 * Precomputed sine load vectors for repeated sampling of
 * (w^n, phi_i) = sum_{j<=J} sqrt(q_j dt) xi_{path,step,j} (e_j, phi_i).
 */
class IncrementSampler {
public:
    IncrementSampler(const Mesh1D& mesh, const CovarianceSpec& cov, double dt);

    std::size_t n_dof() const noexcept { return n_dof_; }
    std::size_t n_modes() const noexcept { return scales_.size(); }
    /// Writes the load vector into out (size n_dof).
    void sample_into(const SeedPolicy& seed, std::uint64_t path, std::uint32_t step,
                     std::span<double> out) const;
    /// Same increment built from explicit standard normals xi[j-1].
    void combine_into(std::span<const double> xi, std::span<double> out) const;
    std::vector<double> sample(const SeedPolicy& seed, std::uint64_t path, std::uint32_t step) const;

private:
    std::size_t n_dof_;
    std::vector<double> scales_; // sqrt(q_j dt)
    std::vector<double> loads_;  // mode-major, n_modes x n_dof
};

std::vector<double> sample_increment_load(const SeedPolicy& seed, std::uint64_t path,
                                          std::uint32_t step, const Mesh1D& mesh,
                                          const CovarianceSpec& cov, double dt);

} // namespace volterra
