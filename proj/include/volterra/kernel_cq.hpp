#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace volterra {

enum class KernelVariant { riesz, tempered_riesz };

/**
 * Memory kernel b(t) = e^{-eta t} t^{rho-2} / Gamma(rho-1), 1 < rho < 2.
 *
 * eta = 0 is the Riesz kernel. Both families are completely monotone, hence
 * 3-monotone, and their Laplace transforms (z + eta)^{1-rho} extend
 * analytically to the slit plane with |b^(k)(z)| <= C |z|^{1-rho-k}; these
 * structural hypotheses therefore hold by construction and are not checked
 * numerically.
 */
class KernelSpec {
public:
    static KernelSpec riesz(double rho);
    static KernelSpec tempered_riesz(double rho, double eta);

    KernelVariant variant() const noexcept { return variant_; }
    double rho() const noexcept { return rho_; }
    double eta() const noexcept { return eta_; }

private:
    KernelSpec(KernelVariant variant, double rho, double eta);

    KernelVariant variant_;
    double rho_;
    double eta_;
};

/// Principal-branch Laplace transform (z + eta)^{1-rho}; requires Re z > 0.
std::complex<double> laplace_transform(const KernelSpec& kernel, std::complex<double> z);

struct SectorGrid {
    std::size_t n_angles = 2001;   ///< uniform in the open interval (-pi/2, pi/2)
    std::size_t n_radii = 61;      ///< log-spaced moduli
    double log10_min_radius = -6.0;
    double log10_max_radius = 6.0;
};

/// 1 + (2/pi) max |arg b^(lambda)| over the sampled right half-plane.
double sector_parameter(const KernelSpec& kernel, const SectorGrid& grid = {});

/**
 * Convolution-quadrature weights of the backward-Euler Laplace rule,
 * i.e. the Taylor coefficients of z -> b^((1 - z)/dt).
 *
 * Immutable once built; the stepper shares one instance through
 * std::shared_ptr.
 */
class CqWeights {
public:
    CqWeights(double dt, double rho, std::vector<double> weights);

    double dt() const noexcept { return dt_; }
    double rho() const noexcept { return rho_; }
    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t k) const { return weights_[k]; }
    std::span<const double> values() const noexcept { return weights_; }

private:
    double dt_;
    double rho_;
    std::vector<double> weights_;
};

using CqWeightsPtr = std::shared_ptr<const CqWeights>;

/// Riesz weights by the binomial recurrence c_k = c_{k-1} (k + rho - 2) / k.
CqWeights cq_weights_riesz(double rho, double dt, std::size_t n_weights);

/// Radius used when cq_weights_contour is called without one; balances
/// round-off amplification radius^{-n} against aliasing radius^{4n}.
double default_contour_radius(std::size_t n_weights);

/**
 * Weights for any kernel by trapezoidal Cauchy integrals on |z| = radius
 * with 4 n_weights nodes. Throws NumericalError when radius^{-n_weights}
 * overflows.
 */
CqWeights cq_weights_contour(const KernelSpec& kernel, double dt, std::size_t n_weights,
                             double radius);
CqWeights cq_weights_contour(const KernelSpec& kernel, double dt, std::size_t n_weights);

/// Riesz kernels use the recurrence, everything else the contour rule.
CqWeights cq_weights(const KernelSpec& kernel, double dt, std::size_t n_weights);

} // namespace volterra
