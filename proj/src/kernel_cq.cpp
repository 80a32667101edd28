#include "volterra/kernel_cq.hpp"

#include "volterra/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace volterra {

namespace {

void check_rho(double rho) {
    if (!(rho > 1.0 && rho < 2.0)) {
        throw std::invalid_argument("kernel exponent rho must lie in (1, 2), got " +
                                    std::to_string(rho));
    }
}

} // namespace

KernelSpec::KernelSpec(KernelVariant variant, double rho, double eta)
    : variant_(variant), rho_(rho), eta_(eta) {
    check_rho(rho);
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("tempering rate eta must be finite and >= 0");
    }
}

KernelSpec KernelSpec::riesz(double rho) { return KernelSpec(KernelVariant::riesz, rho, 0.0); }

KernelSpec KernelSpec::tempered_riesz(double rho, double eta) {
    return KernelSpec(KernelVariant::tempered_riesz, rho, eta);
}

std::complex<double> laplace_transform(const KernelSpec& kernel, std::complex<double> z) {
    if (!(z.real() > 0.0)) {
        throw std::domain_error("laplace_transform: requires Re z > 0");
    }
    return std::pow(z + kernel.eta(), 1.0 - kernel.rho());
}

double sector_parameter(const KernelSpec& kernel, const SectorGrid& grid) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    double sup_arg = 0.0;
    for (std::size_t i = 0; i < grid.n_angles; ++i) {
        // Open interval: theta_i = -pi/2 + pi (i + 1) / (n + 1).
        const double theta = -half_pi + std::numbers::pi * double(i + 1) / double(grid.n_angles + 1);
        for (std::size_t j = 0; j < grid.n_radii; ++j) {
            const double frac = grid.n_radii > 1 ? double(j) / double(grid.n_radii - 1) : 0.0;
            const double radius = std::pow(
                10.0, grid.log10_min_radius + frac * (grid.log10_max_radius - grid.log10_min_radius));
            const auto value = laplace_transform(kernel, std::polar(radius, theta));
            sup_arg = std::max(sup_arg, std::abs(std::arg(value)));
        }
    }
    return 1.0 + 2.0 / std::numbers::pi * sup_arg;
}

CqWeights::CqWeights(double dt, double rho, std::vector<double> weights)
    : dt_(dt), rho_(rho), weights_(std::move(weights)) {}

CqWeights cq_weights_riesz(double rho, double dt, std::size_t n_weights) {
    check_rho(rho);
    if (!(dt > 0.0)) throw std::invalid_argument("cq_weights_riesz: dt must be positive");
    if (n_weights == 0) throw std::invalid_argument("cq_weights_riesz: need at least one weight");

    const double scale = std::pow(dt, rho - 1.0);
    std::vector<double> w(n_weights);
    double c = 1.0;
    w[0] = scale;
    for (std::size_t k = 1; k < n_weights; ++k) {
        c *= (double(k) + rho - 2.0) / double(k);
        w[k] = scale * c;
    }
    return CqWeights(dt, rho, std::move(w));
}

double default_contour_radius(std::size_t n_weights) {
    // radius^{5n} = eps: round-off eps * radius^{-n} matches aliasing radius^{4n}.
    const double eps = std::numeric_limits<double>::epsilon();
    return std::exp(std::log(eps) / (5.0 * double(std::max<std::size_t>(n_weights, 1))));
}

CqWeights cq_weights_contour(const KernelSpec& kernel, double dt, std::size_t n_weights,
                             double radius) {
    if (!(dt > 0.0)) throw std::invalid_argument("cq_weights_contour: dt must be positive");
    if (n_weights == 0) throw std::invalid_argument("cq_weights_contour: need at least one weight");
    if (!(radius > 0.0 && radius < 1.0)) {
        throw std::invalid_argument("cq_weights_contour: radius must lie in (0, 1)");
    }
    const double amplification = std::pow(radius, -double(n_weights));
    if (!std::isfinite(amplification)) {
        throw NumericalError("cq_weights_contour: radius^-n overflows, weights would lose all precision");
    }

    const std::size_t nodes = 4 * n_weights;
    std::vector<std::complex<double>> roots(nodes);
    for (std::size_t l = 0; l < nodes; ++l) {
        roots[l] = std::polar(1.0, 2.0 * std::numbers::pi * double(l) / double(nodes));
    }

    // Generating function sampled on the circle; conjugate symmetry halves the work.
    const std::size_t half = nodes / 2;
    std::vector<std::complex<double>> samples(half + 1);
    for (std::size_t l = 0; l <= half; ++l) {
        const std::complex<double> z = radius * roots[l];
        samples[l] = laplace_transform(kernel, (1.0 - z) / dt);
    }

    std::vector<double> w(n_weights);
    double r_pow = 1.0;
    for (std::size_t k = 0; k < n_weights; ++k) {
        // Re sum_l f(z_l) zeta^{-kl}; terms l and nodes - l are conjugates.
        double acc = samples[0].real() + ((k % 2 == 0) ? 1.0 : -1.0) * samples[half].real();
        for (std::size_t l = 1; l < half; ++l) {
            const auto twiddle = std::conj(roots[(k * l) % nodes]);
            acc += 2.0 * (samples[l] * twiddle).real();
        }
        w[k] = acc / (double(nodes) * r_pow);
        r_pow *= radius;
    }
    return CqWeights(dt, kernel.rho(), std::move(w));
}

CqWeights cq_weights_contour(const KernelSpec& kernel, double dt, std::size_t n_weights) {
    return cq_weights_contour(kernel, dt, n_weights, default_contour_radius(n_weights));
}

CqWeights cq_weights(const KernelSpec& kernel, double dt, std::size_t n_weights) {
    if (kernel.variant() == KernelVariant::riesz) return cq_weights_riesz(kernel.rho(), dt, n_weights);
    return cq_weights_contour(kernel, dt, n_weights);
}

} // namespace volterra
