#include "volterra/noise.hpp"

#include "volterra/philox.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace volterra {

CovarianceSpec::CovarianceSpec(CovarianceModel model, double alpha, double length,
                               std::size_t truncation, std::vector<double> custom_q)
    : model_(model), alpha_(alpha), length_(length), truncation_(truncation),
      custom_q_(std::move(custom_q)) {
    if (!(length > 0.0)) throw std::invalid_argument("CovarianceSpec: length must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("CovarianceSpec: alpha must be finite and >= 0");
    }
    for (double q : custom_q_) {
        if (!(q >= 0.0) || !std::isfinite(q)) {
            throw std::invalid_argument("CovarianceSpec: eigenvalues q_j must be finite and >= 0");
        }
    }
}

CovarianceSpec CovarianceSpec::identity(double length, std::size_t truncation) {
    return {CovarianceModel::identity, 0.0, length, truncation, {}};
}

CovarianceSpec CovarianceSpec::inverse_power(double alpha, double length, std::size_t truncation) {
    if (alpha == 0.0) return identity(length, truncation);
    return {CovarianceModel::inverse_power, alpha, length, truncation, {}};
}

CovarianceSpec CovarianceSpec::custom(std::vector<double> q, double length) {
    const std::size_t n = q.size();
    return {CovarianceModel::custom, 0.0, length, n, std::move(q)};
}

CovarianceSpec CovarianceSpec::zero(double length) { return custom({}, length); }

double CovarianceSpec::q(std::size_t j) const {
    if (j == 0) throw std::invalid_argument("CovarianceSpec::q: mode index starts at 1");
    switch (model_) {
    case CovarianceModel::identity:
        return 1.0;
    case CovarianceModel::inverse_power:
        return std::pow(laplacian_eigenvalue(length_, j), -alpha_);
    case CovarianceModel::custom:
        return j <= custom_q_.size() ? custom_q_[j - 1] : 0.0;
    }
    return 0.0;
}

bool CovarianceSpec::is_zero() const {
    if (model_ != CovarianceModel::custom) return false;
    for (double q : custom_q_) {
        if (q != 0.0) return false;
    }
    return true;
}

CovarianceSpec CovarianceSpec::with_truncation(std::size_t truncation) const {
    CovarianceSpec out = *this;
    if (model_ == CovarianceModel::custom) {
        out.custom_q_.resize(truncation, 0.0);
    }
    out.truncation_ = truncation;
    return out;
}

AdmissibleNu admissible_nu(const CovarianceSpec& cov, double rho) {
    const double cap = 1.0 / rho;
    if (cov.model() == CovarianceModel::custom) {
        return {cap, false, false, true};
    }
    // lambda_j ~ j^2: sum j^{2(nu - 1/rho - alpha)} < inf iff nu < 1/rho + alpha - 1/2.
    const double alpha = cov.alpha();
    const double series_bound = cap + alpha - 0.5;
    if (alpha > 0.5) return {cap, false, false, false};
    return {series_bound, true, alpha == 0.5, false};
}

HsNormEstimate hs_norm_estimate(const CovarianceSpec& cov, double rho, double nu, std::size_t J) {
    const double length = cov.length();
    double partial = 0.0;
    for (std::size_t j = 1; j <= J; ++j) {
        partial += std::pow(laplacian_eigenvalue(length, j), nu - 1.0 / rho) * cov.q(j);
    }
    if (cov.model() == CovarianceModel::custom) {
        // Finitely many nonzero modes; the tail is whatever lies past J.
        double tail = 0.0;
        for (std::size_t j = J + 1; j <= cov.truncation(); ++j) {
            tail += std::pow(laplacian_eigenvalue(length, j), nu - 1.0 / rho) * cov.q(j);
        }
        return {partial, tail, false};
    }
    // Term j is c j^{-p} with c = (pi/L)^{-p}, p = 2 (1/rho + alpha - nu).
    const double p = 2.0 * (1.0 / rho + cov.alpha() - nu);
    if (p <= 1.0) {
        return {partial, std::numeric_limits<double>::infinity(), true};
    }
    const double c = std::pow(std::numbers::pi / length, -p);
    const double tail = c * std::pow(double(std::max<std::size_t>(J, 1)), 1.0 - p) / (p - 1.0);
    return {partial, J == 0 ? std::numeric_limits<double>::infinity() : tail, false};
}

double SeedPolicy::normal(std::uint64_t path, std::uint32_t step, std::uint32_t mode) const noexcept {
    const Philox4x32::Counter ctr{mode, step, std::uint32_t(path), std::uint32_t(path >> 32)};
    const Philox4x32::Key key{std::uint32_t(master_seed_), std::uint32_t(master_seed_ >> 32)};
    const auto out = Philox4x32::generate(ctr, key);
    const double u1 = uniform_open_closed(out[0], out[1]);
    const double u2 = uniform_open_closed(out[2], out[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SeedPolicy SeedPolicy::derive(std::uint64_t tag) const noexcept {
    return SeedPolicy(splitmix64(master_seed_ ^ splitmix64(tag)));
}

IncrementSampler::IncrementSampler(const Mesh1D& mesh, const CovarianceSpec& cov, double dt)
    : n_dof_(mesh.n_dof()) {
    if (!(dt > 0.0)) throw std::invalid_argument("IncrementSampler: dt must be positive");
    const std::size_t modes = cov.truncation();
    scales_.resize(modes);
    loads_.resize(modes * n_dof_);
    for (std::size_t j = 1; j <= modes; ++j) {
        scales_[j - 1] = std::sqrt(cov.q(j) * dt);
        const auto b = load_vector_sine(mesh, j);
        std::copy(b.begin(), b.end(), loads_.begin() + std::ptrdiff_t((j - 1) * n_dof_));
    }
}

void IncrementSampler::combine_into(std::span<const double> xi, std::span<double> out) const {
    if (out.size() != n_dof_ || xi.size() != scales_.size()) {
        throw std::invalid_argument("IncrementSampler: dimension mismatch");
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < scales_.size(); ++m) {
        const double coeff = scales_[m] * xi[m];
        if (coeff == 0.0) continue;
        const double* b = loads_.data() + m * n_dof_;
        for (std::size_t i = 0; i < n_dof_; ++i) out[i] += coeff * b[i];
    }
}

void IncrementSampler::sample_into(const SeedPolicy& seed, std::uint64_t path, std::uint32_t step,
                                   std::span<double> out) const {
    if (out.size() != n_dof_) throw std::invalid_argument("IncrementSampler: dimension mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < scales_.size(); ++m) {
        if (scales_[m] == 0.0) continue;
        const double coeff = scales_[m] * seed.normal(path, step, std::uint32_t(m + 1));
        const double* b = loads_.data() + m * n_dof_;
        for (std::size_t i = 0; i < n_dof_; ++i) out[i] += coeff * b[i];
    }
}

std::vector<double> IncrementSampler::sample(const SeedPolicy& seed, std::uint64_t path,
                                             std::uint32_t step) const {
    std::vector<double> out(n_dof_);
    sample_into(seed, path, step, out);
    return out;
}

std::vector<double> sample_increment_load(const SeedPolicy& seed, std::uint64_t path,
                                          std::uint32_t step, const Mesh1D& mesh,
                                          const CovarianceSpec& cov, double dt) {
    return IncrementSampler(mesh, cov, dt).sample(seed, path, step);
}

} // namespace volterra
