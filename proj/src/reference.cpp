#include "volterra/reference.hpp"

#include "volterra/errors.hpp"
#include "volterra/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace volterra {

namespace {

constexpr int kTaylorTermCap = 200;
constexpr double kAsymptoticAccuracy = 1e-15;

void check_rho(double rho) {
    if (!(rho > 1.0 && rho < 2.0)) {
        throw std::invalid_argument("Mittag-Leffler: rho must lie in (1, 2)");
    }
}

double pole_pair(double rho, double x) {
    const double root = std::pow(x, 1.0 / rho);
    const double angle = std::numbers::pi / rho;
    return 2.0 / rho * std::exp(root * std::cos(angle)) * std::cos(root * std::sin(angle));
}

/// Coefficient a_m of u^{-rho m} in E_rho(-u^rho) ~ sum_m a_m u^{-rho m},
/// a_m = -(-1)^m / Gamma(1 - rho m) = -(-1)^m Gamma(rho m) sin(pi rho m) / pi.
/// Returns 0 at poles of Gamma(1 - rho m).
double asymptotic_coefficient(double rho, int m, double* log_magnitude = nullptr) {
    const double z = rho * double(m);
    const double frac = z - std::round(z);
    if (std::abs(frac) < 1e-12) {
        if (log_magnitude) *log_magnitude = -std::numeric_limits<double>::infinity();
        return 0.0;
    }
    const double s = std::sin(std::numbers::pi * frac) * ((long long)std::round(z) % 2 == 0 ? 1.0 : -1.0);
    const double lg = std::lgamma(z);
    if (log_magnitude) *log_magnitude = lg + std::log(std::abs(s) / std::numbers::pi);
    const double sign = (m % 2 == 0) ? -1.0 : 1.0;
    return sign * std::exp(lg) * s / std::numbers::pi;
}

} // namespace

double mittag_leffler_taylor(double rho, double x) {
    check_rho(rho);
    if (x < 0.0) throw std::domain_error("mittag_leffler: argument must be >= 0");
    if (x == 0.0) return 1.0;
    const long double xl = x;
    const long double r = rho;
    std::array<long double, kTaylorTermCap + 1> terms{};
    int last = 0;
    long double peak = 1.0L;
    terms[0] = 1.0L;
    for (int m = 1; m <= kTaylorTermCap; ++m) {
        const long double mag = std::exp(m * std::log(xl) - std::lgamma(r * m + 1.0L));
        terms[m] = (m % 2 == 0) ? mag : -mag;
        peak = std::max(peak, mag);
        last = m;
        if (double(m) > x && mag < 1e-22L * peak) break;
    }
    long double acc = 0.0L;
    for (int m = last; m >= 0; --m) acc += terms[m];
    return double(acc);
}

double mittag_leffler_integral(double rho, double x) {
    check_rho(rho);
    if (!(x > 0.0)) throw std::domain_error("mittag_leffler_integral: argument must be > 0");
    const double sa = std::sin(rho * std::numbers::pi);
    const double ca = std::cos(rho * std::numbers::pi);
    auto integrand = [=](double r) {
        if (!(r > 0.0)) return 0.0;
        const double ra = std::pow(r, rho);
        return std::exp(-r) * (ra / r) * x * sa / (ra * ra + 2.0 * x * ra * ca + x * x);
    };
    thread_local boost::math::quadrature::tanh_sinh<double> finite_rule;
    thread_local boost::math::quadrature::exp_sinh<double> half_line_rule;
    const double split = std::pow(x, 1.0 / rho);
    const double head = finite_rule.integrate(integrand, 0.0, split, 1e-14);
    const double tail = half_line_rule.integrate(integrand, split,
                                                 std::numeric_limits<double>::infinity(), 1e-14);
    return pole_pair(rho, x) + (head + tail) / std::numbers::pi;
}

AsymptoticValue mittag_leffler_asymptotic(double rho, double x) {
    check_rho(rho);
    if (!(x > 0.0)) throw std::domain_error("mittag_leffler_asymptotic: argument must be > 0");
    const double log_x = std::log(x);
    double sum = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    int used = 0;
    double omitted = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= 200; ++m) {
        double log_mag = 0.0;
        const double a = asymptotic_coefficient(rho, m, &log_mag);
        if (a == 0.0) continue;
        const double mag = std::exp(log_mag - m * log_x);
        if (mag >= previous) {
            omitted = mag;
            break;
        }
        // The term a_m x^{-m}: a_m is the coefficient of u^{-rho m} with x = u^rho.
        sum += a * std::exp(-m * log_x);
        previous = mag;
        used = m;
        omitted = mag; // refined when the next nonzero term is seen
        if (mag < 1e-18) break;
    }
    return {pole_pair(rho, x) + sum, omitted, used};
}

double mittag_leffler(double rho, double x) {
    check_rho(rho);
    if (!(x >= 0.0)) throw std::domain_error("mittag_leffler: argument must be >= 0");
    if (x <= kMittagLefflerSwitch) return mittag_leffler_taylor(rho, x);
    const auto asym = mittag_leffler_asymptotic(rho, x);
    if (asym.error_estimate <= kAsymptoticAccuracy) return asym.value;
    return mittag_leffler_integral(rho, x);
}

double resolvent_mode(double rho, double lambda, double t) {
    if (!(lambda > 0.0)) throw std::invalid_argument("resolvent_mode: lambda must be positive");
    if (!(t >= 0.0)) throw std::invalid_argument("resolvent_mode: t must be >= 0");
    return mittag_leffler(rho, lambda * std::pow(t, rho));
}

double SpectralVector::norm() const {
    double acc = 0.0;
    for (double c : coeffs) acc += c * c;
    return std::sqrt(acc);
}

SpectralVector exact_solution_action(double rho, const SpectralVector& x0, double t) {
    SpectralVector out{x0.length, std::vector<double>(x0.size(), 0.0)};
    for (std::size_t k = 0; k < x0.size(); ++k) {
        if (x0.coeffs[k] == 0.0) continue;
        out.coeffs[k] = resolvent_mode(rho, laplacian_eigenvalue(x0.length, k + 1), t) * x0.coeffs[k];
    }
    return out;
}

namespace {

double squared_ml(double rho, double u) {
    const double e = mittag_leffler(rho, std::pow(u, rho));
    return e * e;
}

/// Panel breakpoints between a and b: unit panels below 32, doubling above.
std::vector<double> panel_points(double a, double b) {
    std::vector<double> pts{a};
    double p = std::floor(a) + 1.0;
    while (p < b) {
        if (p > a) pts.push_back(p);
        p = p < 32.0 ? p + 1.0 : 2.0 * p;
    }
    pts.push_back(b);
    return pts;
}

/// int_U^infinity of the squared algebraic expansion of E_rho(-u^rho).
double algebraic_tail(double rho, double U) {
    constexpr int M = 4;
    std::array<double, M + 1> a{};
    for (int m = 1; m <= M; ++m) a[m] = asymptotic_coefficient(rho, m);
    double acc = 0.0;
    for (int m = 1; m <= M; ++m) {
        for (int n = 1; n <= M; ++n) {
            const double p = rho * double(m + n);
            acc += a[m] * a[n] * std::pow(U, 1.0 - p) / (p - 1.0);
        }
    }
    return acc;
}

/// Scaled horizon beyond which the pole pair is below 1e-17.
double pole_cutoff(double rho) {
    const double decay = -std::cos(std::numbers::pi / rho);
    return std::clamp(40.0 / decay, 64.0, 1e6);
}

} // namespace

std::vector<double> squared_resolvent_integrals(double rho, double T, std::span<const double> lambdas,
                                                double abs_tol) {
    check_rho(rho);
    if (!(T >= 0.0)) throw std::invalid_argument("squared_resolvent_integrals: T must be >= 0");
    const std::size_t n = lambdas.size();
    std::vector<double> horizon(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lambdas[i] > 0.0)) throw std::invalid_argument("squared_resolvent_integrals: lambda <= 0");
        horizon[i] = T * std::pow(lambdas[i], 1.0 / rho);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return horizon[a] < horizon[b]; });

    auto g = [rho](double u) { return squared_ml(rho, u); };
    const double seg_tol = abs_tol / double(n + 64);
    std::vector<double> out(n);
    double position = 0.0;
    double accumulated = 0.0;
    for (std::size_t idx : order) {
        const double target = horizon[idx];
        if (target > position) {
            const auto pts = panel_points(position, target);
            for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
                accumulated += quadrature::integrate(g, pts[p], pts[p + 1], seg_tol).value;
            }
            position = target;
        }
        out[idx] = std::pow(lambdas[idx], -1.0 / rho) * accumulated;
    }
    return out;
}

double squared_resolvent_integral_infinity(double rho, double abs_tol) {
    check_rho(rho);
    const double cutoff = pole_cutoff(rho);
    auto g = [rho](double u) { return squared_ml(rho, u); };
    const auto pts = panel_points(0.0, cutoff);
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
        acc += quadrature::integrate(g, pts[p], pts[p + 1], abs_tol / double(pts.size())).value;
    }
    return acc + algebraic_tail(rho, cutoff);
}

namespace {

/// sum_{j > K} j^{-s} by Euler-Maclaurin (K >= 1, s > 1).
double zeta_tail(double s, double K) {
    const double f = std::pow(K, -s);
    const double from_k = std::pow(K, 1.0 - s) / (s - 1.0) + 0.5 * f + s * f / (12.0 * K) -
                          s * (s + 1.0) * (s + 2.0) * f / (720.0 * K * K * K);
    return from_k - f;
}

} // namespace

SecondMoment exact_second_moment(double rho, const SpectralVector& x0, const CovarianceSpec& cov,
                                 double T, const SecondMomentOptions& options) {
    check_rho(rho);
    SecondMoment out;
    const auto propagated = exact_solution_action(rho, x0, T);
    for (double c : propagated.coeffs) out.deterministic += c * c;

    const bool infinite_series = cov.model() != CovarianceModel::custom;
    std::size_t modes = options.modes;
    if (modes == 0) modes = infinite_series ? 4096 : cov.truncation();
    out.modes = modes;

    std::vector<double> lambdas;
    std::vector<double> weights;
    for (std::size_t j = 1; j <= modes; ++j) {
        const double q = cov.q(j);
        if (q == 0.0) continue;
        lambdas.push_back(laplacian_eigenvalue(cov.length(), j));
        weights.push_back(q);
    }
    if (!lambdas.empty()) {
        const auto integrals = squared_resolvent_integrals(rho, T, lambdas, options.tolerance);
        for (std::size_t i = 0; i < integrals.size(); ++i) out.noise += weights[i] * integrals[i];
    }

    if (infinite_series && options.include_tail) {
        // q_j lambda_j^{-1/rho} = (pi/L)^{-s} j^{-s}, s = 2 (alpha + 1/rho).
        const double s = 2.0 * (cov.alpha() + 1.0 / rho);
        if (s <= 1.0) {
            throw InadmissibleNoise("exact_second_moment: noise series diverges", 0.0);
        }
        const double f_inf = squared_resolvent_integral_infinity(rho, 1e-12);
        const double scale = std::pow(std::numbers::pi / cov.length(), -s);
        const double series = scale * zeta_tail(s, double(modes));
        out.tail = f_inf * series;
        // Modes past K see the horizon U_{K+1}; the deficit F(inf) - F(U) is bounded by the tail.
        const double u_next = T * std::pow(laplacian_eigenvalue(cov.length(), modes + 1), 1.0 / rho);
        const double deficit = u_next > pole_cutoff(rho) ? std::abs(algebraic_tail(rho, u_next)) : f_inf;
        out.tail_uncertainty = deficit * series;
    }
    out.value = out.deterministic + out.noise + out.tail;
    return out;
}

double smoothing_envelope(double rho, double nu, double t, std::span<const double> lambda_grid) {
    if (!(nu >= 0.0 && nu <= 2.0 / rho + 1e-15)) {
        throw std::invalid_argument("smoothing_envelope: nu must lie in [0, 2/rho]");
    }
    if (!(t > 0.0)) throw std::invalid_argument("smoothing_envelope: t must be positive");
    double best = 0.0;
    const double time_factor = std::pow(t, rho * nu / 2.0);
    for (double lambda : lambda_grid) {
        const double value = std::pow(lambda, nu / 2.0) *
                             std::abs(mittag_leffler(rho, lambda * std::pow(t, rho))) * time_factor;
        best = std::max(best, value);
    }
    return best;
}

std::vector<double> semidiscrete_solution(const FemOperators& ops, const GeneralizedEigenbasis& basis,
                                          double rho, std::span<const double> x, double t) {
    Eigen::VectorXd modal = basis.to_modal(ops, x);
    for (Eigen::Index k = 0; k < modal.size(); ++k) {
        modal(k) *= mittag_leffler(rho, basis.eigenvalues()(k) * std::pow(t, rho));
    }
    return basis.from_modal(modal);
}

double semidiscrete_second_moment(const FemOperators& ops, const GeneralizedEigenbasis& basis,
                                  double rho, std::span<const double> x0, const CovarianceSpec& cov,
                                  double T, double tolerance) {
    const Eigen::Index n = Eigen::Index(basis.size());
    double deterministic = 0.0;
    {
        const Eigen::VectorXd modal = basis.to_modal(ops, x0);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double e = mittag_leffler(rho, basis.eigenvalues()(k) * std::pow(T, rho));
            deterministic += modal(k) * modal(k) * e * e;
        }
    }
    Eigen::VectorXd noise_weight = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 1; j <= cov.truncation(); ++j) {
        const double q = cov.q(j);
        if (q == 0.0) continue;
        const Eigen::VectorXd b = basis.load_to_modal(load_vector_sine(ops.mesh, j));
        noise_weight += q * b.cwiseAbs2();
    }
    double noise = 0.0;
    if (noise_weight.squaredNorm() > 0.0) {
        std::vector<double> lambdas(basis.eigenvalues().data(), basis.eigenvalues().data() + n);
        const auto integrals = squared_resolvent_integrals(rho, T, lambdas, tolerance);
        for (Eigen::Index k = 0; k < n; ++k) noise += noise_weight(k) * integrals[std::size_t(k)];
    }
    return deterministic + noise;
}

} // namespace volterra
