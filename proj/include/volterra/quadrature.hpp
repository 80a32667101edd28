#pragma once

#include "volterra/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace volterra::quadrature {

struct Result {
    double value;
    double error_estimate;
};

/// 4-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss4(F&& f, double a, double b) {
    static constexpr std::array<double, 4> nodes{-0.8611363115940526, -0.3399810435848563,
                                                 0.3399810435848563, 0.8611363115940526};
    static constexpr std::array<double, 4> weights{0.3478548451374538, 0.6521451548625461,
                                                   0.6521451548625461, 0.3478548451374538};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) acc += weights[i] * f(mid + half * nodes[i]);
    return half * acc;
}

namespace detail {

template <class F>
Result adaptive(F& f, double a, double b, double whole, double abs_tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = gauss4(f, a, mid);
    const double right = gauss4(f, mid, b);
    const double refined = left + right;
    // Gauss-4 has order 8: halving shrinks the error by ~2^8, so the
    // difference is a reliable (slightly pessimistic) error estimate.
    const double diff = std::abs(refined - whole);
    if (diff <= abs_tol || depth <= 0) {
        if (diff > abs_tol && !(diff <= 10.0 * abs_tol)) {
            throw NumericalError("adaptive quadrature: tolerance not met on [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "]");
        }
        return {refined + (refined - whole) / 255.0, diff / 255.0};
    }
    const Result l = adaptive(f, a, mid, left, 0.5 * abs_tol, depth - 1);
    const Result r = adaptive(f, mid, b, right, 0.5 * abs_tol, depth - 1);
    return {l.value + r.value, l.error_estimate + r.error_estimate};
}

} // namespace detail

/// Adaptive interval halving with composite 4-point Gauss panels and a
/// Richardson-corrected panel estimate. Throws NumericalError if the
/// absolute tolerance cannot be met within the depth limit.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, int max_depth = 40) {
    if (a == b) return {0.0, 0.0};
    const double whole = gauss4(f, a, b);
    return detail::adaptive(f, a, b, whole, abs_tol, max_depth);
}

} // namespace volterra::quadrature
