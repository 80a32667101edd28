#include "doctest.h"

#include "volterra/errors.hpp"
#include "volterra/kernel_cq.hpp"

#include <cmath>
#include <numbers>

using namespace volterra;

namespace {

// Generalized binomial coefficient of (1 - z)^{1-rho}: Gamma(k + rho - 1) / (Gamma(rho - 1) k!).
double binomial_series_coefficient(double rho, int k) {
    return std::exp(std::lgamma(k + rho - 1.0) - std::lgamma(rho - 1.0) - std::lgamma(k + 1.0));
}

} // namespace

TEST_CASE("laplace transform of the Riesz kernel") {
    const auto k15 = KernelSpec::riesz(1.5);
    CHECK(laplace_transform(k15, 1.0).real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(laplace_transform(k15, 4.0).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(laplace_transform(k15, 4.0).imag()) < 1e-15);

    // Approach z = i from the right half-plane; arg z^{1-rho} = (1-rho) arg z.
    const auto v = laplace_transform(KernelSpec::riesz(1.25), {1e-14, 1.0});
    CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::arg(v) == doctest::Approx(-std::numbers::pi / 8.0).epsilon(1e-12));

    CHECK_THROWS_AS(laplace_transform(k15, {0.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(laplace_transform(k15, -1.0), std::domain_error);
}

TEST_CASE("kernel construction rejects rho outside (1, 2)") {
    CHECK_THROWS_AS(KernelSpec::riesz(1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::riesz(2.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::tempered_riesz(1.5, -0.1), std::invalid_argument);
    CHECK(KernelSpec::riesz(1.5).eta() == 0.0);
    CHECK_THROWS_AS(cq_weights_riesz(2.5, 0.1, 4), std::invalid_argument);
}

TEST_CASE("sector parameter recovers rho for Riesz kernels") {
    for (double rho : {1.2, 1.5, 1.9}) {
        const double s = sector_parameter(KernelSpec::riesz(rho));
        CHECK(s <= rho + 1e-12);
        CHECK(s >= rho - 0.01);
    }
    CHECK(sector_parameter(KernelSpec::riesz(1.0 + 1e-6)) == doctest::Approx(1.0).epsilon(1e-5));
    // Tempering pulls the transform toward the real axis.
    CHECK(sector_parameter(KernelSpec::tempered_riesz(1.5, 1.0)) < 1.5);
}

TEST_CASE("Riesz weights: frozen values and binomial-series oracle") {
    const auto w = cq_weights_riesz(1.5, 0.1, 4);
    CHECK(w[0] == doctest::Approx(0.31622776601683794).epsilon(1e-15));

    const auto unit = cq_weights_riesz(1.5, 1.0, 3);
    CHECK(unit[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(unit[2] == doctest::Approx(0.375).epsilon(1e-15));
    for (double rho : {1.1, 1.37, 1.9}) CHECK(cq_weights_riesz(rho, 1.0, 1)[0] == 1.0);

    for (double rho : {1.1, 1.5, 1.9}) {
        const auto c = cq_weights_riesz(rho, 1.0, 201);
        for (int k = 0; k <= 200; ++k) {
            CHECK(c[std::size_t(k)] ==
                  doctest::Approx(binomial_series_coefficient(rho, k)).epsilon(1e-11));
        }
    }
}

TEST_CASE("Riesz weights: partial-sum Gamma identity") {
    for (double rho : {1.1, 1.5, 1.9}) {
        const auto c = cq_weights_riesz(rho, 1.0, 201);
        double partial = 0.0;
        for (int n = 0; n <= 200; ++n) {
            partial += c[std::size_t(n)];
            const double expected =
                std::exp(std::lgamma(n + rho) - std::lgamma(rho) - std::lgamma(n + 1.0));
            CHECK(std::abs(partial - expected) <= 1e-10 * expected);
        }
    }
}

TEST_CASE("Riesz weights: positive, strictly decreasing, exact dt scaling") {
    for (double rho = 1.01; rho < 2.0; rho += 0.07) {
        const auto w = cq_weights_riesz(rho, 0.03, 2000);
        for (std::size_t k = 0; k < w.size(); ++k) {
            CHECK(w[k] > 0.0);
            if (k > 0) CHECK(w[k] < w[k - 1]);
        }
        const auto unit = cq_weights_riesz(rho, 1.0, 2000);
        const double scale = std::pow(0.03, rho - 1.0);
        for (std::size_t k = 0; k < w.size(); ++k) CHECK(w[k] == scale * unit[k]);
    }
}

TEST_CASE("contour weights agree with the recurrence") {
    const auto k15 = KernelSpec::riesz(1.5);
    const auto rec = cq_weights_riesz(1.5, 1.0, 65);
    const auto con = cq_weights_contour(k15, 1.0, 65, 0.9);
    for (std::size_t k = 0; k <= 64; ++k) CHECK(std::abs(rec[k] - con[k]) <= 1e-10);

    for (double rho : {1.1, 1.5, 1.9}) {
        const auto r = cq_weights_riesz(rho, 1.0, 512);
        const auto c = cq_weights_contour(KernelSpec::riesz(rho), 1.0, 512);
        double worst = 0.0;
        for (std::size_t k = 0; k < 512; ++k) worst = std::max(worst, std::abs(r[k] - c[k]));
        CHECK(worst <= 1e-9 * r[0]);
    }

    const auto half = cq_weights_contour(k15, 0.5, 64);
    const auto unit = cq_weights_riesz(1.5, 1.0, 64);
    for (std::size_t k = 0; k < 64; ++k) {
        CHECK(std::abs(half[k] - std::sqrt(0.5) * unit[k]) <= 1e-11);
    }
}

TEST_CASE("tempered weights converge to Riesz weights as eta -> 0") {
    const auto riesz = cq_weights_riesz(1.5, 0.1, 128);
    double prev_gap = 1.0;
    for (double eta : {1e-2, 1e-4, 1e-6}) {
        const auto t = cq_weights_contour(KernelSpec::tempered_riesz(1.5, eta), 0.1, 128);
        double gap = 0.0;
        for (std::size_t k = 0; k < 128; ++k) gap = std::max(gap, std::abs(t[k] - riesz[k]));
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-6);
    // cq_weights dispatches tempered kernels to the contour rule.
    CHECK(cq_weights(KernelSpec::tempered_riesz(1.5, 0.5), 0.1, 8)[0] <
          cq_weights(KernelSpec::riesz(1.5), 0.1, 8)[0]);
}

TEST_CASE("contour weights signal precision loss") {
    CHECK_THROWS_AS(cq_weights_contour(KernelSpec::riesz(1.5), 1.0, 400, 0.1), NumericalError);
    CHECK_THROWS_AS(cq_weights_contour(KernelSpec::riesz(1.5), 1.0, 8, 1.0), std::invalid_argument);
}
