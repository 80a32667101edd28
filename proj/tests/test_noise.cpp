#include "doctest.h"

#include "volterra/noise.hpp"
#include "volterra/parallel.hpp"
#include "volterra/philox.hpp"

#include <cmath>
#include <numbers>

using namespace volterra;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
          C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                               K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                               K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("covariance models") {
    const auto id = CovarianceSpec::identity(1.0, 8);
    CHECK(id.q(1) == 1.0);
    CHECK(id.q(100) == 1.0);
    CHECK(CovarianceSpec::inverse_power(0.0, 1.0, 8).model() == CovarianceModel::identity);
    const auto inv = CovarianceSpec::inverse_power(1.0, 2.0, 8);
    CHECK(inv.q(3) == doctest::Approx(1.0 / laplacian_eigenvalue(2.0, 3)).epsilon(1e-15));
    const auto custom = CovarianceSpec::custom({0.5, 0.0, 2.0}, 1.0);
    CHECK(custom.truncation() == 3);
    CHECK(custom.q(3) == 2.0);
    CHECK(custom.q(4) == 0.0);
    CHECK(CovarianceSpec::zero(1.0).is_zero());
    CHECK_FALSE(custom.is_zero());
    CHECK(custom.with_truncation(5).truncation() == 5);
    CHECK_THROWS_AS(CovarianceSpec::custom({-1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec::inverse_power(-0.5, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(id.q(0), std::invalid_argument);
}

TEST_CASE("admissible nu") {
    const auto white = admissible_nu(CovarianceSpec::identity(1.0, 16), 1.5);
    CHECK(white.nu_max == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(white.exclusive);
    CHECK_FALSE(white.boundary);

    const auto trace = admissible_nu(CovarianceSpec::inverse_power(1.0, 1.0, 16), 1.5);
    CHECK(trace.nu_max == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK_FALSE(trace.exclusive);

    for (double rho : {1.1, 1.5, 1.9}) {
        const auto b = admissible_nu(CovarianceSpec::inverse_power(0.5, 1.0, 16), rho);
        CHECK(b.nu_max == doctest::Approx(1.0 / rho).epsilon(1e-14));
        CHECK(b.boundary);
    }
    const auto user = admissible_nu(CovarianceSpec::custom({1.0}, 1.0), 1.25);
    CHECK(user.user_supplied);
    CHECK(user.nu_max == doctest::Approx(0.8));
}

TEST_CASE("Hilbert-Schmidt norm estimate") {
    const auto trace = CovarianceSpec::inverse_power(1.0, 1.0, 0);
    const auto est = hs_norm_estimate(trace, 1.5, 2.0 / 3.0, 200000);
    CHECK_FALSE(est.divergent);
    CHECK(est.partial_sum + est.tail_bound == doctest::Approx(1.0 / 6.0).epsilon(1e-5));
    CHECK(est.partial_sum <= 1.0 / 6.0);

    const auto flat = hs_norm_estimate(CovarianceSpec::identity(1.0, 0), 1.5, 2.0 / 3.0, 10);
    CHECK(flat.partial_sum == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(flat.divergent);

    for (std::size_t J : {10u, 40u, 160u}) {
        const auto a = hs_norm_estimate(trace, 1.5, 0.5, J);
        const auto b = hs_norm_estimate(trace, 1.5, 0.5, 2 * J);
        CHECK(b.partial_sum - a.partial_sum < a.tail_bound);
        CHECK(b.partial_sum > a.partial_sum);
    }
}

TEST_CASE("increment loads: zero covariance and determinism") {
    const Mesh1D mesh(1.0, 16);
    const SeedPolicy seed(12345);
    const auto zero = sample_increment_load(seed, 3, 7, mesh, CovarianceSpec::custom(std::vector<double>(15, 0.0), 1.0), 0.1);
    for (double v : zero) CHECK(v == 0.0);

    const IncrementSampler sampler(mesh, CovarianceSpec::identity(1.0, 15), 0.01);
    const auto a = sampler.sample(seed, 99, 4);
    std::vector<std::vector<double>> parallel(64);
    parallel_chunks(64, 4, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) parallel[i] = sampler.sample(seed, 99, 4);
    });
    for (const auto& p : parallel) CHECK(p == a);
    CHECK(sampler.sample(seed, 99, 5) != a);
    CHECK(sampler.sample(seed.derive(1), 99, 4) != a);

    std::vector<double> xi(15);
    for (std::uint32_t m = 0; m < 15; ++m) xi[m] = seed.normal(99, 4, m + 1);
    std::vector<double> combined(mesh.n_dof());
    sampler.combine_into(xi, combined);
    CHECK(combined == a);
}

TEST_CASE("normal draws have standard moments") {
    const SeedPolicy seed(2024);
    const std::size_t n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (std::size_t p = 0; p < n; ++p) {
        const double z = seed.normal(p, 1, 1);
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    s1 /= double(n);
    s2 /= double(n);
    s4 /= double(n);
    CHECK(std::abs(s1) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(s2 - 1.0) < 4.0 * std::sqrt(2.0 / double(n)));
    CHECK(std::abs(s4 - 3.0) < 4.0 * std::sqrt(96.0 / double(n)));
}

TEST_CASE("single-mode increment second moment") {
    const Mesh1D mesh(1.0, 8);
    const auto b = load_vector_sine(mesh, 1);
    const IncrementSampler sampler(mesh, CovarianceSpec::custom({1.0}, 1.0), 1.0);
    const SeedPolicy seed(7);
    const std::size_t n = 100000;
    std::vector<double> m2(mesh.n_dof(), 0.0), m4(mesh.n_dof(), 0.0);
    std::vector<double> load(mesh.n_dof());
    for (std::size_t p = 0; p < n; ++p) {
        sampler.sample_into(seed, p, 1, load);
        for (std::size_t i = 0; i < load.size(); ++i) {
            m2[i] += load[i] * load[i];
            m4[i] += std::pow(load[i], 4);
        }
    }
    for (std::size_t i = 0; i < load.size(); ++i) {
        const double mean = m2[i] / double(n);
        const double var = m4[i] / double(n) - mean * mean;
        CHECK(std::abs(mean - b[i] * b[i]) <= 3.0 * std::sqrt(var / double(n)));
    }
}

TEST_CASE("increment covariance and independence across steps") {
    const Mesh1D mesh(1.0, 6);
    const double dt = 0.05;
    const auto cov = CovarianceSpec::inverse_power(0.25, 1.0, 5);
    const IncrementSampler sampler(mesh, cov, dt);
    const SeedPolicy seed(31);
    const std::size_t n = 100000, d = mesh.n_dof();
    std::vector<std::vector<double>> bj;
    for (std::size_t j = 1; j <= 5; ++j) bj.push_back(load_vector_sine(mesh, j));

    std::vector<double> s(d * d, 0.0), s2(d * d, 0.0), cross(d, 0.0);
    double norm_a = 0.0, norm_b = 0.0;
    std::vector<double> a(d), c(d);
    for (std::size_t p = 0; p < n; ++p) {
        sampler.sample_into(seed, p, 3, a);
        sampler.sample_into(seed, p, 4, c);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                const double v = a[i] * a[k];
                s[i * d + k] += v;
                s2[i * d + k] += v * v;
            }
            cross[i] += a[i] * c[i];
        }
        norm_a += a[0] * a[0];
        norm_b += c[0] * c[0];
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            double expected = 0.0;
            for (std::size_t j = 0; j < 5; ++j) expected += dt * cov.q(j + 1) * bj[j][i] * bj[j][k];
            const double mean = s[i * d + k] / double(n);
            const double se = std::sqrt((s2[i * d + k] / double(n) - mean * mean) / double(n));
            CHECK(std::abs(mean - expected) <= 4.0 * se);
        }
        const double corr = cross[i] / std::sqrt(norm_a * norm_b);
        if (i == 0) CHECK(std::abs(corr) <= 4.0 / std::sqrt(double(n)));
    }
}
