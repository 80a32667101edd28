#include "doctest.h"

#include "volterra/scheme.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace volterra;

namespace {

Eigen::MatrixXd dense(const SymTridiag& a) {
    const auto n = Eigen::Index(a.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = a.diag[std::size_t(i)];
    for (Eigen::Index i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = a.off[std::size_t(i)];
    return m;
}

// Solves the first n steps of X^m - X^{m-1} + dt sum_{k=1}^{m} w_{m-k} A_h X^k = M^{-1} b^m
// as one block lower-triangular system, written in the mass-weighted form.
std::vector<Eigen::VectorXd> block_solve(const FemOperators& ops, const CqWeights& w,
                                         const Eigen::VectorXd& x0, std::size_t n) {
    const Eigen::MatrixXd M = dense(ops.mass), K = dense(ops.stiffness);
    const auto d = Eigen::Index(ops.mesh.n_dof());
    const auto big = Eigen::Index(n) * d;
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(big, big);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(big);
    for (std::size_t m = 1; m <= n; ++m) {
        const auto row = Eigen::Index(m - 1) * d;
        sys.block(row, row, d, d) += M;
        if (m >= 2) sys.block(row, row - d, d, d) -= M;
        else rhs.segment(row, d) = M * x0;
        for (std::size_t k = 1; k <= m; ++k) {
            sys.block(row, Eigen::Index(k - 1) * d, d, d) += w.dt() * w[m - k] * K;
        }
    }
    const Eigen::VectorXd sol = sys.partialPivLu().solve(rhs);
    std::vector<Eigen::VectorXd> out{x0};
    for (std::size_t m = 0; m < n; ++m) out.push_back(sol.segment(Eigen::Index(m) * d, d));
    return out;
}

CqWeightsPtr backward_euler(double dt, std::size_t n) {
    std::vector<double> w(n, 0.0);
    w[0] = 1.0;
    return std::make_shared<const CqWeights>(dt, 1.0, std::move(w));
}

std::vector<double> generic_vector(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(1.3 * double(i)) + 0.2 * double(i % 3);
    return v;
}

} // namespace

TEST_CASE("initial state and trivial steps") {
    const auto ops = assemble(Mesh1D(1.0, 10));
    auto w = std::make_shared<const CqWeights>(cq_weights_riesz(1.5, 0.1, 3));
    const auto x0 = generic_vector(9);
    SchemeState state(ops, w, x0);
    CHECK(std::vector<double>(state.current().begin(), state.current().end()) == x0);

    SchemeState zero(ops, w, std::vector<double>(9, 0.0));
    zero.step(std::vector<double>(9, 0.0));
    for (double v : zero.current()) CHECK(v == 0.0);

    state.step_homogeneous();
    state.step_homogeneous();
    state.step_homogeneous();
    CHECK_THROWS_AS(state.step_homogeneous(), std::out_of_range);
    CHECK_THROWS_AS(SchemeState(ops, w, std::vector<double>(4, 0.0)), std::invalid_argument);

    const auto traj = run_homogeneous(ops, w, x0, 0);
    REQUIRE(traj.size() == 1);
    CHECK(traj[0] == x0);
}

TEST_CASE("single-term memory reduces to backward Euler for the heat equation") {
    const auto ops = assemble(Mesh1D(1.0, 12));
    const double dt = 0.05;
    const auto x0 = generic_vector(11);
    const auto traj = run_homogeneous(ops, backward_euler(dt, 4), x0, 3);
    const Eigen::MatrixXd M = dense(ops.mass), K = dense(ops.stiffness);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), 11);
    for (std::size_t n = 1; n <= 3; ++n) {
        x = (M + dt * K).ldlt().solve(M * x);
        for (std::size_t i = 0; i < 11; ++i) CHECK(traj[n][i] == doctest::Approx(x(Eigen::Index(i))).epsilon(1e-12));
    }
}

TEST_CASE("stepper matches a brute-force block solve") {
    for (double rho : {1.2, 1.5, 1.9}) {
        const auto ops = assemble(Mesh1D(2.0, 9));
        const auto w = std::make_shared<const CqWeights>(cq_weights_riesz(rho, 0.07, 8));
        const auto x0 = generic_vector(8);
        const auto traj = run_homogeneous(ops, w, x0, 6);
        const auto ref = block_solve(ops, *w, Eigen::Map<const Eigen::VectorXd>(x0.data(), 8), 6);
        for (std::size_t n = 0; n <= 6; ++n) {
            for (std::size_t i = 0; i < 8; ++i) {
                CHECK(std::abs(traj[n][i] - ref[n](Eigen::Index(i))) <= 1e-12 * (1.0 + std::abs(ref[n](Eigen::Index(i)))));
            }
        }
    }
}

TEST_CASE("eigenvectors stay invariant and follow the scalar propagator") {
    const auto ops = assemble(Mesh1D(1.0, 16));
    const GeneralizedEigenbasis basis(ops);
    const auto w = std::make_shared<const CqWeights>(cq_weights_riesz(1.5, 0.02, 41));
    for (Eigen::Index k : {Eigen::Index(0), Eigen::Index(5)}) {
        const Eigen::VectorXd v = basis.eigenvectors().col(k);
        const std::vector<double> x0(v.data(), v.data() + v.size());
        const auto traj = run_homogeneous(ops, w, x0, 40);
        const auto beta = scalar_propagator(*w, basis.eigenvalues()(k), 40);
        for (std::size_t n = 0; n <= 40; ++n) {
            const auto modal = basis.to_modal(ops, traj[n]);
            for (Eigen::Index m = 0; m < modal.size(); ++m) {
                if (m == k) CHECK(modal(m) == doctest::Approx(beta[n]).epsilon(1e-10));
                else CHECK(std::abs(modal(m)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("driven scheme: linearity and load bookkeeping") {
    const auto ops = assemble(Mesh1D(1.0, 8));
    const auto w = std::make_shared<const CqWeights>(cq_weights_riesz(1.3, 0.1, 10));
    const std::size_t d = 7, N = 6;
    const auto x0 = generic_vector(d);
    std::vector<std::vector<double>> loads(N), loads2(N), zero_loads(N, std::vector<double>(d, 0.0));
    for (std::size_t n = 0; n < N; ++n) {
        loads[n] = load_vector_sine(ops.mesh, n + 1);
        loads2[n] = load_vector_sine(ops.mesh, 2 * n + 1);
    }

    const auto hom = run_homogeneous(ops, w, x0, N).back();
    const auto driven_zero = run_driven(ops, w, x0, zero_loads);
    for (std::size_t i = 0; i < d; ++i) CHECK(driven_zero[i] == doctest::Approx(hom[i]).epsilon(1e-14));

    const double a = 0.7, b = -1.9;
    std::vector<std::vector<double>> mix(N, std::vector<double>(d));
    std::vector<double> x0b(d), x0mix(d);
    for (std::size_t i = 0; i < d; ++i) {
        x0b[i] = std::sin(double(i));
        x0mix[i] = a * x0[i] + b * x0b[i];
    }
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < d; ++i) mix[n][i] = a * loads[n][i] + b * loads2[n][i];
    const auto ya = run_driven(ops, w, x0, loads);
    const auto yb = run_driven(ops, w, x0b, loads2);
    const auto ymix = run_driven(ops, w, x0mix, mix);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(ymix[i] - (a * ya[i] + b * yb[i])) <= 1e-12);

    // A single load at step 1 propagates like homogeneous data P_h b started at level 0.
    std::vector<std::vector<double>> single(N, std::vector<double>(d, 0.0));
    single[0] = loads[2];
    const auto xs = run_driven(ops, w, std::vector<double>(d, 0.0), single);
    const auto ref = run_homogeneous(ops, w, l2_project(ops, loads[2]), N).back();
    for (std::size_t i = 0; i < d; ++i) CHECK(xs[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("exact discrete second moment") {
    const auto ops = assemble(Mesh1D(1.0, 12));
    const auto w = std::make_shared<const CqWeights>(cq_weights_riesz(1.5, 1.0 / 32.0, 32));
    const auto x0 = generic_vector(11);

    const auto traj = run_homogeneous(ops, w, x0, 32);
    const double det = exact_discrete_second_moment(ops, w, x0, CovarianceSpec::zero(1.0), 32);
    CHECK(det == doctest::Approx(m_inner(ops, traj.back(), traj.back())).epsilon(1e-11));

    const auto cov = CovarianceSpec::inverse_power(0.5, 1.0, 11);
    DiscreteMomentOptions per_mode{MomentRoute::per_noise_mode, 1};
    const double a = exact_discrete_second_moment(ops, w, x0, cov, 32);
    const double b = exact_discrete_second_moment(ops, w, x0, cov, 32, per_mode);
    CHECK(a == doctest::Approx(b).epsilon(1e-11));

    DiscreteMomentOptions threaded{MomentRoute::modal, 4};
    CHECK(exact_discrete_second_moment(ops, w, x0, cov, 32, threaded) == a);
    per_mode.threads = 3;
    CHECK(exact_discrete_second_moment(ops, w, x0, cov, 32, per_mode) == b);

    CHECK_THROWS_AS(exact_discrete_second_moment(ops, w, x0, CovarianceSpec::identity(1.0, 0), 8),
                    std::invalid_argument);
}

TEST_CASE("backward-Euler override matches the discrete OU variance") {
    const auto ops = assemble(Mesh1D(1.0, 10));
    const double dt = 0.03;
    const std::size_t N = 20;
    const auto cov = CovarianceSpec::inverse_power(0.3, 1.0, 9);
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(ops.stiffness), dense(ops.mass));
    double expected = 0.0;
    for (std::size_t j = 1; j <= 9; ++j) {
        const auto b = load_vector_sine(ops.mesh, j);
        const Eigen::VectorXd coords = es.eigenvectors().transpose() * Eigen::Map<const Eigen::VectorXd>(b.data(), 9);
        for (Eigen::Index k = 0; k < 9; ++k) {
            const double g = 1.0 / (1.0 + dt * es.eigenvalues()(k));
            double sum = 0.0;
            for (std::size_t m = 1; m <= N; ++m) sum += std::pow(g, 2.0 * double(m));
            expected += dt * cov.q(j) * coords(k) * coords(k) * sum;
        }
    }
    const double got = exact_discrete_second_moment(ops, backward_euler(dt, N), std::vector<double>(9, 0.0), cov, N);
    CHECK(got == doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("single-step moment against Monte Carlo") {
    const auto ops = assemble(Mesh1D(1.0, 8));
    const double dt = 0.1;
    const auto w = std::make_shared<const CqWeights>(cq_weights_riesz(1.5, dt, 1));
    const auto cov = CovarianceSpec::custom({1.0}, 1.0);
    const std::vector<double> x0(7, 0.0);
    const double exact = exact_discrete_second_moment(ops, w, x0, cov, 1);

    const IncrementSampler sampler(ops.mesh, cov, dt);
    const SeedPolicy seed(77);
    const std::size_t n = 100000;
    double s = 0.0, s2 = 0.0;
    std::vector<double> load(7);
    for (std::size_t p = 0; p < n; ++p) {
        sampler.sample_into(seed, p, 1, load);
        SchemeState state(ops, w, x0);
        state.step(load);
        const double v = m_inner(ops, state.current(), state.current());
        s += v;
        s2 += v * v;
    }
    const double mean = s / double(n);
    const double se = std::sqrt((s2 / double(n) - mean * mean) / double(n));
    CHECK(std::abs(mean - exact) <= 3.0 * se);
}
