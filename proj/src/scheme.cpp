#include "volterra/scheme.hpp"

#include "volterra/parallel.hpp"

#include <stdexcept>
#include <string>

namespace volterra {

namespace {

TridiagonalSolver factorize_lhs(const FemOperators& ops, const CqWeights& weights) {
    if (weights.size() == 0) throw std::invalid_argument("SchemeState: empty weight sequence");
    return TridiagonalSolver(ops.mass.plus_scaled(ops.stiffness, weights.dt() * weights[0]));
}

} // namespace

SchemeState::SchemeState(const FemOperators& ops, CqWeightsPtr weights, std::span<const double> x0)
    : ops_(ops), weights_(std::move(weights)), lhs_(factorize_lhs(ops_, *weights_)),
      n_dof_(ops.mesh.n_dof()) {
    if (x0.size() != n_dof_) {
        throw std::invalid_argument("SchemeState: initial vector has " + std::to_string(x0.size()) +
                                    " entries, mesh has " + std::to_string(n_dof_));
    }
    history_.assign(x0.begin(), x0.end());
    memory_.resize(n_dof_);
    rhs_.resize(n_dof_);
    scratch_.resize(n_dof_);
}

std::span<const double> SchemeState::history(std::size_t n) const {
    if (n > steps_) throw std::out_of_range("SchemeState::history: level not computed yet");
    return {history_.data() + n * n_dof_, n_dof_};
}

void SchemeState::step(std::span<const double> load) {
    if (load.size() != n_dof_) throw std::invalid_argument("SchemeState::step: load dimension mismatch");
    advance(load);
}

void SchemeState::step_homogeneous() { advance({}); }

void SchemeState::advance(std::span<const double> load) {
    const std::size_t n = steps_;
    if (weights_->size() < n + 1) {
        throw std::out_of_range("SchemeState::step: convolution weights exhausted at step " +
                                std::to_string(n + 1));
    }
    const double dt = weights_->dt();
    std::fill(memory_.begin(), memory_.end(), 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double w = (*weights_)[n + 1 - k];
        const double* xk = history_.data() + k * n_dof_;
        for (std::size_t i = 0; i < n_dof_; ++i) memory_[i] += w * xk[i];
    }
    ops_.mass.apply(history(n), rhs_);
    ops_.stiffness.apply(memory_, scratch_);
    for (std::size_t i = 0; i < n_dof_; ++i) rhs_[i] -= dt * scratch_[i];
    if (!load.empty()) {
        for (std::size_t i = 0; i < n_dof_; ++i) rhs_[i] += load[i];
    }
    lhs_.solve_in_place(rhs_);
    history_.insert(history_.end(), rhs_.begin(), rhs_.end());
    ++steps_;
}

Trajectory run_homogeneous(const FemOperators& ops, CqWeightsPtr weights, std::span<const double> x0,
                           std::size_t N) {
    SchemeState state(ops, std::move(weights), x0);
    for (std::size_t n = 0; n < N; ++n) state.step_homogeneous();
    Trajectory out;
    out.reserve(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        const auto level = state.history(n);
        out.emplace_back(level.begin(), level.end());
    }
    return out;
}

std::vector<double> run_driven(const FemOperators& ops, CqWeightsPtr weights, std::span<const double> x0,
                               std::span<const std::vector<double>> loads) {
    SchemeState state(ops, std::move(weights), x0);
    for (const auto& load : loads) state.step(load);
    const auto last = state.current();
    return {last.begin(), last.end()};
}

std::vector<double> scalar_propagator(const CqWeights& weights, double lambda, std::size_t N) {
    if (weights.size() < N) throw std::out_of_range("scalar_propagator: convolution weights exhausted");
    const double dt = weights.dt();
    const double denom = 1.0 + dt * weights[0] * lambda;
    std::vector<double> beta(N + 1);
    beta[0] = 1.0;
    for (std::size_t n = 0; n < N; ++n) {
        double memory = 0.0;
        for (std::size_t k = 1; k <= n; ++k) memory += weights[n + 1 - k] * beta[k];
        beta[n + 1] = (beta[n] - dt * lambda * memory) / denom;
    }
    return beta;
}

namespace {

double moment_per_noise_mode(const FemOperators& ops, const CqWeightsPtr& weights,
                             std::span<const double> x0, const CovarianceSpec& cov, std::size_t N,
                             std::size_t threads) {
    double deterministic = 0.0;
    {
        const auto traj = run_homogeneous(ops, weights, x0, N);
        deterministic = m_inner(ops, traj.back(), traj.back());
    }
    const std::size_t J = cov.truncation();
    std::vector<double> per_mode(J, 0.0);
    parallel_chunks(J, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            const double q = cov.q(m + 1);
            if (q == 0.0) continue;
            const auto start = l2_project(ops, load_vector_sine(ops.mesh, m + 1));
            SchemeState state(ops, weights, start);
            double acc = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                state.step_homogeneous();
                const auto x = state.current();
                acc += m_inner(ops, x, x);
            }
            per_mode[m] = q * acc;
        }
    });
    double noise = 0.0;
    for (double v : per_mode) noise += v;
    return deterministic + weights->dt() * noise;
}

double moment_modal(const FemOperators& ops, const CqWeightsPtr& weights, std::span<const double> x0,
                    const CovarianceSpec& cov, std::size_t N, std::size_t threads) {
    const GeneralizedEigenbasis basis(ops);
    const std::size_t n = basis.size();
    const Eigen::VectorXd x0_modal = basis.to_modal(ops, x0);
    Eigen::VectorXd noise_weight = Eigen::VectorXd::Zero(Eigen::Index(n));
    for (std::size_t j = 1; j <= cov.truncation(); ++j) {
        const double q = cov.q(j);
        if (q == 0.0) continue;
        noise_weight += q * basis.load_to_modal(load_vector_sine(ops.mesh, j)).cwiseAbs2();
    }
    if (weights->size() < N) throw std::out_of_range("exact_discrete_second_moment: weights exhausted");

    const double dt = weights->dt();
    std::vector<double> per_mode(n, 0.0);
    parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
        const std::size_t width = end - begin;
        std::vector<double> beta((N + 1) * width);
        std::vector<double> memory(width), squares(width, 0.0), denom(width), lambda(width);
        for (std::size_t m = 0; m < width; ++m) {
            lambda[m] = basis.eigenvalues()(Eigen::Index(begin + m));
            denom[m] = 1.0 + dt * (*weights)[0] * lambda[m];
            beta[m] = 1.0;
        }
        for (std::size_t step = 0; step < N; ++step) {
            std::fill(memory.begin(), memory.end(), 0.0);
            for (std::size_t k = 1; k <= step; ++k) {
                const double w = (*weights)[step + 1 - k];
                const double* bk = beta.data() + k * width;
                for (std::size_t m = 0; m < width; ++m) memory[m] += w * bk[m];
            }
            const double* prev = beta.data() + step * width;
            double* next = beta.data() + (step + 1) * width;
            for (std::size_t m = 0; m < width; ++m) {
                next[m] = (prev[m] - dt * lambda[m] * memory[m]) / denom[m];
                squares[m] += next[m] * next[m];
            }
        }
        const double* last = beta.data() + N * width;
        for (std::size_t m = 0; m < width; ++m) {
            const auto k = Eigen::Index(begin + m);
            const double propagated = x0_modal(k) * last[m];
            per_mode[begin + m] = propagated * propagated + dt * noise_weight(k) * squares[m];
        }
    });
    double total = 0.0;
    for (double v : per_mode) total += v;
    return total;
}

} // namespace

double exact_discrete_second_moment(const FemOperators& ops, CqWeightsPtr weights,
                                    std::span<const double> x0, const CovarianceSpec& cov,
                                    std::size_t N, const DiscreteMomentOptions& options) {
    if (x0.size() != ops.mesh.n_dof()) {
        throw std::invalid_argument("exact_discrete_second_moment: dimension mismatch");
    }
    if (cov.truncation() == 0 && cov.model() != CovarianceModel::custom) {
        throw std::invalid_argument("exact_discrete_second_moment: truncation J = 0 with nonzero Q");
    }
    if (options.route == MomentRoute::per_noise_mode) {
        return moment_per_noise_mode(ops, weights, x0, cov, N, options.threads);
    }
    return moment_modal(ops, weights, x0, cov, N, options.threads);
}

} // namespace volterra
