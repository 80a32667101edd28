#include "volterra/fem1d.hpp"

#include "volterra/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace volterra {

namespace {

void require_size(std::size_t got, std::size_t want, const char* where) {
    if (got != want) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(got) + " vs " + std::to_string(want) + ")");
    }
}

} // namespace

Mesh1D::Mesh1D(double length, std::size_t n_elem) : length_(length), n_elem_(n_elem) {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw std::invalid_argument("Mesh1D: length must be positive");
    }
    if (n_elem < 2) throw std::invalid_argument("Mesh1D: need at least two elements");
}

void SymTridiag::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    require_size(x.size(), n, "SymTridiag::apply");
    require_size(y.size(), n, "SymTridiag::apply");
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + off[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        y[i] = off[i - 1] * x[i - 1] + diag[i] * x[i] + off[i] * x[i + 1];
    }
    y[n - 1] = off[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

std::vector<double> SymTridiag::apply(std::span<const double> x) const {
    std::vector<double> y(size());
    apply(x, y);
    return y;
}

SymTridiag SymTridiag::plus_scaled(const SymTridiag& other, double scale) const {
    require_size(other.size(), size(), "SymTridiag::plus_scaled");
    SymTridiag out = *this;
    for (std::size_t i = 0; i < diag.size(); ++i) out.diag[i] += scale * other.diag[i];
    for (std::size_t i = 0; i < off.size(); ++i) out.off[i] += scale * other.off[i];
    return out;
}

TridiagonalSolver::TridiagonalSolver(const SymTridiag& matrix)
    : d_(matrix.size()), l_(matrix.size() > 0 ? matrix.size() - 1 : 0) {
    const std::size_t n = matrix.size();
    if (n == 0) throw std::invalid_argument("TridiagonalSolver: empty matrix");
    d_[0] = matrix.diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (!(d_[i - 1] > 0.0)) throw NumericalError("TridiagonalSolver: matrix is not positive definite");
        l_[i - 1] = matrix.off[i - 1] / d_[i - 1];
        d_[i] = matrix.diag[i] - l_[i - 1] * matrix.off[i - 1];
    }
    if (!(d_[n - 1] > 0.0)) throw NumericalError("TridiagonalSolver: matrix is not positive definite");
}

void TridiagonalSolver::solve_in_place(std::span<double> rhs) const {
    const std::size_t n = d_.size();
    require_size(rhs.size(), n, "TridiagonalSolver::solve");
    for (std::size_t i = 1; i < n; ++i) rhs[i] -= l_[i - 1] * rhs[i - 1];
    for (std::size_t i = 0; i < n; ++i) rhs[i] /= d_[i];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= l_[i] * rhs[i + 1];
}

std::vector<double> TridiagonalSolver::solve(std::span<const double> rhs) const {
    std::vector<double> x(rhs.begin(), rhs.end());
    solve_in_place(x);
    return x;
}

FemOperators assemble(const Mesh1D& mesh) {
    const std::size_t n = mesh.n_dof();
    const double h = mesh.h();
    FemOperators ops{mesh, {}, {}};
    ops.mass.diag.assign(n, 2.0 * h / 3.0);
    ops.mass.off.assign(n - 1, h / 6.0);
    ops.stiffness.diag.assign(n, 2.0 / h);
    ops.stiffness.off.assign(n - 1, -1.0 / h);
    return ops;
}

double laplacian_eigenvalue(double length, std::size_t j) {
    const double k = double(j) * std::numbers::pi / length;
    return k * k;
}

std::vector<double> load_vector_sine(const Mesh1D& mesh, std::size_t j) {
    if (j == 0) throw std::invalid_argument("load_vector_sine: mode index starts at 1");
    const double length = mesh.length();
    const double h = mesh.h();
    const double k = double(j) * std::numbers::pi / length;
    // 2 - 2 cos(kh) = 4 sin^2(kh/2) avoids cancellation for small kh.
    const double s = std::sin(0.5 * k * h);
    const double factor = std::sqrt(2.0 / length) * 4.0 * s * s / (k * k * h);
    std::vector<double> load(mesh.n_dof());
    for (std::size_t i = 0; i < load.size(); ++i) load[i] = factor * std::sin(k * mesh.node(i));
    return load;
}

std::vector<double> l2_project(const FemOperators& ops, std::span<const double> load) {
    require_size(load.size(), ops.mesh.n_dof(), "l2_project");
    return TridiagonalSolver(ops.mass).solve(load);
}

double m_inner(const FemOperators& ops, std::span<const double> u, std::span<const double> v) {
    require_size(u.size(), ops.mesh.n_dof(), "m_inner");
    const auto mv = ops.mass.apply(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * mv[i];
    return acc;
}

double h_norm(const FemOperators& ops, std::span<const double> v) {
    return std::sqrt(std::max(0.0, m_inner(ops, v, v)));
}

std::vector<double> interpolate_sine_series(const Mesh1D& mesh, std::span<const double> coeffs) {
    std::vector<double> out(mesh.n_dof(), 0.0);
    const double scale = std::sqrt(2.0 / mesh.length());
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        if (coeffs[m] == 0.0) continue;
        const double k = double(m + 1) * std::numbers::pi / mesh.length();
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += coeffs[m] * scale * std::sin(k * mesh.node(i));
        }
    }
    return out;
}

std::vector<double> prolongate(const Mesh1D& coarse, std::span<const double> v, const Mesh1D& fine) {
    require_size(v.size(), coarse.n_dof(), "prolongate");
    if (fine.n_elem() % coarse.n_elem() != 0 || fine.length() != coarse.length()) {
        throw std::invalid_argument("prolongate: meshes are not nested");
    }
    const std::size_t ratio = fine.n_elem() / coarse.n_elem();
    auto coarse_value = [&](std::size_t node) { // node index including boundary
        return (node == 0 || node == coarse.n_elem()) ? 0.0 : v[node - 1];
    };
    std::vector<double> out(fine.n_dof());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t node = i + 1;
        const std::size_t left = node / ratio;
        const std::size_t offset = node % ratio;
        const double t = double(offset) / double(ratio);
        out[i] = offset == 0 ? coarse_value(left)
                             : (1.0 - t) * coarse_value(left) + t * coarse_value(left + 1);
    }
    return out;
}

namespace {

Eigen::MatrixXd dense(const SymTridiag& a) {
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = a.diag[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            m(i, i + 1) = a.off[static_cast<std::size_t>(i)];
            m(i + 1, i) = a.off[static_cast<std::size_t>(i)];
        }
    }
    return m;
}

} // namespace

GeneralizedEigenbasis::GeneralizedEigenbasis(const FemOperators& ops) {
    if (ops.mesh.n_dof() > 1024) {
        throw std::invalid_argument("GeneralizedEigenbasis: n_dof above dense eigensolve limit 1024");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense(ops.stiffness),
                                                                    dense(ops.mass));
    if (solver.info() != Eigen::Success) {
        throw NumericalError("GeneralizedEigenbasis: eigensolve failed");
    }
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
}

Eigen::VectorXd GeneralizedEigenbasis::to_modal(const FemOperators& ops,
                                                std::span<const double> v) const {
    const auto mv = ops.mass.apply(v);
    return vectors_.transpose() * Eigen::Map<const Eigen::VectorXd>(mv.data(), Eigen::Index(mv.size()));
}

Eigen::VectorXd GeneralizedEigenbasis::load_to_modal(std::span<const double> load) const {
    require_size(load.size(), size(), "GeneralizedEigenbasis::load_to_modal");
    return vectors_.transpose() *
           Eigen::Map<const Eigen::VectorXd>(load.data(), Eigen::Index(load.size()));
}

std::vector<double> GeneralizedEigenbasis::from_modal(const Eigen::VectorXd& modal) const {
    const Eigen::VectorXd v = vectors_ * modal;
    return {v.data(), v.data() + v.size()};
}

std::vector<double> discrete_fractional_apply(const FemOperators& ops,
                                              const GeneralizedEigenbasis& basis, double s,
                                              std::span<const double> v) {
    require_size(v.size(), basis.size(), "discrete_fractional_apply");
    Eigen::VectorXd modal = basis.to_modal(ops, v);
    for (Eigen::Index k = 0; k < modal.size(); ++k) {
        modal(k) *= std::pow(basis.eigenvalues()(k), s);
    }
    return basis.from_modal(modal);
}

std::vector<double> discrete_fractional_apply(const FemOperators& ops, double s,
                                              std::span<const double> v) {
    return discrete_fractional_apply(ops, GeneralizedEigenbasis(ops), s, v);
}

} // namespace volterra
