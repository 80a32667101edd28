#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace volterra {

/// Uniform partition of (0, L) with Dirichlet ends; unknowns are the
/// n_elem - 1 interior nodal values.
class Mesh1D {
public:
    Mesh1D(double length, std::size_t n_elem);

    double length() const noexcept { return length_; }
    std::size_t n_elem() const noexcept { return n_elem_; }
    std::size_t n_dof() const noexcept { return n_elem_ - 1; }
    double h() const noexcept { return length_ / double(n_elem_); }
    /// Coordinate of interior node i (0-based), i.e. (i + 1) h.
    double node(std::size_t i) const noexcept { return double(i + 1) * h(); }

private:
    double length_;
    std::size_t n_elem_;
};

/// Symmetric tridiagonal matrix: diag[0..n), off[0..n-1) with off[i] = A(i, i+1).
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const noexcept { return diag.size(); }
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;
    /// this + scale * other
    SymTridiag plus_scaled(const SymTridiag& other, double scale) const;
};

/// LDL^T factorization of an SPD tridiagonal matrix.
class TridiagonalSolver {
public:
    explicit TridiagonalSolver(const SymTridiag& matrix);

    std::size_t size() const noexcept { return d_.size(); }
    void solve_in_place(std::span<double> rhs) const;
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    std::vector<double> d_; // pivots
    std::vector<double> l_; // subdiagonal of the unit lower factor
};

/// Mass and stiffness matrices of the hat basis; A_h is the pencil (stiffness, mass).
struct FemOperators {
    Mesh1D mesh;
    SymTridiag mass;
    SymTridiag stiffness;
};

FemOperators assemble(const Mesh1D& mesh);

/// Dirichlet eigenpair of -d^2/dx^2 on (0, L): lambda_j = (j pi / L)^2.
double laplacian_eigenvalue(double length, std::size_t j);

/// Inner products (e_j, phi_i), e_j = sqrt(2/L) sin(j pi x / L), in closed form.
std::vector<double> load_vector_sine(const Mesh1D& mesh, std::size_t j);

/// Coefficients of P_h f given the load vector (f, phi_i).
std::vector<double> l2_project(const FemOperators& ops, std::span<const double> load);

double m_inner(const FemOperators& ops, std::span<const double> u, std::span<const double> v);

/// L2 norm of the finite element function with the given nodal coefficients.
double h_norm(const FemOperators& ops, std::span<const double> v);

/// Nodal interpolant of sum_k coeffs[k-1] e_k.
std::vector<double> interpolate_sine_series(const Mesh1D& mesh, std::span<const double> coeffs);

/// Exact embedding of a coarse piecewise-linear function into a nested finer mesh.
std::vector<double> prolongate(const Mesh1D& coarse, std::span<const double> v, const Mesh1D& fine);

/**
 * Dense generalized eigendecomposition K v = lambda M v with M-orthonormal
 * eigenvectors, eigenvalues ascending. Intended for n_dof <= 1024.
 */
class GeneralizedEigenbasis {
public:
    explicit GeneralizedEigenbasis(const FemOperators& ops);

    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }
    /// Column k is the k-th eigenvector (coefficient vector).
    const Eigen::MatrixXd& eigenvectors() const noexcept { return vectors_; }

    /// Modal coordinates of a coefficient vector: V^T M v.
    Eigen::VectorXd to_modal(const FemOperators& ops, std::span<const double> v) const;
    /// Modal coordinates of P_h f from its load vector: V^T b.
    Eigen::VectorXd load_to_modal(std::span<const double> load) const;
    std::vector<double> from_modal(const Eigen::VectorXd& modal) const;

private:
    Eigen::VectorXd values_;
    Eigen::MatrixXd vectors_;
};

/// A_h^s v through the (stiffness, mass) eigenbasis.
std::vector<double> discrete_fractional_apply(const FemOperators& ops, double s,
                                              std::span<const double> v);
std::vector<double> discrete_fractional_apply(const FemOperators& ops,
                                              const GeneralizedEigenbasis& basis, double s,
                                              std::span<const double> v);

} // namespace volterra
