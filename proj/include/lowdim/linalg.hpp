#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lowdim/sparse_matrix.hpp"

namespace lowdim {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;  // ||b - A x||_2 / ||b||_2
    bool converged = false;
};

struct CgOptions {
    double tol = 1e-10;
    /// Defaults to ceil(50 sqrt(n)).
    std::optional<int> max_iterations;
    std::optional<Vector> initial_guess;
    /// Known null-space vectors of A. The right-hand side is orthogonalised
    /// against them before iterating and so is the returned solution.
    std::vector<Vector> kernel;
    /// Inner product for the kernel projections: Euclidean when null, else u^T W v.
    const SparseMatrixSym* kernel_weight = nullptr;
    /// Reject right-hand sides whose kernel component exceeds 1e-8 ||b||.
    bool strict = false;
    /// Also stop once ||b - Ax|| reaches the rounding floor 64 eps ||A||_inf ||x||.
    /// Used by the shifted inner solves of the eigen-iteration, whose systems are
    /// nearly singular by construction; `converged` then refers to that floor.
    bool accept_rounding_floor = false;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// (semi)definite A. Throws NoConvergence when the iteration cap is hit and
/// IncompatibleRHS in strict mode.
std::pair<Vector, SolveReport> cg_solve(const SparseMatrixSym& A, std::span<const double> b,
                                        const CgOptions& options = {});

struct Eigenpair {
    double value = 0.0;
    Vector vector;
    double residual = 0.0;  // ||K v - lambda M v||_2
};

struct EigenOptions {
    double tol = 1e-8;
    int max_iterations = 500;
    std::uint64_t seed = 0x5eed;
    /// Extra block vectors beyond `count`; more guards speed up convergence.
    int guard_vectors = 4;
};

/// Smallest generalized eigenpairs of K v = lambda M v (K PSD, M SPD) by
/// blocked inverse iteration with Rayleigh-Ritz. Vectors are M-orthonormal,
/// values ascending. A pair is accepted when ||Kv - lambda Mv|| <= tol ||Kv||,
/// or when the residual is at the rounding floor 1e3 eps ||K||_inf ||v||.
std::vector<Eigenpair> smallest_eigenpairs(const SparseMatrixSym& K, const SparseMatrixSym& M, int count,
                                           const EigenOptions& options = {});

// ---------------------------------------------------------------------------
// Dense reference paths. These share no code with the iterative solvers and
// serve as oracles for small systems (n <= 500).

/// Row-major dense square matrix.
struct DenseMatrix {
    int n = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    explicit DenseMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
    static DenseMatrix from_sparse(const SparseMatrixSym& s);

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// Solves A x = b for symmetric positive definite A by an LDL^T factorisation
/// without pivoting. Throws DomainError on a non-positive pivot or n > 500.
Vector dense_ldlt_solve(const DenseMatrix& A, std::span<const double> b);

/// All generalized eigenvalues of (K, M), ascending: Cholesky reduction,
/// Householder tridiagonalisation, and Sturm-sequence bisection.
Vector dense_generalized_eigenvalues(const DenseMatrix& K, const DenseMatrix& M);

}  // namespace lowdim
