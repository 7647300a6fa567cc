#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lowdim/assembly.hpp"
#include "lowdim/error.hpp"
#include "lowdim/linalg.hpp"
#include "lowdim/sparse_matrix.hpp"

using namespace lowdim;

namespace {

// Random sparse SPD: graph Laplacian of a random graph plus a positive diagonal.
SparseMatrixSym random_spd(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(0.1, 1.0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) t.push_back({i, i, w(rng)});
    for (int e = 0; e < 4 * n; ++e) {
        const int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        const double v = w(rng);
        t.push_back({i, i, v});
        t.push_back({j, j, v});
        t.push_back({std::min(i, j), std::max(i, j), -v});
    }
    return SparseMatrixSym::from_triplets(n, t);
}

double a_norm_error(const SparseMatrixSym& A, const Vector& x, const Vector& ref) {
    Vector e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) e[i] = x[i] - ref[i];
    return std::sqrt(A.bilinear(e, e));
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("diagonal system") {
    const int n = 50;
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) t.push_back({i, i, double(i + 1)});
    const auto A = SparseMatrixSym::from_triplets(n, t);
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = std::sin(i + 1.0);
    const auto [x, rep] = cg_solve(A, b);
    CHECK(rep.converged);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(b[i] / (i + 1)).epsilon(1e-10));
}

TEST_CASE("CG agrees with the dense LDLT path on random SPD systems") {
    std::mt19937_64 rng(17);
    for (int n : {5, 40, 120, 200}) {
        const auto A = random_spd(n, rng);
        Vector b(n);
        std::normal_distribution<double> g;
        for (double& v : b) v = g(rng);
        const auto [x, rep] = cg_solve(A, b, {.tol = 1e-13});
        const auto ref = dense_ldlt_solve(DenseMatrix::from_sparse(A), b);
        double diff = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i) {
            diff = std::max(diff, std::abs(x[i] - ref[i]));
            scale = std::max(scale, std::abs(ref[i]));
        }
        CHECK(diff <= 1e-8 * scale);
    }
}

TEST_CASE("A-norm error decreases with the iteration count") {
    std::mt19937_64 rng(3);
    const auto A = random_spd(150, rng);
    Vector b(150, 1.0);
    const auto ref = dense_ldlt_solve(DenseMatrix::from_sparse(A), b);
    double prev = INFINITY;
    int prev_its = -1;
    for (double tol : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
        const auto [x, rep] = cg_solve(A, b, {.tol = tol});
        const double err = a_norm_error(A, x, ref);
        if (rep.iterations > prev_its) CHECK(err <= prev * (1 + 1e-12));
        prev = err;
        prev_its = rep.iterations;
    }
    CHECK(prev < 1e-9);
}

TEST_CASE("semidefinite system with a kernel") {
    const Mesh m = build_mesh(fixtures::crossing_segments(), 0.0625);
    const auto K = assemble_stiffness(m, CoefficientMatrixB::identity());
    const auto M = assemble_mass(m);
    const auto load = assemble_load(m, [](const PointContext& at, double) { return at.component == 0 ? at.local[0] : 0.0; }, 0.0);
    const Vector one(K.size(), 1.0);
    CgOptions opts;
    opts.tol = 1e-13;
    opts.kernel = {one};
    const auto [x, rep] = cg_solve(K, load.values, opts);
    CHECK(rep.converged);
    CHECK(std::abs(dot(x, one)) < 1e-10);

    // Dense oracle: pin one DOF, then remove the Euclidean mean.
    const int n = K.size();
    DenseMatrix D = DenseMatrix::from_sparse(K);
    Vector b = load.values;
    D(0, 0) += 1e3;
    auto ref = dense_ldlt_solve(D, b);
    double mean = 0.0;
    for (double v : ref) mean += v / n;
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(x[i] - (ref[i] - mean)));
    CHECK(diff < 1e-8);

    // A kernel right-hand side is rejected in strict mode.
    CgOptions strict = opts;
    strict.strict = true;
    Vector ind(n, 1.0);
    try {
        cg_solve(K, ind, strict);
        FAIL("expected IncompatibleRHS");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IncompatibleRHS);
    }
    (void)M;
}

TEST_CASE("iteration cap raises NoConvergence") {
    std::mt19937_64 rng(5);
    const auto A = random_spd(100, rng);
    const Vector b(100, 1.0);
    CgOptions opts;
    opts.max_iterations = 2;
    try {
        cg_solve(A, b, opts);
        FAIL("expected NoConvergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoConvergence);
    }
}

TEST_CASE("eigenpairs agree with the dense generalized eigensolver") {
    for (auto structure : {fixtures::crossing_segments(), fixtures::disc_with_segment()}) {
        const double h = structure.components.size() == 2 && structure.components[0].dim() == 2 ? 0.3 : 0.0625;
        const Mesh m = build_mesh(structure, h);
        REQUIRE(m.n_dofs <= 200);
        const auto K = assemble_stiffness(m, CoefficientMatrixB::identity());
        const auto M = assemble_mass(m);
        const auto dense = dense_generalized_eigenvalues(DenseMatrix::from_sparse(K), DenseMatrix::from_sparse(M));
        const int count = 6;
        const auto pairs = smallest_eigenpairs(K, M, count);
        REQUIRE(pairs.size() == count);
        for (int i = 0; i < count; ++i) {
            CHECK(std::abs(pairs[i].value - dense[i]) <= 1e-8 * std::max(1.0, std::abs(dense[i])));
            CHECK(pairs[i].value >= -1e-10);
            for (int j = 0; j < count; ++j) {
                const double mij = M.bilinear(pairs[i].vector, pairs[j].vector);
                CHECK(std::abs(mij - (i == j ? 1.0 : 0.0)) <= 1e-8);
            }
        }
    }
}

TEST_CASE("interval spectrum") {
    const Mesh m = build_mesh(fixtures::single_segment(), 2.0 / 256);
    const auto pairs =
        smallest_eigenpairs(assemble_stiffness(m, CoefficientMatrixB::identity()), assemble_mass(m), 2);
    CHECK(std::abs(pairs[0].value) < 1e-10);
    // Dense P1 reference (tools/oracle.py): 2.4674320659521003.
    CHECK(pairs[1].value == doctest::Approx(2.4674320659521003).epsilon(1e-8));
    CHECK(std::abs(pairs[1].value / (fixtures::kPi * fixtures::kPi / 4) - 1) < 0.01);
}

TEST_CASE("disc plus uncoupled segment has a two-dimensional kernel") {
    const Mesh m = build_mesh(fixtures::disc_with_segment(), 0.05);
    const auto pairs =
        smallest_eigenpairs(assemble_stiffness(m, CoefficientMatrixB::identity()), assemble_mass(m), 3);
    CHECK(std::abs(pairs[0].value) < 1e-8);
    CHECK(std::abs(pairs[1].value) < 1e-8);
    CHECK(pairs[2].value > 1.0);
}

}
