#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "lowdim/assembly.hpp"
#include "lowdim/error.hpp"
#include "lowdim/meshing.hpp"
#include "lowdim/sparse_matrix.hpp"

using namespace lowdim;

namespace {

double total(const SparseMatrixSym& M) {
    const std::vector<double> one(M.size(), 1.0);
    return M.bilinear(one, one);
}

double sum(const DiscreteField& v) { return std::accumulate(v.values.begin(), v.values.end(), 0.0); }

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("sparse symmetric storage") {
    const auto A = SparseMatrixSym::from_triplets(3, {{0, 0, 2}, {1, 0, -1}, {0, 1, -1}, {1, 1, 2}, {2, 2, 1}, {2, 2, 1}});
    CHECK(A(0, 1) == -2.0);
    CHECK(A(1, 0) == -2.0);
    CHECK(A(2, 2) == 2.0);
    CHECK(A.trace() == 6.0);
    const auto y = A.multiply(std::vector<double>{1, 1, 1});
    CHECK(y == std::vector<double>{0, 0, 2});
    const auto B = SparseMatrixSym::combine(2.0, A, -1.0, A);
    CHECK(B.to_dense() == A.to_dense());
    const std::vector<int> idx{0, 2};
    const auto S = A.submatrix(idx);
    CHECK(S.size() == 2);
    CHECK(S(0, 0) == 2.0);
    CHECK(S(0, 1) == 0.0);
}

TEST_CASE("mass totals equal the measure") {
    CHECK(total(assemble_mass(build_mesh(fixtures::single_segment(), 0.25))) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(total(assemble_mass(build_mesh(fixtures::crossing_segments(), 0.25))) == doctest::Approx(4.0).epsilon(1e-14));
    // Polygonal discs keep the exact area.
    CHECK(total(assemble_mass(build_mesh(fixtures::crossing_discs(), 0.1))) ==
          doctest::Approx(2 * fixtures::kPi).epsilon(1e-10));
}

TEST_CASE("1D stiffness is the standard P1 matrix") {
    const Mesh m = build_mesh(fixtures::single_segment(), 0.5);
    const auto K = assemble_stiffness(m, CoefficientMatrixB::identity());
    REQUIRE(K.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(K(i, i) == doctest::Approx(i == 0 || i == 4 ? 2.0 : 4.0));
        if (i < 4) CHECK(K(i, i + 1) == doctest::Approx(-2.0));
        if (i < 3) CHECK(K(i, i + 2) == 0.0);
    }
    const std::vector<double> one(5, 1.0);
    for (double v : K.multiply(one)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("stiffness annihilates class constants and sees only the tangent part of B") {
    const Mesh m = build_mesh(fixtures::crossing_discs(), 0.15);
    const auto K = assemble_stiffness(m, CoefficientMatrixB::identity());
    const std::vector<double> one(K.size(), 1.0);
    for (double v : K.multiply(one)) CHECK(std::abs(v) < 1e-12);

    // A large normal-normal entry on the first disc's normal (z) changes nothing there.
    Mat3 b{};
    b[0][0] = b[1][1] = 1.0;
    b[2][2] = 50.0;
    const Mesh disc = build_mesh(fixtures::single_disc(), 0.15);
    const auto K1 = assemble_stiffness(disc, CoefficientMatrixB::identity());
    const auto K2 = assemble_stiffness(disc, CoefficientMatrixB::constant(b, 1.0));
    const auto d1 = K1.to_dense(), d2 = K2.to_dense();
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == doctest::Approx(d2[i]).epsilon(1e-13));
}

TEST_CASE("non-elliptic coefficient is rejected") {
    Mat3 b{};
    b[0][0] = b[1][1] = b[2][2] = 0.5;
    const Mesh m = build_mesh(fixtures::single_segment(), 0.5);
    CHECK_THROWS_AS(assemble_stiffness(m, CoefficientMatrixB::constant(b, 1.0)), Error);
    Mat3 asym{};
    asym[0][0] = asym[1][1] = asym[2][2] = 2.0;
    asym[0][1] = 0.5;
    CHECK_THROWS_AS(assemble_stiffness(m, {[asym](const Vec3&) { return asym; }, 1.0}), Error);
}

TEST_CASE("load vectors") {
    const Mesh segs = build_mesh(fixtures::crossing_segments(), 0.125);
    CHECK(sum(assemble_load(segs, [](const PointContext&, double) { return 0.0; }, 0.0)) == 0.0);
    const auto ly = assemble_load(segs, [](const PointContext& at, double) { return at.component == 0 ? at.local[0] : 0.0; }, 0.0);
    CHECK(std::abs(sum(ly)) < 1e-14);
    const Mesh disc = build_mesh(fixtures::single_disc(), 0.1);
    CHECK(sum(assemble_load(disc, [](const PointContext&, double) { return 1.0; }, 0.0)) ==
          doctest::Approx(fixtures::kPi).epsilon(1e-10));
    // Time enters through the source.
    CHECK(sum(assemble_load(disc, [](const PointContext&, double t) { return t; }, 2.0)) ==
          doctest::Approx(2 * fixtures::kPi).epsilon(1e-10));
}

TEST_CASE("class integrals on the exact shapes") {
    const auto s = fixtures::crossing_discs();
    const auto classes = coupling_classes(s);
    const auto lap_w = [](const PointContext& at, double) {
        if (at.component != 0) return 0.0;
        const double r2 = at.local[0] * at.local[0] + at.local[1] * at.local[1];
        const double pi = fixtures::kPi;
        return -4 * pi * std::sin(pi * r2) - 4 * pi * pi * r2 * std::cos(pi * r2);
    };
    const auto ints = class_integrals(s.components, classes, lap_w, 0.0);
    REQUIRE(ints.size() == 1);
    CHECK(std::abs(ints[0].first) < 1e-10 * ints[0].second);
    CHECK(ints[0].second > 1.0);
}

TEST_CASE("class mean projection") {
    const auto segs = fixtures::crossing_segments();
    const Mesh m = build_mesh(segs, 0.125);
    const auto classes = coupling_classes(segs);
    const DiscreteField c(static_cast<std::size_t>(m.n_dofs), 3.5);
    for (double v : class_mean_project(m, classes, c).values) CHECK(v == doctest::Approx(3.5));
    const auto y = interpolate(m, [](const PointContext& at) { return at.component == 0 ? at.local[0] : 0.0; });
    for (double v : class_mean_project(m, classes, y).values) CHECK(std::abs(v) < 1e-15);

    const auto mixed = fixtures::disc_with_segment();
    const Mesh mm = build_mesh(mixed, 0.1);
    const auto u = interpolate(mm, [](const PointContext& at) { return at.component == 0 ? 1.0 : 3.0; });
    const auto p = class_mean_project(mm, coupling_classes(mixed), u);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(p[i] == doctest::Approx(u[i]));

    const ClassProjector proj(assemble_mass(mm), dof_classes(mm, coupling_classes(mixed)), 2);
    CHECK(proj.measure(0) == doctest::Approx(fixtures::kPi).epsilon(1e-10));
    CHECK(proj.measure(1) == doctest::Approx(2.0));
    const auto r = proj.remove_means(u);
    for (double v : r.values) CHECK(std::abs(v) < 1e-14);
}

}
