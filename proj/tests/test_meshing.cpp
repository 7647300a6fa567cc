#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "lowdim/delaunay.hpp"
#include "lowdim/error.hpp"
#include "lowdim/meshing.hpp"

using namespace lowdim;

TEST_SUITE("meshing") {

TEST_CASE("delaunay triangulation of a square with a centre point") {
    const std::vector<delaunay::Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    const auto tris = delaunay::triangulate(pts);
    CHECK(tris.size() == 4);
    double area = 0.0;
    for (const auto& t : tris) {
        const double a = delaunay::orient(pts[t[0]], pts[t[1]], pts[t[2]]);
        CHECK(a > 0.0);
        area += 0.5 * a;
    }
    CHECK(area == doctest::Approx(1.0));
}

TEST_CASE("crossing segments at h = 0.5") {
    const Mesh m = build_mesh(fixtures::crossing_segments(), 0.5);
    CHECK(m.n_dofs == 9);
    REQUIRE(m.parts.size() == 2);
    for (const auto& part : m.parts) {
        REQUIRE(part.node_count() == 5);
        for (int i = 0; i < 5; ++i) CHECK(part.local[i][0] == doctest::Approx(-1.0 + 0.5 * i));
        CHECK(part.edges.size() == 4);
        CHECK(part.boundary_nodes == std::vector<int>{0, 4});
    }
    CHECK(m.parts[0].dofs[2] == m.parts[1].dofs[2]);
    const auto q = mesh_quality(m);
    CHECK_FALSE(q.min_angle_deg.has_value());
    CHECK(q.h_max == doctest::Approx(0.5));
    CHECK(q.max_aspect == 1.0);
}

TEST_CASE("interpolating the first segment's parameter") {
    const Mesh m = build_mesh(fixtures::crossing_segments(), 0.5);
    const auto u = interpolate(m, [](const PointContext& at) { return at.component == 0 ? at.local[0] : 0.0; });
    const std::vector<double> expected{-1, -0.5, 0, 0.5, 1, 0, 0, 0, 0};
    CHECK(u.values == expected);
    const auto ones = interpolate(m, [](const PointContext&) { return 1.0; });
    CHECK(std::all_of(ones.values.begin(), ones.values.end(), [](double v) { return v == 1.0; }));
}

TEST_CASE("crossing discs share one DOF per chord node") {
    const Mesh m = build_mesh(fixtures::crossing_discs(), 0.1);
    std::map<int, int> refs;
    for (const auto& part : m.parts) {
        for (int d : part.dofs) ++refs[d];
    }
    int shared = 0;
    for (int d = 0; d < m.n_dofs; ++d) {
        const Vec3& p = m.dof_points[d];
        const bool on_chord = std::abs(p.y) < 1e-12 && std::abs(p.z) < 1e-12;
        CHECK(on_chord == (refs[d] == 2));
        shared += refs[d] == 2 ? 1 : 0;
    }
    CHECK(shared >= 21);
    // Each chord node appears once per disc.
    for (const auto& part : m.parts) {
        std::set<int> seen(part.dofs.begin(), part.dofs.end());
        CHECK(seen.size() == part.dofs.size());
    }
    const auto q = mesh_quality(m);
    REQUIRE(q.min_angle_deg.has_value());
    CHECK(*q.min_angle_deg >= 20.0);
    CHECK(q.h_max <= 0.1 * 1.5);
}

TEST_CASE("uncoupled junction keeps distinct DOFs") {
    const std::vector<ComponentShape> comps{make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}),
                                            make_segment(1, {0, 0, -1}, {0, 0, 1})};
    const Mesh m = build_mesh(validate_structure(comps), 0.125);
    std::set<int> disc_dofs(m.parts[0].dofs.begin(), m.parts[0].dofs.end());
    for (int d : m.parts[1].dofs) CHECK(disc_dofs.count(d) == 0);
    // The segment keeps its own node at the junction point.
    int on_segment = 0;
    for (int d : m.parts[1].dofs) on_segment += norm(m.dof_points[d]) < 1e-12 ? 1 : 0;
    CHECK(on_segment == 1);
}

TEST_CASE("glued w and zero is discontinuous on the chord") {
    const Mesh m = build_mesh(fixtures::crossing_discs(), 0.1);
    const auto w = [](const PointContext& at) {
        const double r2 = at.local[0] * at.local[0] + at.local[1] * at.local[1];
        return at.component == 0 ? std::cos(fixtures::kPi * r2) : 0.0;
    };
    CHECK_THROWS_AS(interpolate(m, w), Error);
    try {
        interpolate(m, w);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::JunctionMismatch);
    }
}

TEST_CASE("built disc meshes satisfy the angle bound across sizes") {
    for (double h : {0.25, 0.1, 0.05, 0.03}) {
        const auto q = mesh_quality(build_mesh(fixtures::single_disc(), h));
        REQUIRE(q.min_angle_deg.has_value());
        CHECK(*q.min_angle_deg >= 20.0);
    }
}

TEST_CASE("mesh size outside the admissible range") {
    CHECK_THROWS_AS(build_mesh(fixtures::crossing_segments(), 0.0), Error);
    CHECK_THROWS_AS(build_mesh(fixtures::crossing_segments(), 1.5), Error);
}

TEST_CASE("dof classes follow the coupling classes") {
    const auto s = fixtures::disc_with_segment();
    const Mesh m = build_mesh(s, 0.1);
    const auto cls = dof_classes(m, coupling_classes(s));
    for (int d : m.parts[0].dofs) CHECK(cls[d] == 0);
    for (int d : m.parts[1].dofs) CHECK(cls[d] == 1);
    const DiscreteField u = interpolate(m, [](const PointContext& at) { return at.component + 1.0; });
    const auto on_segment = restrict_to(m, u, 1);
    CHECK(on_segment.size() == m.parts[1].dofs.size());
    CHECK(std::all_of(on_segment.begin(), on_segment.end(), [](double v) { return v == 2.0; }));
}

}
