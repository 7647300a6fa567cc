#pragma once

#include <array>
#include <span>
#include <variant>
#include <vector>

#include "lowdim/vec3.hpp"

namespace lowdim {

/// Absolute tolerance for "point lies on a component" and junction loci.
inline constexpr double kGeometryTol = 1e-10;
/// Minimum angle (radians) between directions/planes for a transversal crossing.
inline constexpr double kTransversalAngle = 1e-8;

struct Segment {
    Vec3 p0;
    Vec3 p1;
};

/// Flat round disc. `e1`, `e2` span the disc plane and must be orthonormal.
struct Disc {
    Vec3 center;
    double radius = 1.0;
    Vec3 e1{1.0, 0.0, 0.0};
    Vec3 e2{0.0, 1.0, 0.0};

    Vec3 normal() const { return cross(e1, e2); }
};

/// One component manifold S_i: a straight segment (dim 1) or a flat disc (dim 2).
struct ComponentShape {
    int id = 0;
    std::variant<Segment, Disc> kind;

    int dim() const { return std::holds_alternative<Segment>(kind) ? 1 : 2; }
    bool is_segment() const { return dim() == 1; }
    const Segment& segment() const { return std::get<Segment>(kind); }
    const Disc& disc() const { return std::get<Disc>(kind); }

    /// Length for segments, area for discs.
    double measure() const;
    double diameter() const;
};

ComponentShape make_segment(int id, Vec3 p0, Vec3 p1);
/// Disc with the frame completed from its unit normal.
ComponentShape make_disc(int id, Vec3 center, double radius, Vec3 normal);
ComponentShape make_disc(int id, Vec3 center, double radius, Vec3 e1, Vec3 e2);

/// Component-local coordinates: (s, 0) on a segment, s the arclength parameter
/// centred at the midpoint; (x, y) in the disc frame relative to its centre.
std::array<double, 2> local_coordinates(const ComponentShape& shape, const Vec3& p);
Vec3 embed(const ComponentShape& shape, const std::array<double, 2>& local);

/// Outward unit normal of the component at a point of its boundary, in R^3.
Vec3 outward_normal(const ComponentShape& shape, const Vec3& boundary_point);

/// Distance from p to the component (as a closed set).
double distance_to(const ComponentShape& shape, const Vec3& p);

struct PointLocus {
    Vec3 p;
};

/// Chord shared by two discs; both endpoints lie on both rims.
struct CurveLocus {
    Vec3 a;
    Vec3 b;
};

struct Junction {
    int comp_a = 0;
    int comp_b = 0;
    std::variant<PointLocus, CurveLocus> locus;
    bool coupled = false;

    bool is_point() const { return std::holds_alternative<PointLocus>(locus); }
    const PointLocus& point() const { return std::get<PointLocus>(locus); }
    const CurveLocus& curve() const { return std::get<CurveLocus>(locus); }
    bool involves(int id) const { return comp_a == id || comp_b == id; }
    /// Distance from p to the locus.
    double distance_to(const Vec3& p) const;
};

struct ValidatedStructure {
    std::vector<ComponentShape> components;
    std::vector<Junction> junctions;
    double total_measure = 0.0;  // mu(Omega): total length plus total area
};

/// Partition I_1..I_d of the components into classes linked by coupled junctions.
struct KernelClasses {
    std::vector<std::vector<int>> classes;
    std::vector<int> class_of;  // component id -> class index

    int count() const { return static_cast<int>(classes.size()); }
};

/// Pairwise intersections of well-formed shapes. Throws NonTransversal for
/// tangency, containment, parallel overlap, or loci touching a boundary.
std::vector<Junction> compute_junctions(std::span<const ComponentShape> components);

/// Checks shapes, computes junctions, and rejects triple intersections.
/// Component ids must equal their position in the list.
ValidatedStructure validate_structure(std::vector<ComponentShape> components);

/// Connected components of the coupled-junction graph, ordered by smallest member.
KernelClasses coupling_classes(const ValidatedStructure& structure);

}  // namespace lowdim
