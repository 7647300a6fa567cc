#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "lowdim/geometry.hpp"
#include "lowdim/vec3.hpp"

namespace lowdim {

/// P1 mesh of one component. Segment nodes are sorted by arclength parameter;
/// disc triangles are counter-clockwise in the disc frame.
struct ComponentMesh {
    int component = 0;
    int dim = 1;
    std::vector<std::array<double, 2>> local;  // (s, 0) on segments, frame (x, y) on discs
    std::vector<Vec3> points;                   // embedding in R^3
    std::vector<std::array<int, 2>> edges;      // 1D elements
    std::vector<std::array<int, 3>> triangles;  // 2D elements
    std::vector<int> dofs;                      // local node -> global DOF
    std::vector<int> boundary_nodes;            // local nodes on the component boundary

    int node_count() const { return static_cast<int>(local.size()); }
};

/// Junction-coupled P1 space over the whole structure.
struct Mesh {
    std::vector<ComponentShape> shapes;  // copy of the meshed components
    std::vector<ComponentMesh> parts;    // indexed by component id
    int n_dofs = 0;
    std::vector<Vec3> dof_points;
    std::vector<int> dof_owner;  // first component referencing each DOF
    double h = 0.0;              // requested element size
};

/// Nodal coefficient vector over the global DOFs.
struct DiscreteField {
    std::vector<double> values;

    DiscreteField() = default;
    explicit DiscreteField(std::vector<double> v) : values(std::move(v)) {}
    explicit DiscreteField(std::size_t n, double fill = 0.0) : values(n, fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Where a nodal function is evaluated.
struct PointContext {
    int component = 0;
    int dim = 1;
    std::array<double, 2> local{};
    Vec3 point;
};

using NodalFunction = std::function<double(const PointContext&)>;

struct MeshQuality {
    std::optional<double> min_angle_deg;  // absent when there are no triangles
    double max_aspect = 1.0;              // 1 for equilateral triangles and for line elements
    double h_max = 0.0;                   // longest element edge
    int n_dofs = 0;
};

/// Builds per-component meshes and merges coincident nodes on coupled junctions.
/// Throws DomainError for h outside (0, min diameter / 4], MeshQualityFailure,
/// or JunctionResolutionFailure.
Mesh build_mesh(const ValidatedStructure& structure, double h);

MeshQuality mesh_quality(const Mesh& mesh);

/// Nodal interpolant; throws JunctionMismatch when the values at a merged node
/// disagree by more than 1e-9.
DiscreteField interpolate(const Mesh& mesh, const NodalFunction& f);

/// Values of a global field at the local nodes of one component.
std::vector<double> restrict_to(const Mesh& mesh, const DiscreteField& u, int component);

/// Class index of every DOF.
std::vector<int> dof_classes(const Mesh& mesh, const KernelClasses& classes);

}  // namespace lowdim
