#include "lowdim/meshing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <string>

#include "lowdim/delaunay.hpp"
#include "lowdim/error.hpp"

namespace lowdim {

namespace {

using delaunay::Point2;

[[noreturn]] void fail(ErrorKind kind, const std::string& message) { throw Error(kind, "meshing", message); }

constexpr double kMinAngleDeg = 20.0;
constexpr double kMergeTol = 1e-10;

int pieces(double length, double h) { return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9))); }

double triangle_min_angle_deg(const Point2& a, const Point2& b, const Point2& c) {
    auto angle = [](const Point2& p, const Point2& q, const Point2& r) {
        const double ux = q[0] - p[0], uy = q[1] - p[1];
        const double vx = r[0] - p[0], vy = r[1] - p[1];
        return std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
    };
    const double m = std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
    return m * 180.0 / std::numbers::pi;
}

// Deterministic jitter in [-1, 1] from an index.
double jitter(std::uint64_t i) {
    std::uint64_t z = i + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
}

ComponentMesh mesh_segment(const ComponentShape& shape, const std::vector<Junction>& junctions, double h) {
    const double len = shape.measure();
    std::vector<std::pair<double, std::optional<Vec3>>> fixed{{-0.5 * len, shape.segment().p0},
                                                              {0.5 * len, shape.segment().p1}};
    for (const auto& j : junctions) {
        if (!j.involves(shape.id) || !j.is_point()) continue;
        fixed.emplace_back(local_coordinates(shape, j.point().p)[0], j.point().p);
    }
    std::sort(fixed.begin(), fixed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    ComponentMesh m;
    m.component = shape.id;
    m.dim = 1;
    auto add_node = [&](double s, const std::optional<Vec3>& exact) {
        m.local.push_back({s, 0.0});
        m.points.push_back(exact ? *exact : embed(shape, {s, 0.0}));
    };
    add_node(fixed.front().first, fixed.front().second);
    for (std::size_t k = 1; k < fixed.size(); ++k) {
        const double a = fixed[k - 1].first;
        const double b = fixed[k].first;
        if (b - a <= 1e-12) continue;
        const int n = pieces(b - a, h);
        for (int i = 1; i < n; ++i) add_node(a + (b - a) * i / n, std::nullopt);
        add_node(b, fixed[k].second);
    }
    for (int i = 0; i + 1 < m.node_count(); ++i) m.edges.push_back({i, i + 1});
    m.boundary_nodes = {0, m.node_count() - 1};
    return m;
}

// Junction-aligned triangulation of a disc. Chords split the disc into convex
// regions; each region is triangulated separately so chord edges are always
// mesh edges and chord nodes are shared between neighbouring regions.
class DiscMesher {
public:
    DiscMesher(const ComponentShape& shape, const std::vector<Junction>& junctions, double h)
        : shape_(shape), disc_(shape.disc()), h_(h) {
        for (const auto& j : junctions) {
            if (j.involves(shape.id) && !j.is_point()) chords_.push_back(&j.curve());
        }
    }

    ComponentMesh build() {
        for (double alpha : {0.6, 0.5, 0.7, 0.55, 0.65}) {
            for (int smoothing : {6, 12}) {
                ComponentMesh m = attempt(alpha, smoothing);
                if (min_angle(m) >= kMinAngleDeg) return m;
            }
        }
        fail(ErrorKind::MeshQualityFailure,
             "disc component " + std::to_string(shape_.id) + " violates the minimum angle bound");
    }

private:
    struct ChordLine {
        Point2 a, b;
        double length;
    };

    ComponentMesh attempt(double alpha, int smoothing_steps) {
        nodes_.clear();
        exact_.clear();
        sig_.clear();
        free_.clear();
        lines_.clear();
        const double R = disc_.radius;
        const std::size_t nc = chords_.size();

        // Chord nodes, placed in R^3 from the junction so both discs agree exactly.
        std::vector<std::pair<double, int>> rim_fixed;  // (angle, node)
        chord_nodes_.assign(nc, {});
        for (std::size_t k = 0; k < nc; ++k) {
            const Vec3 a = chords_[k]->a;
            const Vec3 b = chords_[k]->b;
            const int n = pieces(distance(a, b), h_);
            for (int i = 0; i <= n; ++i) {
                const Vec3 p = (i == n) ? b : a + (static_cast<double>(i) / n) * (b - a);
                chord_nodes_[k].push_back(add_node(local_coordinates(shape_, p), p));
            }
            const auto la = nodes_[chord_nodes_[k].front()];
            const auto lb = nodes_[chord_nodes_[k].back()];
            lines_.push_back({la, lb, std::hypot(lb[0] - la[0], lb[1] - la[1])});
            rim_fixed.emplace_back(std::atan2(la[1], la[0]), chord_nodes_[k].front());
            rim_fixed.emplace_back(std::atan2(lb[1], lb[0]), chord_nodes_[k].back());
        }

        // Rim nodes. Intermediate nodes sit at a radius chosen so each arc's
        // polygon keeps the exact sector area, making the discrete area pi R^2.
        rim_nodes_.clear();
        if (rim_fixed.empty()) {
            const int m = std::max(8, pieces(2.0 * std::numbers::pi * R, h_));
            const double rho = R * std::sqrt(2.0 * std::numbers::pi / (m * std::sin(2.0 * std::numbers::pi / m)));
            for (int i = 0; i < m; ++i) {
                const double t = 2.0 * std::numbers::pi * i / m;
                rim_nodes_.push_back(add_node({rho * std::cos(t), rho * std::sin(t)}, std::nullopt));
            }
        } else {
            std::sort(rim_fixed.begin(), rim_fixed.end());
            for (std::size_t f = 0; f < rim_fixed.size(); ++f) {
                const double t0 = rim_fixed[f].first;
                double t1 = (f + 1 < rim_fixed.size()) ? rim_fixed[f + 1].first : rim_fixed[0].first;
                if (f + 1 == rim_fixed.size()) t1 += 2.0 * std::numbers::pi;
                const double arc = t1 - t0;
                const int m = std::max(2, pieces(R * arc, h_));
                const double dt = arc / m;
                const double s = std::sin(dt);
                double rho = 0.0;
                if (m == 2) {
                    rho = R * dt / s;
                } else {
                    const double qa = (m - 2) * s;
                    const double qb = 2.0 * R * s;
                    const double qc = -R * R * m * dt;
                    rho = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
                }
                rim_nodes_.push_back(rim_fixed[f].second);
                for (int i = 1; i < m; ++i) {
                    const double t = t0 + dt * i;
                    rim_nodes_.push_back(add_node({rho * std::cos(t), rho * std::sin(t)}, std::nullopt));
                }
            }
        }

        // Interior nodes from a jittered hexagonal lattice kept clear of the boundary.
        const double dy = 0.5 * std::sqrt(3.0) * h_;
        const int rows = static_cast<int>(std::ceil(R / dy)) + 1;
        const int cols = static_cast<int>(std::ceil(R / h_)) + 1;
        std::uint64_t counter = 0;
        for (int j = -rows; j <= rows; ++j) {
            for (int i = -cols; i <= cols; ++i) {
                Point2 p{(i + 0.5 * (std::abs(j) % 2)) * h_, j * dy};
                p[0] += 1e-3 * h_ * jitter(counter++);
                p[1] += 1e-3 * h_ * jitter(counter++);
                if (R - std::hypot(p[0], p[1]) < alpha * h_) continue;
                bool near_chord = false;
                for (const auto& line : lines_) {
                    if (std::abs(delaunay::orient(line.a, line.b, p)) / line.length < alpha * h_) near_chord = true;
                }
                if (near_chord) continue;
                free_.push_back(add_node(p, std::nullopt));
            }
        }

        compute_signatures();
        std::vector<std::array<int, 3>> tris = triangulate_regions();
        for (int step = 0; step < smoothing_steps; ++step) {
            smooth(tris);
            tris = triangulate_regions();
        }
        check_chords(tris);

        ComponentMesh m;
        m.component = shape_.id;
        m.dim = 2;
        m.local = nodes_;
        m.points.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            m.points[i] = exact_[i] ? *exact_[i] : embed(shape_, nodes_[i]);
        }
        m.triangles = std::move(tris);
        m.boundary_nodes = rim_nodes_;
        std::sort(m.boundary_nodes.begin(), m.boundary_nodes.end());
        return m;
    }

    int add_node(const std::array<double, 2>& p, std::optional<Vec3> exact) {
        nodes_.push_back(p);
        exact_.push_back(exact);
        return static_cast<int>(nodes_.size()) - 1;
    }

    void compute_signatures() {
        const std::size_t nc = lines_.size();
        sig_.assign(nodes_.size(), std::vector<int>(nc, 0));
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            for (std::size_t k = 0; k < nc; ++k) {
                const double d = delaunay::orient(lines_[k].a, lines_[k].b, nodes_[i]) / lines_[k].length;
                sig_[i][k] = (std::abs(d) < 1e-9) ? 0 : (d > 0.0 ? 1 : -1);
            }
        }
        for (std::size_t k = 0; k < nc; ++k) {
            for (int n : chord_nodes_[k]) sig_[n][k] = 0;
        }
        std::set<std::vector<int>> regions;
        for (const auto& s : sig_) {
            if (std::none_of(s.begin(), s.end(), [](int v) { return v == 0; })) regions.insert(s);
        }
        regions_.assign(regions.begin(), regions.end());
    }

    std::vector<std::array<int, 3>> triangulate_regions() const {
        std::vector<std::array<int, 3>> out;
        for (const auto& region : regions_) {
            std::vector<int> ids;
            for (std::size_t i = 0; i < nodes_.size(); ++i) {
                bool inside = true;
                for (std::size_t k = 0; k < region.size(); ++k) {
                    if (sig_[i][k] != 0 && sig_[i][k] != region[k]) inside = false;
                }
                if (inside) ids.push_back(static_cast<int>(i));
            }
            std::vector<Point2> pts;
            pts.reserve(ids.size());
            for (int i : ids) pts.push_back(nodes_[i]);
            for (const auto& t : delaunay::triangulate(pts)) {
                const std::array<int, 3> g{ids[t[0]], ids[t[1]], ids[t[2]]};
                const double area = delaunay::orient(nodes_[g[0]], nodes_[g[1]], nodes_[g[2]]);
                if (area <= 1e-12 * h_ * h_) {
                    fail(ErrorKind::JunctionResolutionFailure,
                         "degenerate triangle along a chord of component " + std::to_string(shape_.id));
                }
                out.push_back(g);
            }
        }
        return out;
    }

    void smooth(const std::vector<std::array<int, 3>>& tris) {
        std::vector<std::set<int>> adj(nodes_.size());
        for (const auto& t : tris) {
            for (int a = 0; a < 3; ++a) {
                adj[t[a]].insert(t[(a + 1) % 3]);
                adj[t[a]].insert(t[(a + 2) % 3]);
            }
        }
        std::vector<Point2> next = nodes_;
        for (int i : free_) {
            if (adj[i].empty()) continue;
            Point2 c{0.0, 0.0};
            for (int j : adj[i]) {
                c[0] += nodes_[j][0];
                c[1] += nodes_[j][1];
            }
            next[i] = {c[0] / adj[i].size(), c[1] / adj[i].size()};
        }
        nodes_ = std::move(next);
    }

    void check_chords(const std::vector<std::array<int, 3>>& tris) const {
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& t : tris) {
            for (int a = 0; a < 3; ++a) {
                const int u = t[a], v = t[(a + 1) % 3];
                ++edge_count[{std::min(u, v), std::max(u, v)}];
            }
        }
        for (const auto& nodes : chord_nodes_) {
            for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
                const auto key = std::pair{std::min(nodes[i], nodes[i + 1]), std::max(nodes[i], nodes[i + 1])};
                const auto it = edge_count.find(key);
                if (it == edge_count.end() || it->second != 2) {
                    fail(ErrorKind::JunctionResolutionFailure,
                         "chord edge not resolved on component " + std::to_string(shape_.id));
                }
            }
        }
    }

    static double min_angle(const ComponentMesh& m) {
        double out = 180.0;
        for (const auto& t : m.triangles) {
            out = std::min(out, triangle_min_angle_deg(m.local[t[0]], m.local[t[1]], m.local[t[2]]));
        }
        return out;
    }

    const ComponentShape& shape_;
    const Disc& disc_;
    double h_;
    std::vector<const CurveLocus*> chords_;
    std::vector<ChordLine> lines_;
    std::vector<std::vector<int>> chord_nodes_;
    std::vector<int> rim_nodes_;
    std::vector<int> free_;
    std::vector<Point2> nodes_;
    std::vector<std::optional<Vec3>> exact_;
    std::vector<std::vector<int>> sig_;
    std::vector<std::vector<int>> regions_;
};

}  // namespace

Mesh build_mesh(const ValidatedStructure& structure, double h) {
    double min_diameter = std::numeric_limits<double>::infinity();
    for (const auto& c : structure.components) min_diameter = std::min(min_diameter, c.diameter());
    if (!(h > 0.0) || h > min_diameter / 4.0 * (1.0 + 1e-12)) {
        fail(ErrorKind::DomainError, "element size must lie in (0, min diameter / 4]");
    }

    Mesh mesh;
    mesh.shapes = structure.components;
    mesh.h = h;
    for (const auto& c : structure.components) {
        mesh.parts.push_back(c.is_segment() ? mesh_segment(c, structure.junctions, h)
                                            : DiscMesher(c, structure.junctions, h).build());
    }

    // Global numbering: a node reuses a DOF only if it coincides with an already
    // numbered node on a coupled junction of its own component.
    std::vector<std::vector<std::pair<Vec3, int>>> registry(structure.junctions.size());
    std::vector<std::set<int>> registrants(structure.junctions.size());
    for (auto& part : mesh.parts) {
        part.dofs.assign(part.node_count(), -1);
        for (int i = 0; i < part.node_count(); ++i) {
            const Vec3& p = part.points[i];
            int dof = -1;
            std::vector<std::size_t> on;
            for (std::size_t k = 0; k < structure.junctions.size(); ++k) {
                const auto& j = structure.junctions[k];
                if (!j.coupled || !j.involves(part.component) || j.distance_to(p) > kMergeTol) continue;
                on.push_back(k);
                for (const auto& [q, d] : registry[k]) {
                    if (distance(p, q) <= kMergeTol) dof = d;
                }
            }
            if (dof < 0) {
                dof = mesh.n_dofs++;
                mesh.dof_points.push_back(p);
                mesh.dof_owner.push_back(part.component);
            }
            for (std::size_t k : on) {
                registry[k].emplace_back(p, dof);
                registrants[k].insert(part.component);
            }
            part.dofs[i] = dof;
        }
    }
    for (std::size_t k = 0; k < structure.junctions.size(); ++k) {
        const auto& j = structure.junctions[k];
        if (!j.coupled) continue;
        if (registrants[k].size() != 2) {
            fail(ErrorKind::JunctionResolutionFailure, "coupled junction between components " +
                                                           std::to_string(j.comp_a) + " and " +
                                                           std::to_string(j.comp_b) + " has no shared node");
        }
        // Node-for-node matching: every registered DOF is referenced from both sides.
        std::map<int, int> refs;
        for (const auto& entry : registry[k]) ++refs[entry.second];
        for (const auto& [dof, count] : refs) {
            if (count != 2) {
                fail(ErrorKind::JunctionResolutionFailure, "junction nodes do not match between components " +
                                                               std::to_string(j.comp_a) + " and " +
                                                               std::to_string(j.comp_b));
            }
        }
    }
    return mesh;
}

MeshQuality mesh_quality(const Mesh& mesh) {
    MeshQuality q;
    q.n_dofs = mesh.n_dofs;
    for (const auto& part : mesh.parts) {
        for (const auto& e : part.edges) {
            q.h_max = std::max(q.h_max, std::abs(part.local[e[1]][0] - part.local[e[0]][0]));
        }
        for (const auto& t : part.triangles) {
            const auto& a = part.local[t[0]];
            const auto& b = part.local[t[1]];
            const auto& c = part.local[t[2]];
            const double la = std::hypot(b[0] - c[0], b[1] - c[1]);
            const double lb = std::hypot(a[0] - c[0], a[1] - c[1]);
            const double lc = std::hypot(a[0] - b[0], a[1] - b[1]);
            const double longest = std::max({la, lb, lc});
            const double area = 0.5 * std::abs(delaunay::orient(a, b, c));
            const double inradius = 2.0 * area / (la + lb + lc);
            q.h_max = std::max(q.h_max, longest);
            q.max_aspect = std::max(q.max_aspect, longest / (2.0 * std::sqrt(3.0) * inradius));
            const double angle = triangle_min_angle_deg(a, b, c);
            q.min_angle_deg = q.min_angle_deg ? std::min(*q.min_angle_deg, angle) : angle;
        }
    }
    return q;
}

DiscreteField interpolate(const Mesh& mesh, const NodalFunction& f) {
    DiscreteField u(static_cast<std::size_t>(mesh.n_dofs));
    std::vector<char> set(mesh.n_dofs, 0);
    for (const auto& part : mesh.parts) {
        for (int i = 0; i < part.node_count(); ++i) {
            const double v = f(PointContext{part.component, part.dim, part.local[i], part.points[i]});
            if (!std::isfinite(v)) {
                fail(ErrorKind::DomainError, "function is not finite at a node of component " +
                                                 std::to_string(part.component));
            }
            const int d = part.dofs[i];
            if (!set[d]) {
                u[d] = v;
                set[d] = 1;
            } else if (std::abs(u[d] - v) > 1e-9) {
                fail(ErrorKind::JunctionMismatch, "values disagree across a coupled junction at component " +
                                                      std::to_string(part.component));
            }
        }
    }
    return u;
}

std::vector<double> restrict_to(const Mesh& mesh, const DiscreteField& u, int component) {
    const auto& part = mesh.parts.at(component);
    std::vector<double> out(part.node_count());
    for (int i = 0; i < part.node_count(); ++i) out[i] = u[part.dofs[i]];
    return out;
}

std::vector<int> dof_classes(const Mesh& mesh, const KernelClasses& classes) {
    std::vector<int> out(mesh.n_dofs);
    for (int d = 0; d < mesh.n_dofs; ++d) out[d] = classes.class_of.at(mesh.dof_owner[d]);
    return out;
}

}  // namespace lowdim
