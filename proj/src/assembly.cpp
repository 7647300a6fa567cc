#include "lowdim/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lowdim/error.hpp"

namespace lowdim {

namespace {

// 4-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGaussX{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                        0.8611363115940526};
constexpr std::array<double, 4> kGaussW{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                        0.3478548451374538};

// 2-point Gauss on [0, 1] for line elements.
constexpr double kLineQ0 = 0.5 - 0.28867513459481287;
constexpr double kLineQ1 = 0.5 + 0.28867513459481287;

// Degree-2 symmetric 3-point rule on triangles, barycentric (2/3, 1/6, 1/6).
constexpr std::array<std::array<double, 3>, 3> kTriQ{{{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                                                      {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                                                      {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}}};

double signed_area2(const std::array<double, 2>& a, const std::array<double, 2>& b, const std::array<double, 2>& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

PointContext line_point(const ComponentMesh& part, int a, int b, double t) {
    PointContext ctx;
    ctx.component = part.component;
    ctx.dim = 1;
    ctx.local = {(1.0 - t) * part.local[a][0] + t * part.local[b][0], 0.0};
    ctx.point = (1.0 - t) * part.points[a] + t * part.points[b];
    return ctx;
}

PointContext triangle_point(const ComponentMesh& part, const std::array<int, 3>& tri,
                            const std::array<double, 3>& bary) {
    PointContext ctx;
    ctx.component = part.component;
    ctx.dim = 2;
    for (int i = 0; i < 3; ++i) {
        ctx.local[0] += bary[i] * part.local[tri[i]][0];
        ctx.local[1] += bary[i] * part.local[tri[i]][1];
        ctx.point += bary[i] * part.points[tri[i]];
    }
    return ctx;
}

void check_elliptic(const Mat3& b, double floor, const Vec3& x) {
    double scale = 1.0;
    for (const auto& row : b) {
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            if (std::abs(b[i][j] - b[j][i]) > 1e-12 * scale) {
                throw Error(ErrorKind::NonElliptic, "assembly", "B is not symmetric at a sampled point");
            }
        }
    }
    if (!(floor > 0.0) || min_eigenvalue_sym3(b) < floor * (1.0 - 1e-12)) {
        throw Error(ErrorKind::NonElliptic, "assembly",
                    "B falls below its ellipticity floor near (" + std::to_string(x.x) + ", " +
                        std::to_string(x.y) + ", " + std::to_string(x.z) + ")");
    }
}

}  // namespace

CoefficientMatrixB CoefficientMatrixB::identity() {
    return {[](const Vec3&) { return Mat3{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}}; }, 1.0};
}

CoefficientMatrixB CoefficientMatrixB::constant(const Mat3& b, double floor) {
    return {[b](const Vec3&) { return b; }, floor};
}

double min_eigenvalue_sym3(const Mat3& m) {
    // Trigonometric solution of the characteristic cubic.
    const double p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    const double q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if (p1 == 0.0) return std::min({m[0][0], m[1][1], m[2][2]});
    const double p2 = (m[0][0] - q) * (m[0][0] - q) + (m[1][1] - q) * (m[1][1] - q) +
                      (m[2][2] - q) * (m[2][2] - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 b{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) b[i][j] = (m[i][j] - (i == j ? q : 0.0)) / p;
    }
    const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                       b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                       b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
}

SparseMatrixSym assemble_mass(const Mesh& mesh) {
    std::vector<Triplet> t;
    for (const auto& part : mesh.parts) {
        for (const auto& e : part.edges) {
            const double len = std::abs(part.local[e[1]][0] - part.local[e[0]][0]);
            // 2-point Gauss integrates the P1 products exactly.
            double m[2][2] = {{0, 0}, {0, 0}};
            for (double q : {kLineQ0, kLineQ1}) {
                const double phi[2] = {1.0 - q, q};
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) m[i][j] += 0.5 * len * phi[i] * phi[j];
                }
            }
            for (int i = 0; i < 2; ++i) {
                for (int j = i; j < 2; ++j) t.push_back({part.dofs[e[i]], part.dofs[e[j]], m[i][j]});
            }
        }
        for (const auto& tri : part.triangles) {
            const double area = 0.5 * signed_area2(part.local[tri[0]], part.local[tri[1]], part.local[tri[2]]);
            double m[3][3] = {};
            for (const auto& bary : kTriQ) {
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) m[i][j] += area / 3.0 * bary[i] * bary[j];
                }
            }
            for (int i = 0; i < 3; ++i) {
                for (int j = i; j < 3; ++j) t.push_back({part.dofs[tri[i]], part.dofs[tri[j]], m[i][j]});
            }
        }
    }
    return SparseMatrixSym::from_triplets(mesh.n_dofs, std::move(t));
}

SparseMatrixSym assemble_stiffness(const Mesh& mesh, const CoefficientMatrixB& B) {
    std::vector<Triplet> t;
    for (const auto& part : mesh.parts) {
        const ComponentShape& shape = mesh.shapes.at(part.component);
        if (part.dim == 1) {
            const Vec3 tangent = normalized(shape.segment().p1 - shape.segment().p0);
            for (const auto& e : part.edges) {
                const double len = std::abs(part.local[e[1]][0] - part.local[e[0]][0]);
                const PointContext mid = line_point(part, e[0], e[1], 0.5);
                const Mat3 b = B.evaluator(mid.point);
                check_elliptic(b, B.ellipticity_floor, mid.point);
                const double coeff = dot(tangent, b * tangent) / len;
                t.push_back({part.dofs[e[0]], part.dofs[e[0]], coeff});
                t.push_back({part.dofs[e[0]], part.dofs[e[1]], -coeff});
                t.push_back({part.dofs[e[1]], part.dofs[e[1]], coeff});
            }
            continue;
        }
        const Vec3 e1 = shape.disc().e1;
        const Vec3 e2 = shape.disc().e2;
        for (const auto& tri : part.triangles) {
            const auto& a = part.local[tri[0]];
            const auto& b = part.local[tri[1]];
            const auto& c = part.local[tri[2]];
            const double area2 = signed_area2(a, b, c);
            // Gradients of the barycentric coordinates in the disc frame.
            const double g[3][2] = {{(b[1] - c[1]) / area2, (c[0] - b[0]) / area2},
                                    {(c[1] - a[1]) / area2, (a[0] - c[0]) / area2},
                                    {(a[1] - b[1]) / area2, (b[0] - a[0]) / area2}};
            double beff[2][2] = {{0, 0}, {0, 0}};
            for (const auto& bary : kTriQ) {
                const PointContext q = triangle_point(part, tri, bary);
                const Mat3 bm = B.evaluator(q.point);
                check_elliptic(bm, B.ellipticity_floor, q.point);
                const Vec3 be1 = bm * e1;
                const Vec3 be2 = bm * e2;
                beff[0][0] += dot(e1, be1) / 3.0;
                beff[0][1] += dot(e1, be2) / 3.0;
                beff[1][0] += dot(e2, be1) / 3.0;
                beff[1][1] += dot(e2, be2) / 3.0;
            }
            const double area = 0.5 * area2;
            for (int i = 0; i < 3; ++i) {
                for (int j = i; j < 3; ++j) {
                    const double bg0 = beff[0][0] * g[j][0] + beff[0][1] * g[j][1];
                    const double bg1 = beff[1][0] * g[j][0] + beff[1][1] * g[j][1];
                    t.push_back({part.dofs[tri[i]], part.dofs[tri[j]], area * (g[i][0] * bg0 + g[i][1] * bg1)});
                }
            }
        }
    }
    return SparseMatrixSym::from_triplets(mesh.n_dofs, std::move(t));
}

DiscreteField assemble_load(const Mesh& mesh, const SourceFunction& f, double time) {
    DiscreteField b(static_cast<std::size_t>(mesh.n_dofs));
    for (const auto& part : mesh.parts) {
        for (const auto& e : part.edges) {
            const double len = std::abs(part.local[e[1]][0] - part.local[e[0]][0]);
            for (double q : {kLineQ0, kLineQ1}) {
                const double fq = f(line_point(part, e[0], e[1], q), time);
                b[part.dofs[e[0]]] += 0.5 * len * fq * (1.0 - q);
                b[part.dofs[e[1]]] += 0.5 * len * fq * q;
            }
        }
        for (const auto& tri : part.triangles) {
            const double area = 0.5 * signed_area2(part.local[tri[0]], part.local[tri[1]], part.local[tri[2]]);
            for (const auto& bary : kTriQ) {
                const double fq = f(triangle_point(part, tri, bary), time);
                for (int i = 0; i < 3; ++i) b[part.dofs[tri[i]]] += area / 3.0 * fq * bary[i];
            }
        }
    }
    return b;
}

std::vector<std::pair<double, double>> class_integrals(const std::vector<ComponentShape>& shapes,
                                                      const KernelClasses& classes, const SourceFunction& f,
                                                      double time) {
    std::vector<std::pair<double, double>> out(classes.count(), {0.0, 0.0});
    for (const auto& shape : shapes) {
        auto& acc = out[classes.class_of.at(shape.id)];
        auto add = [&](const std::array<double, 2>& local, double w) {
            PointContext ctx{shape.id, shape.dim(), local, embed(shape, local)};
            const double v = f(ctx, time);
            acc.first += w * v;
            acc.second += w * std::abs(v);
        };
        if (shape.is_segment()) {
            constexpr int kPanels = 64;
            const double len = shape.measure();
            const double width = len / kPanels;
            for (int p = 0; p < kPanels; ++p) {
                const double mid = -0.5 * len + (p + 0.5) * width;
                for (int g = 0; g < 4; ++g) add({mid + 0.5 * width * kGaussX[g], 0.0}, 0.5 * width * kGaussW[g]);
            }
            continue;
        }
        constexpr int kRadialPanels = 32;
        constexpr int kAngles = 256;
        const double R = shape.disc().radius;
        const double width = R / kRadialPanels;
        for (int p = 0; p < kRadialPanels; ++p) {
            const double mid = (p + 0.5) * width;
            for (int g = 0; g < 4; ++g) {
                const double r = mid + 0.5 * width * kGaussX[g];
                const double wr = 0.5 * width * kGaussW[g] * r;
                for (int a = 0; a < kAngles; ++a) {
                    const double phi = 2.0 * std::numbers::pi * a / kAngles;
                    add({r * std::cos(phi), r * std::sin(phi)}, wr * 2.0 * std::numbers::pi / kAngles);
                }
            }
        }
    }
    return out;
}

ClassProjector::ClassProjector(const SparseMatrixSym& mass, std::vector<int> dof_class, int class_count)
    : dof_class_(std::move(dof_class)), weights_(class_count), measures_(class_count, 0.0) {
    for (int k = 0; k < class_count; ++k) {
        std::vector<double> chi(dof_class_.size(), 0.0);
        for (std::size_t d = 0; d < dof_class_.size(); ++d) chi[d] = dof_class_[d] == k ? 1.0 : 0.0;
        weights_[k] = mass.multiply(chi);
        for (double w : weights_[k]) measures_[k] += w;
    }
}

double ClassProjector::mean(const DiscreteField& u, int k) const {
    double acc = 0.0;
    for (std::size_t d = 0; d < u.size(); ++d) acc += weights_[k][d] * u[d];
    return acc / measures_[k];
}

std::vector<double> ClassProjector::means(const DiscreteField& u) const {
    std::vector<double> out(class_count());
    for (int k = 0; k < class_count(); ++k) out[k] = mean(u, k);
    return out;
}

DiscreteField ClassProjector::project(const DiscreteField& u) const {
    const auto m = means(u);
    DiscreteField out(u.size());
    for (std::size_t d = 0; d < u.size(); ++d) out[d] = m[dof_class_[d]];
    return out;
}

DiscreteField ClassProjector::remove_means(const DiscreteField& u) const {
    const auto m = means(u);
    DiscreteField out = u;
    for (std::size_t d = 0; d < u.size(); ++d) out[d] -= m[dof_class_[d]];
    return out;
}

DiscreteField ClassProjector::indicator(int k) const {
    DiscreteField out(dof_class_.size());
    for (std::size_t d = 0; d < dof_class_.size(); ++d) out[d] = dof_class_[d] == k ? 1.0 : 0.0;
    return out;
}

DiscreteField class_mean_project(const Mesh& mesh, const KernelClasses& classes, const DiscreteField& u) {
    const ClassProjector projector(assemble_mass(mesh), dof_classes(mesh, classes), classes.count());
    return projector.project(u);
}

}  // namespace lowdim
