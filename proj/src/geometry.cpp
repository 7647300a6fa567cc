#include "lowdim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include "lowdim/error.hpp"

namespace lowdim {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, "geometry", message);
}

std::string pair_name(int a, int b) {
    return "components " + std::to_string(a) + " and " + std::to_string(b);
}

bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

double sin_angle(const Vec3& u, const Vec3& v) { return norm(cross(normalized(u), normalized(v))); }

// Closest points between segments [p, p+d] and [q, q+e]; returns (s, t) in [0,1]^2.
std::pair<double, double> closest_params(const Vec3& p, const Vec3& d, const Vec3& q, const Vec3& e) {
    const Vec3 r = p - q;
    const double a = dot(d, d);
    const double b = dot(d, e);
    const double c = dot(e, e);
    const double f = dot(e, r);
    const double g = dot(d, r);
    const double denom = a * c - b * b;
    double s = denom > 1e-300 ? std::clamp((b * f - c * g) / denom, 0.0, 1.0) : 0.0;
    double t = (b * s + f) / c;
    if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-g / a, 0.0, 1.0);
    } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - g) / a, 0.0, 1.0);
    }
    return {s, t};
}

double point_segment_distance(const Vec3& p, const Segment& seg) {
    const Vec3 d = seg.p1 - seg.p0;
    const double t = std::clamp(dot(p - seg.p0, d) / dot(d, d), 0.0, 1.0);
    return distance(p, seg.p0 + t * d);
}

double segment_segment_distance(const Segment& u, const Segment& v) {
    const Vec3 d = u.p1 - u.p0;
    const Vec3 e = v.p1 - v.p0;
    const auto [s, t] = closest_params(u.p0, d, v.p0, e);
    return distance(u.p0 + s * d, v.p0 + t * e);
}

double segment_disc_distance(const Segment& seg, const Disc& disc) {
    const Vec3 n = disc.normal();
    const double h0 = dot(seg.p0 - disc.center, n);
    const double h1 = dot(seg.p1 - disc.center, n);
    if (h0 * h1 < 0.0) {
        const double s = h0 / (h0 - h1);
        const Vec3 x = seg.p0 + s * (seg.p1 - seg.p0);
        if (distance(x, disc.center) <= disc.radius) return 0.0;
    }
    if (std::abs(h0) <= kGeometryTol && std::abs(h1) <= kGeometryTol) {
        // In-plane: distance from the centre to the segment against the radius.
        return std::max(0.0, point_segment_distance(disc.center, seg) - disc.radius);
    }
    // Otherwise the nearest disc point is an endpoint projection or lies on the rim.
    ComponentShape tmp{0, disc};
    double best = std::min(distance_to(tmp, seg.p0), distance_to(tmp, seg.p1));
    // Rim points: minimise over the circle with a coarse scan then golden refinement.
    auto rim_dist = [&](double phi) {
        const Vec3 r = disc.center + disc.radius * (std::cos(phi) * disc.e1 + std::sin(phi) * disc.e2);
        return point_segment_distance(r, seg);
    };
    constexpr int kScan = 256;
    int best_i = 0;
    double best_v = rim_dist(0.0);
    for (int i = 1; i < kScan; ++i) {
        const double v = rim_dist(2.0 * std::numbers::pi * i / kScan);
        if (v < best_v) {
            best_v = v;
            best_i = i;
        }
    }
    double lo = 2.0 * std::numbers::pi * (best_i - 1) / kScan;
    double hi = 2.0 * std::numbers::pi * (best_i + 1) / kScan;
    for (int it = 0; it < 100; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (rim_dist(m1) < rim_dist(m2)) hi = m2; else lo = m1;
    }
    return std::min({best, best_v, rim_dist(0.5 * (lo + hi))});
}

void check_shape(const ComponentShape& c) {
    const std::string who = "component " + std::to_string(c.id);
    if (c.is_segment()) {
        const auto& s = c.segment();
        if (!finite(s.p0) || !finite(s.p1)) fail(ErrorKind::MalformedShape, who + ": non-finite endpoint");
        if (distance(s.p0, s.p1) <= kGeometryTol) fail(ErrorKind::MalformedShape, who + ": segment endpoints coincide");
        return;
    }
    const auto& d = c.disc();
    if (!finite(d.center) || !finite(d.e1) || !finite(d.e2) || !std::isfinite(d.radius)) {
        fail(ErrorKind::MalformedShape, who + ": non-finite disc data");
    }
    if (!(d.radius > 0.0)) fail(ErrorKind::MalformedShape, who + ": disc radius must be positive");
    if (std::abs(dot(d.e1, d.e1) - 1.0) > 1e-12 || std::abs(dot(d.e2, d.e2) - 1.0) > 1e-12 ||
        std::abs(dot(d.e1, d.e2)) > 1e-12) {
        fail(ErrorKind::MalformedShape, who + ": disc frame is not orthonormal");
    }
}

std::optional<Junction> segment_segment(const ComponentShape& a, const ComponentShape& b) {
    const auto& u = a.segment();
    const auto& v = b.segment();
    const Vec3 d = u.p1 - u.p0;
    const Vec3 e = v.p1 - v.p0;
    if (sin_angle(d, e) < std::sin(kTransversalAngle)) {
        if (segment_segment_distance(u, v) <= kGeometryTol) {
            fail(ErrorKind::NonTransversal, pair_name(a.id, b.id) + " are parallel and touch");
        }
        return std::nullopt;
    }
    const auto [s, t] = closest_params(u.p0, d, v.p0, e);
    const Vec3 x = u.p0 + s * d;
    const Vec3 y = v.p0 + t * e;
    if (distance(x, y) > kGeometryTol) return std::nullopt;
    const double tol_s = kGeometryTol / norm(d);
    const double tol_t = kGeometryTol / norm(e);
    if (s <= tol_s || s >= 1.0 - tol_s || t <= tol_t || t >= 1.0 - tol_t) {
        fail(ErrorKind::NonTransversal, pair_name(a.id, b.id) + " meet at a segment endpoint");
    }
    return Junction{a.id, b.id, PointLocus{0.5 * (x + y)}, true};
}

std::optional<Junction> segment_disc(const ComponentShape& seg_c, const ComponentShape& disc_c, bool swapped) {
    const auto& seg = seg_c.segment();
    const auto& disc = disc_c.disc();
    const Vec3 d = seg.p1 - seg.p0;
    const Vec3 n = disc.normal();
    const int ia = swapped ? disc_c.id : seg_c.id;
    const int ib = swapped ? seg_c.id : disc_c.id;
    if (std::abs(dot(normalized(d), n)) < std::sin(kTransversalAngle)) {
        if (segment_disc_distance(seg, disc) <= kGeometryTol) {
            fail(ErrorKind::NonTransversal, pair_name(ia, ib) + ": segment is tangent to the disc plane");
        }
        return std::nullopt;
    }
    const double s = dot(disc.center - seg.p0, n) / dot(d, n);
    const double tol_s = kGeometryTol / norm(d);
    if (s < -tol_s || s > 1.0 + tol_s) return std::nullopt;
    const Vec3 x = seg.p0 + s * d;
    const double rho = distance(x, disc.center);
    if (rho > disc.radius + kGeometryTol) return std::nullopt;
    if (s <= tol_s || s >= 1.0 - tol_s) {
        fail(ErrorKind::NonTransversal, pair_name(ia, ib) + ": segment endpoint lies on the disc");
    }
    if (rho >= disc.radius - kGeometryTol) {
        fail(ErrorKind::NonTransversal, pair_name(ia, ib) + ": segment crosses the disc rim");
    }
    // A point junction into a 2D interior has zero capacity on the disc side.
    return Junction{ia, ib, PointLocus{x}, false};
}

std::optional<Junction> disc_disc(const ComponentShape& a, const ComponentShape& b) {
    const auto& p = a.disc();
    const auto& q = b.disc();
    const Vec3 n1 = p.normal();
    const Vec3 n2 = q.normal();
    const Vec3 u_raw = cross(n1, n2);
    if (norm(u_raw) < std::sin(kTransversalAngle)) {
        const bool coplanar = std::abs(dot(q.center - p.center, n1)) <= kGeometryTol;
        if (coplanar && distance(p.center, q.center) <= p.radius + q.radius + kGeometryTol) {
            fail(ErrorKind::NonTransversal, pair_name(a.id, b.id) + " are coplanar and overlap");
        }
        return std::nullopt;
    }
    const Vec3 u = normalized(u_raw);
    // Point on both planes: minimal-norm solution of n1.x = h1, n2.x = h2.
    const double h1 = dot(n1, p.center);
    const double h2 = dot(n2, q.center);
    const double c12 = dot(n1, n2);
    const double det = 1.0 - c12 * c12;
    const Vec3 o = ((h1 - h2 * c12) / det) * n1 + ((h2 - h1 * c12) / det) * n2;

    auto chord_interval = [&](const Disc& disc) -> std::optional<std::pair<double, double>> {
        const double t = dot(disc.center - o, u);
        const double dist = distance(o + t * u, disc.center);
        if (dist > disc.radius + kGeometryTol) return std::nullopt;
        if (dist >= disc.radius - kGeometryTol) {
            fail(ErrorKind::NonTransversal, pair_name(a.id, b.id) + ": intersection line is tangent to a rim");
        }
        const double half = std::sqrt(disc.radius * disc.radius - dist * dist);
        return std::pair{t - half, t + half};
    };
    const auto ip = chord_interval(p);
    const auto iq = chord_interval(q);
    if (!ip || !iq) return std::nullopt;
    const double lo = std::max(ip->first, iq->first);
    const double hi = std::min(ip->second, iq->second);
    if (hi < lo - kGeometryTol) return std::nullopt;
    if (hi - lo <= kGeometryTol) {
        fail(ErrorKind::NonTransversal, pair_name(a.id, b.id) + " touch at a single rim point");
    }
    if (std::abs(ip->first - iq->first) > kGeometryTol || std::abs(ip->second - iq->second) > kGeometryTol) {
        fail(ErrorKind::NonTransversal,
             pair_name(a.id, b.id) + ": a rim passes through the other disc's interior");
    }
    const double t0 = 0.5 * (ip->first + iq->first);
    const double t1 = 0.5 * (ip->second + iq->second);
    return Junction{a.id, b.id, CurveLocus{o + t0 * u, o + t1 * u}, true};
}

// Does the locus of j meet component c?
bool locus_meets(const Junction& j, const ComponentShape& c) {
    if (j.is_point()) return distance_to(c, j.point().p) <= kGeometryTol;
    const Segment chord{j.curve().a, j.curve().b};
    if (c.is_segment()) return segment_segment_distance(chord, c.segment()) <= kGeometryTol;
    return segment_disc_distance(chord, c.disc()) <= kGeometryTol;
}

}  // namespace

double ComponentShape::measure() const {
    if (is_segment()) return distance(segment().p0, segment().p1);
    return std::numbers::pi * disc().radius * disc().radius;
}

double ComponentShape::diameter() const {
    if (is_segment()) return distance(segment().p0, segment().p1);
    return 2.0 * disc().radius;
}

ComponentShape make_segment(int id, Vec3 p0, Vec3 p1) { return {id, Segment{p0, p1}}; }

ComponentShape make_disc(int id, Vec3 center, double radius, Vec3 normal) {
    const Vec3 n = normalized(normal);
    // Pick the coordinate axis least aligned with n to seed the frame.
    Vec3 seed{1.0, 0.0, 0.0};
    if (std::abs(n.x) > std::abs(n.y) && std::abs(n.x) > std::abs(n.z)) seed = {0.0, 1.0, 0.0};
    const Vec3 e1 = normalized(seed - dot(seed, n) * n);
    const Vec3 e2 = cross(n, e1);
    return {id, Disc{center, radius, e1, e2}};
}

ComponentShape make_disc(int id, Vec3 center, double radius, Vec3 e1, Vec3 e2) {
    return {id, Disc{center, radius, e1, e2}};
}

std::array<double, 2> local_coordinates(const ComponentShape& shape, const Vec3& p) {
    if (shape.is_segment()) {
        const auto& s = shape.segment();
        const Vec3 mid = 0.5 * (s.p0 + s.p1);
        return {dot(p - mid, normalized(s.p1 - s.p0)), 0.0};
    }
    const auto& d = shape.disc();
    return {dot(p - d.center, d.e1), dot(p - d.center, d.e2)};
}

Vec3 embed(const ComponentShape& shape, const std::array<double, 2>& local) {
    if (shape.is_segment()) {
        const auto& s = shape.segment();
        const Vec3 mid = 0.5 * (s.p0 + s.p1);
        return mid + local[0] * normalized(s.p1 - s.p0);
    }
    const auto& d = shape.disc();
    return d.center + local[0] * d.e1 + local[1] * d.e2;
}

Vec3 outward_normal(const ComponentShape& shape, const Vec3& boundary_point) {
    if (shape.is_segment()) {
        const auto& s = shape.segment();
        const Vec3 t = normalized(s.p1 - s.p0);
        return distance(boundary_point, s.p1) < distance(boundary_point, s.p0) ? t : -t;
    }
    const auto& d = shape.disc();
    const Vec3 r = boundary_point - d.center;
    return normalized(r - dot(r, d.normal()) * d.normal());
}

double distance_to(const ComponentShape& shape, const Vec3& p) {
    if (shape.is_segment()) return point_segment_distance(p, shape.segment());
    const auto& d = shape.disc();
    const Vec3 n = d.normal();
    const Vec3 rel = p - d.center;
    Vec3 in_plane = rel - dot(rel, n) * n;
    const double rho = norm(in_plane);
    if (rho > d.radius) in_plane = (d.radius / rho) * in_plane;
    return distance(rel, in_plane);
}

double Junction::distance_to(const Vec3& p) const {
    if (is_point()) return distance(p, point().p);
    return point_segment_distance(p, Segment{curve().a, curve().b});
}

std::vector<Junction> compute_junctions(std::span<const ComponentShape> components) {
    std::vector<Junction> out;
    for (std::size_t i = 0; i < components.size(); ++i) {
        for (std::size_t j = i + 1; j < components.size(); ++j) {
            const auto& a = components[i];
            const auto& b = components[j];
            std::optional<Junction> junction;
            if (a.dim() == 1 && b.dim() == 1) junction = segment_segment(a, b);
            else if (a.dim() == 1) junction = segment_disc(a, b, false);
            else if (b.dim() == 1) junction = segment_disc(b, a, true);
            else junction = disc_disc(a, b);
            if (junction) out.push_back(*junction);
        }
    }
    return out;
}

ValidatedStructure validate_structure(std::vector<ComponentShape> components) {
    if (components.empty()) fail(ErrorKind::MalformedShape, "structure has no components");
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (components[i].id != static_cast<int>(i)) {
            fail(ErrorKind::MalformedShape, "component ids must be 0..m-1 in list order");
        }
        check_shape(components[i]);
    }
    ValidatedStructure out;
    out.junctions = compute_junctions(components);
    for (const auto& j : out.junctions) {
        for (const auto& c : components) {
            if (j.involves(c.id)) continue;
            if (locus_meets(j, c)) {
                fail(ErrorKind::TripleIntersection, pair_name(j.comp_a, j.comp_b) + " meet component " +
                                                        std::to_string(c.id) + " at their junction");
            }
        }
    }
    out.total_measure = 0.0;
    for (const auto& c : components) out.total_measure += c.measure();
    out.components = std::move(components);
    return out;
}

KernelClasses coupling_classes(const ValidatedStructure& structure) {
    const int m = static_cast<int>(structure.components.size());
    std::vector<int> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& j : structure.junctions) {
        if (!j.coupled) continue;
        const int ra = find(j.comp_a);
        const int rb = find(j.comp_b);
        // Root is the smaller id so roots are class minima.
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    KernelClasses out;
    out.class_of.assign(m, -1);
    std::vector<int> class_of_root(m, -1);
    for (int c = 0; c < m; ++c) {
        const int r = find(c);
        if (class_of_root[r] < 0) {
            class_of_root[r] = out.count();
            out.classes.emplace_back();
        }
        out.class_of[c] = class_of_root[r];
        out.classes[class_of_root[r]].push_back(c);
    }
    return out;
}

}  // namespace lowdim
