#include "lowdim/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lowdim/error.hpp"

namespace lowdim::delaunay {

namespace {

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // neighbour across the edge opposite v[i], -1 if none
    bool alive = true;
};

// > 0 when d lies strictly inside the circumcircle of the CCW triangle (a, b, c).
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a[0] - d[0], ady = a[1] - d[1];
    const double bdx = b[0] - d[0], bdy = b[1] - d[1];
    const double cdx = c[0] - d[0], cdy = c[1] - d[1];
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) + cd * (adx * bdy - bdx * ady);
}

class Triangulator {
public:
    explicit Triangulator(std::vector<Point2> pts) : p_(std::move(pts)) {
        n_ = static_cast<int>(p_.size());
        // Super triangle well outside the unit box the points were scaled into.
        p_.push_back({-100.0, -100.0});
        p_.push_back({100.0, -100.0});
        p_.push_back({0.0, 100.0});
        tris_.push_back({{n_, n_ + 1, n_ + 2}, {-1, -1, -1}, true});
        stamp_.push_back(0);
    }

    void insert(int ip) {
        const Point2& pt = p_[ip];
        const int start = locate(pt);
        ++epoch_;
        cavity_.clear();
        cavity_.push_back(start);
        stamp_[start] = epoch_;
        for (std::size_t k = 0; k < cavity_.size(); ++k) {
            const Tri& t = tris_[cavity_[k]];
            for (int i = 0; i < 3; ++i) {
                const int o = t.nb[i];
                if (o < 0 || stamp_[o] == epoch_) continue;
                const Tri& u = tris_[o];
                if (incircle(p_[u.v[0]], p_[u.v[1]], p_[u.v[2]], pt) > 0.0) {
                    stamp_[o] = epoch_;
                    cavity_.push_back(o);
                }
            }
        }
        collect_boundary(ip);

        // Fill the cavity with a fan around the new point, reusing dead slots.
        std::vector<int> slots = cavity_;
        for (int c : cavity_) tris_[c].alive = false;
        fan_.clear();
        for (const auto& e : boundary_) {
            int slot;
            if (!slots.empty()) {
                slot = slots.back();
                slots.pop_back();
            } else {
                slot = static_cast<int>(tris_.size());
                tris_.push_back({});
                stamp_.push_back(0);
            }
            tris_[slot] = Tri{{e.a, e.b, ip}, {-1, -1, e.outer}, true};
            if (e.outer >= 0) {
                Tri& o = tris_[e.outer];
                for (int j = 0; j < 3; ++j) {
                    if (o.v[(j + 1) % 3] == e.b && o.v[(j + 2) % 3] == e.a) o.nb[j] = slot;
                }
            }
            fan_.push_back(slot);
        }
        for (int t : fan_) {
            Tri& tri = tris_[t];
            for (int u : fan_) {
                if (tris_[u].v[0] == tri.v[1]) tri.nb[0] = u;
                if (tris_[u].v[1] == tri.v[0]) tri.nb[1] = u;
            }
        }
        last_ = fan_.front();
    }

    std::vector<Triangle> result() const {
        std::vector<Triangle> out;
        for (const auto& t : tris_) {
            if (!t.alive || t.v[0] >= n_ || t.v[1] >= n_ || t.v[2] >= n_) continue;
            out.push_back(t.v);
        }
        return out;
    }

private:
    struct Edge {
        int a, b, outer;
    };

    int locate(const Point2& pt) {
        int t = last_;
        if (!tris_[t].alive) t = first_alive();
        const int cap = static_cast<int>(tris_.size()) + 16;
        for (int step = 0; step < cap; ++step) {
            const Tri& tri = tris_[t];
            int next = -1;
            for (int i = 0; i < 3; ++i) {
                if (orient(p_[tri.v[(i + 1) % 3]], p_[tri.v[(i + 2) % 3]], pt) < 0.0) {
                    next = tri.nb[i];
                    break;
                }
            }
            if (next < 0) return t;
            t = next;
        }
        // Walk cycled on a degenerate configuration; fall back to a scan.
        for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
            const Tri& tri = tris_[k];
            if (tri.alive && incircle(p_[tri.v[0]], p_[tri.v[1]], p_[tri.v[2]], pt) > 0.0) return k;
        }
        throw Error(ErrorKind::MeshQualityFailure, "meshing", "Delaunay point location failed");
    }

    int first_alive() const {
        for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
            if (tris_[k].alive) return k;
        }
        return 0;
    }

    // Cavity boundary edges, growing the cavity until every edge sees the new point.
    void collect_boundary(int ip) {
        for (;;) {
            boundary_.clear();
            int grow = -1;
            for (int c : cavity_) {
                const Tri& t = tris_[c];
                for (int i = 0; i < 3; ++i) {
                    const int o = t.nb[i];
                    if (o >= 0 && stamp_[o] == epoch_) continue;
                    const int a = t.v[(i + 1) % 3];
                    const int b = t.v[(i + 2) % 3];
                    if (orient(p_[a], p_[b], p_[ip]) <= 0.0) {
                        if (o < 0) {
                            throw Error(ErrorKind::MeshQualityFailure, "meshing", "Delaunay cavity left the hull");
                        }
                        grow = o;
                    }
                    boundary_.push_back({a, b, o});
                }
            }
            if (grow < 0) return;
            stamp_[grow] = epoch_;
            cavity_.push_back(grow);
        }
    }

    std::vector<Point2> p_;
    int n_ = 0;
    std::vector<Tri> tris_;
    std::vector<int> stamp_;
    int epoch_ = 0;
    int last_ = 0;
    std::vector<int> cavity_;
    std::vector<int> fan_;
    std::vector<Edge> boundary_;
};

}  // namespace

double orient(const Point2& a, const Point2& b, const Point2& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

std::vector<Triangle> triangulate(std::span<const Point2> points) {
    if (points.size() < 3) return {};
    double lo_x = points[0][0], hi_x = lo_x, lo_y = points[0][1], hi_y = lo_y;
    for (const auto& p : points) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    }
    const double scale = std::max({hi_x - lo_x, hi_y - lo_y, 1e-300});
    const double cx = 0.5 * (lo_x + hi_x);
    const double cy = 0.5 * (lo_y + hi_y);
    std::vector<Point2> scaled(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        scaled[i] = {(points[i][0] - cx) / scale, (points[i][1] - cy) / scale};
    }

    // Snake order over a coarse grid keeps point location walks short.
    const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(points.size()) / 4.0)));
    auto cell = [&](double v) { return std::clamp(static_cast<int>((v + 0.5) * cells), 0, cells - 1); };
    std::vector<int> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const int ra = cell(scaled[a][1]);
        const int rb = cell(scaled[b][1]);
        if (ra != rb) return ra < rb;
        const double xa = scaled[a][0], xb = scaled[b][0];
        return (ra % 2 == 0) ? xa < xb : xa > xb;
    });

    Triangulator tri(scaled);
    for (int i : order) tri.insert(i);
    return tri.result();
}

}  // namespace lowdim::delaunay
