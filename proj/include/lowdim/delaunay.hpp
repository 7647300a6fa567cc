#pragma once

#include <array>
#include <span>
#include <vector>

namespace lowdim::delaunay {

using Point2 = std::array<double, 2>;
using Triangle = std::array<int, 3>;

/// Signed doubled area of (a, b, c); positive when counter-clockwise.
double orient(const Point2& a, const Point2& b, const Point2& c);

/// Delaunay triangulation (Bowyer-Watson) of distinct points. Triangles are
/// counter-clockwise and cover the convex hull. Output order is deterministic.
std::vector<Triangle> triangulate(std::span<const Point2> points);

}  // namespace lowdim::delaunay
