#pragma once

#include "cadfit/types.hpp"

#include <array>
#include <vector>

namespace cadfit {

using Polygon2 = std::vector<Vec2>; // closed, first point not repeated

double signed_area(const Polygon2& poly);
double perimeter(const Polygon2& poly);

struct Box2 {
    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    void expand(const Vec2& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    Vec2 extent() const { return hi - lo; }
    bool contains(const Vec2& p) const {
        return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
    }
};
Box2 polygon_bounds(const Polygon2& poly);

// Even-odd crossing test.
bool point_in_polygon(const Polygon2& poly, const Vec2& p);

// Even-odd region membership with holes.
bool point_in_region(const Polygon2& outer, const std::vector<Polygon2>& holes, const Vec2& p);

// Unsigned distance to the polygon boundary.
double distance_to_boundary(const Polygon2& poly, const Vec2& p);

// Signed distance to the even-odd region (negative inside).
double region_signed_distance(const Polygon2& outer, const std::vector<Polygon2>& holes,
                              const Vec2& p);

// Resamples a closed polyline to exactly n points, uniformly by arc length,
// starting from vertex 0.
Polygon2 resample_closed(const Polygon2& poly, int n);

// Ear-clipping triangulation of a polygon with holes (outer CCW, holes CW).
// Holes are bridged into the outer boundary first. Robust enough for the
// generic, resampled loops this pipeline produces.
std::vector<std::array<Vec2, 3>> triangulate_region(const Polygon2& outer,
                                                    const std::vector<Polygon2>& holes);

}  // namespace cadfit
