#pragma once

#include "cadfit/config.hpp"
#include "cadfit/mesh.hpp"
#include "cadfit/polygon.hpp"
#include "cadfit/types.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cadfit {

struct Target;

// Closed 2D loop in sketch-plane coordinates.
struct Loop2D {
    Polygon2 points;
    double signed_area() const { return cadfit::signed_area(points); }
    double perimeter() const { return cadfit::perimeter(points); }
    double diameter() const {
        Box2 b = polygon_bounds(points);
        return b.extent().norm();
    }
};

// 2D sketch profile: one outer loop (positive orientation) plus holes
// (negative orientation), all strictly inside the outer.
struct Profile {
    Plane plane;
    Loop2D outer;
    std::vector<Loop2D> holes;

    PlaneSource source = PlaneSource::planar_cluster;
    int id = -1;

    double area() const;
    bool contains(const Vec2& p) const;
};

// Parametric loop approximation, produced by fit_primitives.
struct LineSegment {
    Vec2 p0, p1;
};
struct Arc {
    Vec2 center;
    double radius;
    double start_angle, end_angle; // radians; sweep follows `ccw`
    bool ccw;
    Vec2 point_at(double t) const; // t in [0,1] along the sweep
    double sweep() const;
};
struct Circle {
    Vec2 center;
    double radius;
};
struct Polyline {
    Polygon2 points;
};
using PrimitiveElement = std::variant<LineSegment, Arc, Circle, Polyline>;

struct PrimitiveChain {
    std::vector<PrimitiveElement> elements;
    // Polygonal rendering of the chain (arcs subdivided), used for membership.
    Polygon2 to_polygon(int arc_points = 16) const;
};

// Projects section loops to (u,v), resamples to cfg.loop_resample_n points by
// arc length, and drops loops below the area/length thresholds.
std::vector<Loop2D> extract_loops(const std::vector<Loop3D>& sections, const Plane& plane,
                                  const FitConfig& cfg);

// Containment grouping: even-depth loops become outers, each odd-depth loop a
// hole of its immediate parent.
std::vector<Profile> group_profiles(const std::vector<Loop2D>& loops, const Plane& plane);

// Greedy segmentation into lines/arcs with a whole-loop circle shortcut and a
// polyline fallback; RMS tolerance is tol * loop diameter.
PrimitiveChain fit_primitives(const Loop2D& loop, double tol);

// Kasa algebraic circle fit; returns nullopt on singular configurations.
struct CircleFit {
    Vec2 center;
    double radius;
    double rms;
};
std::optional<CircleFit> fit_circle(const Vec2* pts, size_t n);

struct LineFit {
    Vec2 point, dir;
    double rms;
};
LineFit fit_line(const Vec2* pts, size_t n);

// Full candidate extraction: propose planes, slice, extract loops, group into
// profiles. Deterministic order (plane key, loop centroid).
std::vector<Profile> extract_sketch_candidates(const Target& target, const FitConfig& cfg);

}  // namespace cadfit
