#include <doctest.h>

#include "cadfit/metrics.hpp"
#include "cadfit/sketch.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace cadfit;
using namespace cadfit::testing;

namespace {

Loop3D lift(const Polygon2& poly, const Plane& plane, double h = 0) {
    Loop3D loop;
    for (const auto& p : poly) loop.points.push_back(plane.to_world(p, h));
    return loop;
}

Loop2D resampled_loop(const Polygon2& poly, int n = 128) {
    return Loop2D{resample_closed(poly, n)};
}

// Rectangle with one circular-arc corner of the given radius at (+x, +y).
Polygon2 make_rounded_rect(double hx, double hy, double r) {
    Polygon2 p;
    p.push_back({-hx, -hy});
    p.push_back({hx, -hy});
    // arc corner from (hx, hy - r) to (hx - r, hy), center (hx - r, hy - r)
    p.push_back({hx, hy - r});
    for (int i = 1; i < 16; ++i) {
        double a = M_PI / 2 * i / 16;
        p.push_back({hx - r + r * std::cos(a), hy - r + r * std::sin(a)});
    }
    p.push_back({hx - r, hy});
    p.push_back({-hx, hy});
    return p;
}

// Rectangle with all four corners rounded.
Polygon2 make_rounded_rect4(double hx, double hy, double r, int arc_n = 24) {
    Polygon2 p;
    struct Corner {
        Vec2 center;
        double a0;
    };
    Corner corners[4] = {
        {{hx - r, -hy + r}, -M_PI / 2},
        {{hx - r, hy - r}, 0.0},
        {{-hx + r, hy - r}, M_PI / 2},
        {{-hx + r, -hy + r}, M_PI},
    };
    for (const auto& c : corners)
        for (int i = 0; i <= arc_n; ++i) {
            double a = c.a0 + M_PI / 2 * i / arc_n;
            p.push_back(c.center + r * Vec2(std::cos(a), std::sin(a)));
        }
    return p;
}

}  // namespace

TEST_CASE("extract_loops: examples") {
    FitConfig cfg;
    Plane plane = Plane::make(Vec3(0, 0, 0), Vec3(0, 0, 1));
    SUBCASE("unit square keeps its area through resampling") {
        auto loops = extract_loops({lift(make_square(0.5), plane)}, plane, cfg);
        REQUIRE(loops.size() == 1);
        CHECK(int(loops[0].points.size()) == cfg.loop_resample_n);
        CHECK(std::abs(std::abs(loops[0].signed_area()) - 1.0) < 1e-3);
    }
    SUBCASE("tiny loop dropped by the area threshold") {
        auto loops = extract_loops({lift(make_square(5e-5), plane)}, plane, cfg);
        CHECK(loops.empty());
    }
    SUBCASE("circle of radius 0.5: resampled perimeter within 0.5% of pi") {
        auto loops =
            extract_loops({lift(make_circle_poly(0.5, Vec2(0, 0), 512), plane)}, plane, cfg);
        REQUIRE(loops.size() == 1);
        CHECK(std::abs(loops[0].perimeter() - M_PI) < 0.005 * M_PI);
    }
    SUBCASE("loops away from the plane project along the normal") {
        auto loops = extract_loops({lift(make_square(0.5), plane, 0.05)}, plane, cfg);
        REQUIRE(loops.size() == 1);
        CHECK(std::abs(std::abs(loops[0].signed_area()) - 1.0) < 1e-3);
    }
}

TEST_CASE("group_profiles: containment") {
    Plane plane = Plane::make(Vec3(0, 0, 0), Vec3(0, 0, 1));
    SUBCASE("square with inner square becomes one profile with a hole") {
        std::vector<Loop2D> loops{resampled_loop(make_square(1.0)),
                                  resampled_loop(make_square(0.4))};
        auto profiles = group_profiles(loops, plane);
        REQUIRE(profiles.size() == 1);
        CHECK(profiles[0].holes.size() == 1);
        CHECK(profiles[0].outer.signed_area() > 0);
        CHECK(profiles[0].holes[0].signed_area() < 0);
    }
    SUBCASE("two disjoint squares become two profiles") {
        std::vector<Loop2D> loops{resampled_loop(make_square(0.4, Vec2(-1, 0))),
                                  resampled_loop(make_square(0.4, Vec2(1, 0)))};
        auto profiles = group_profiles(loops, plane);
        REQUIRE(profiles.size() == 2);
        CHECK(profiles[0].holes.empty());
        CHECK(profiles[1].holes.empty());
    }
    SUBCASE("three nested squares follow the depth-parity rule") {
        std::vector<Loop2D> loops{resampled_loop(make_square(1.0)),
                                  resampled_loop(make_square(0.6)),
                                  resampled_loop(make_square(0.3))};
        auto profiles = group_profiles(loops, plane);
        REQUIRE(profiles.size() == 2);
        // the big square owns the middle one as a hole; the innermost starts anew
        int with_hole = profiles[0].holes.size() == 1 ? 0 : 1;
        CHECK(profiles[with_hole].holes.size() == 1);
        CHECK(profiles[1 - with_hole].holes.empty());
        CHECK(std::abs(profiles[1 - with_hole].outer.signed_area()) ==
              doctest::Approx(0.36).epsilon(0.01));
    }
    SUBCASE("profiles partition the retained loops") {
        std::vector<Loop2D> loops{resampled_loop(make_square(1.0)),
                                  resampled_loop(make_square(0.5, Vec2(0.2, 0.2))),
                                  resampled_loop(make_square(0.3, Vec2(3, 3))),
                                  resampled_loop(make_circle_poly(0.15, Vec2(0.2, 0.2)))};
        auto profiles = group_profiles(loops, plane);
        size_t total = 0;
        for (const auto& p : profiles) total += 1 + p.holes.size();
        CHECK(total == loops.size());
    }
}

TEST_CASE("fit_primitives: examples") {
    SUBCASE("resampled square fits 4 line segments") {
        Loop2D loop = resampled_loop(make_square(0.5));
        PrimitiveChain chain = fit_primitives(loop, 0.01);
        REQUIRE(chain.elements.size() == 4);
        for (const auto& el : chain.elements) CHECK(std::holds_alternative<LineSegment>(el));
    }
    SUBCASE("resampled circle fits a single circle with radius error < 1e-3") {
        Loop2D loop = resampled_loop(make_circle_poly(0.4, Vec2(0.1, -0.2), 512));
        PrimitiveChain chain = fit_primitives(loop, 0.01);
        REQUIRE(chain.elements.size() == 1);
        auto* c = std::get_if<Circle>(&chain.elements[0]);
        REQUIRE(c != nullptr);
        CHECK(std::abs(c->radius - 0.4) < 1e-3);
        CHECK((c->center - Vec2(0.1, -0.2)).norm() < 1e-3);
    }
    SUBCASE("rounded rectangle alternates lines and arcs") {
        Loop2D loop = resampled_loop(make_rounded_rect4(0.6, 0.4, 0.15), 256);
        PrimitiveChain chain = fit_primitives(loop, 0.004);
        int lines = 0, arcs = 0;
        for (const auto& el : chain.elements) {
            if (std::holds_alternative<LineSegment>(el)) ++lines;
            if (std::holds_alternative<Arc>(el)) ++arcs;
        }
        CHECK(lines == 4);
        CHECK(arcs == 4);
        // recovered corner radius
        for (const auto& el : chain.elements)
            if (auto* a = std::get_if<Arc>(&el)) CHECK(std::abs(a->radius - 0.15) < 0.01);
    }
}

TEST_CASE("fit_primitives: max deviation bounded by tol * diameter") {
    std::vector<Loop2D> loops{resampled_loop(make_square(0.5)),
                              resampled_loop(make_circle_poly(0.4, Vec2(0, 0), 512)),
                              resampled_loop(make_rounded_rect4(0.6, 0.4, 0.15), 256)};
    double tol = 0.01;
    for (const auto& loop : loops) {
        PrimitiveChain chain = fit_primitives(loop, tol);
        REQUIRE(!chain.elements.empty());
        Polygon2 dense = chain.to_polygon(64);
        double bound = tol * loop.diameter() + 1e-9;
        for (const auto& p : dense) CHECK(distance_to_boundary(loop.points, p) <= 2 * bound);
    }
}

TEST_CASE("fit_primitives: refitting the chain polygon is stable") {
    SUBCASE("square") {
        Loop2D loop = resampled_loop(make_square(0.5));
        PrimitiveChain chain = fit_primitives(loop, 0.01);
        REQUIRE(chain.elements.size() == 4);
        Loop2D rebuilt{resample_closed(chain.to_polygon(16), 128)};
        PrimitiveChain again = fit_primitives(rebuilt, 0.01);
        REQUIRE(again.elements.size() == 4);
        // endpoints land back on the square corners
        for (const auto& el : again.elements) {
            auto* s = std::get_if<LineSegment>(&el);
            REQUIRE(s != nullptr);
            CHECK(std::abs(std::abs(s->p0.x()) - 0.5) < 1e-6);
            CHECK(std::abs(std::abs(s->p0.y()) - 0.5) < 1e-6);
        }
    }
    SUBCASE("circle: vertices of the rendered polygon refit to the same circle") {
        Loop2D loop = resampled_loop(make_circle_poly(0.4, Vec2(0, 0), 512));
        PrimitiveChain chain = fit_primitives(loop, 0.01);
        REQUIRE(chain.elements.size() == 1);
        double r0 = std::get<Circle>(chain.elements[0]).radius;
        Loop2D rebuilt{chain.to_polygon(16)};
        PrimitiveChain again = fit_primitives(rebuilt, 0.01);
        REQUIRE(again.elements.size() == 1);
        auto* c = std::get_if<Circle>(&again.elements[0]);
        REQUIRE(c != nullptr);
        CHECK(std::abs(c->radius - r0) < 1e-6);
    }
}

TEST_CASE("profile orientation invariant holds after construction") {
    Plane plane = Plane::make(Vec3(0, 0, 0), Vec3(0, 0, 1));
    Polygon2 outer = make_square(1.0);
    std::reverse(outer.begin(), outer.end()); // feed clockwise
    std::vector<Loop2D> loops{Loop2D{outer}, resampled_loop(make_square(0.3))};
    auto profiles = group_profiles(loops, plane);
    REQUIRE(profiles.size() == 1);
    CHECK(profiles[0].outer.signed_area() > 0);
    for (const auto& h : profiles[0].holes) CHECK(h.signed_area() < 0);
}

TEST_CASE("extract_sketch_candidates: examples") {
    FitConfig cfg;
    SUBCASE("cube target contains a face profile of the right area") {
        TriMesh cube = make_box_mesh(Vec3(-1, -1, -1), Vec3(1, 1, 1));
        Target target = make_mesh_target(cube, 4096, 1);
        auto profiles = extract_sketch_candidates(target, cfg);
        REQUIRE(!profiles.empty());
        bool found = false;
        for (const auto& p : profiles) {
            if (p.holes.empty() && std::abs(p.area() - 4.0) < 4.0 * 1e-3) found = true;
            CHECK(p.id >= 0);
        }
        CHECK(found);
    }
    SUBCASE("sphere yields near-circular profiles from axis slices") {
        auto norm = normalize_mesh(make_sphere_mesh(0.5, 48, 24));
        Target target = make_mesh_target(norm.mesh, 4096, 1);
        auto profiles = extract_sketch_candidates(target, cfg);
        REQUIRE(!profiles.empty());
        int circular = 0;
        for (const auto& p : profiles) {
            PrimitiveChain chain = fit_primitives(p.outer, 0.02);
            if (chain.elements.size() == 1 && std::holds_alternative<Circle>(chain.elements[0]))
                ++circular;
        }
        CHECK(circular > 0);
    }
    SUBCASE("ids are dense and deterministic") {
        TriMesh cube = make_box_mesh(Vec3(-1, -1, -1), Vec3(1, 1, 1));
        Target target = make_mesh_target(cube, 4096, 1);
        auto a = extract_sketch_candidates(target, cfg);
        auto b = extract_sketch_candidates(target, cfg);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].id == int(i));
            CHECK(a[i].outer.points.size() == b[i].outer.points.size());
            CHECK((a[i].plane.origin - b[i].plane.origin).norm() == 0.0);
        }
    }
}
