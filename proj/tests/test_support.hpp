#pragma once

#include "cadfit/mesh.hpp"
#include "cadfit/program.hpp"
#include "cadfit/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace cadfit::testing {

// Axis-aligned box as 12 triangles with outward normals.
inline TriMesh make_box_mesh(const Vec3& lo, const Vec3& hi) {
    TriMesh m;
    m.vertices = {
        {lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
        {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
        {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()},
    };
    m.faces = {
        {0, 2, 1}, {0, 3, 2}, // bottom (-z)
        {4, 5, 6}, {4, 6, 7}, // top (+z)
        {0, 1, 5}, {0, 5, 4}, // -y
        {2, 3, 7}, {2, 7, 6}, // +y
        {1, 2, 6}, {1, 6, 5}, // +x
        {3, 0, 4}, {3, 4, 7}, // -x
    };
    return m;
}

inline TriMesh make_unit_cube_mesh() {
    return make_box_mesh(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5));
}

// Shell: outer box with a reversed inner box (cubic cavity).
inline TriMesh make_shell_mesh() {
    TriMesh outer = make_box_mesh(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5));
    TriMesh inner = make_box_mesh(Vec3(-0.2, -0.2, -0.2), Vec3(0.2, 0.2, 0.2));
    TriMesh m = outer;
    int base = int(m.vertices.size());
    for (const auto& v : inner.vertices) m.vertices.push_back(v);
    for (auto f : inner.faces) m.faces.push_back({f[0] + base, f[2] + base, f[1] + base});
    return m;
}

// Box with a square through-hole along z.
inline TriMesh make_tube_mesh(double outer_half, double inner_half, double z0, double z1) {
    TriMesh m;
    auto ring = [&](double half, double z) {
        int base = int(m.vertices.size());
        m.vertices.push_back({-half, -half, z});
        m.vertices.push_back({half, -half, z});
        m.vertices.push_back({half, half, z});
        m.vertices.push_back({-half, half, z});
        return base;
    };
    int ob = ring(outer_half, z0);
    int ot = ring(outer_half, z1);
    int ib = ring(inner_half, z0);
    int it = ring(inner_half, z1);
    auto quad = [&](int a, int b, int c, int d) {
        m.faces.push_back({a, b, c});
        m.faces.push_back({a, c, d});
    };
    for (int i = 0; i < 4; ++i) {
        int j = (i + 1) % 4;
        quad(ob + i, ob + j, ot + j, ot + i); // outer wall, outward
        quad(ib + j, ib + i, it + i, it + j); // inner wall, toward the hole
        quad(ob + j, ob + i, ib + i, ib + j); // bottom ring (-z)
        quad(ot + i, ot + j, it + j, it + i); // top ring (+z)
    }
    return m;
}

// Closed UV sphere.
inline TriMesh make_sphere_mesh(double radius, int slices = 24, int stacks = 12) {
    TriMesh m;
    m.vertices.push_back({0, 0, radius});
    for (int i = 1; i < stacks; ++i) {
        double phi = M_PI * i / stacks;
        for (int j = 0; j < slices; ++j) {
            double theta = 2 * M_PI * j / slices;
            m.vertices.push_back({radius * std::sin(phi) * std::cos(theta),
                                  radius * std::sin(phi) * std::sin(theta),
                                  radius * std::cos(phi)});
        }
    }
    m.vertices.push_back({0, 0, -radius});
    int south = int(m.vertices.size()) - 1;
    auto at = [&](int i, int j) { return 1 + (i - 1) * slices + (j % slices); };
    for (int j = 0; j < slices; ++j) m.faces.push_back({0, at(1, j), at(1, j + 1)});
    for (int i = 1; i + 1 < stacks; ++i)
        for (int j = 0; j < slices; ++j) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    for (int j = 0; j < slices; ++j)
        m.faces.push_back({south, at(stacks - 1, j + 1), at(stacks - 1, j)});
    return m;
}

// Closed cylinder along z with fan caps.
inline TriMesh make_cylinder_mesh(double radius, double z0, double z1, int segments = 256) {
    TriMesh m;
    m.vertices.push_back({0, 0, z0});
    m.vertices.push_back({0, 0, z1});
    for (int j = 0; j < segments; ++j) {
        double a = 2 * M_PI * j / segments;
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z0});
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z1});
    }
    auto bot = [&](int j) { return 2 + 2 * (j % segments); };
    auto top = [&](int j) { return 3 + 2 * (j % segments); };
    for (int j = 0; j < segments; ++j) {
        m.faces.push_back({0, bot(j + 1), bot(j)});
        m.faces.push_back({1, top(j), top(j + 1)});
        m.faces.push_back({bot(j), bot(j + 1), top(j + 1)});
        m.faces.push_back({bot(j), top(j + 1), top(j)});
    }
    return m;
}

inline Polygon2 make_square(double half, const Vec2& center = Vec2(0, 0)) {
    return {center + Vec2(-half, -half), center + Vec2(half, -half), center + Vec2(half, half),
            center + Vec2(-half, half)};
}

inline Polygon2 make_circle_poly(double radius, const Vec2& center = Vec2(0, 0), int n = 128) {
    Polygon2 p;
    for (int i = 0; i < n; ++i) {
        double a = 2 * M_PI * i / n;
        p.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
    }
    return p;
}

inline Profile make_profile(const Polygon2& outer, const Plane& plane = Plane{},
                            const std::vector<Polygon2>& holes = {}) {
    Profile prof;
    prof.plane = plane;
    prof.outer.points = outer;
    if (prof.outer.signed_area() < 0)
        std::reverse(prof.outer.points.begin(), prof.outer.points.end());
    for (auto h : holes) {
        Loop2D hole{h};
        if (hole.signed_area() > 0) std::reverse(hole.points.begin(), hole.points.end());
        prof.holes.push_back(hole);
    }
    return prof;
}

inline Operation make_extrude(const Polygon2& outer, const Plane& plane, double height,
                              BoolRole role = BoolRole::boolean_union,
                              const std::vector<Polygon2>& holes = {}) {
    Operation op;
    op.kind = OpKind::extrude;
    op.role = role;
    op.profile = make_profile(outer, plane, holes);
    op.height = height;
    return op;
}

// Mesh volume by the divergence theorem.
inline double mesh_volume(const TriMesh& m) {
    double v6 = 0;
    for (const auto& f : m.faces)
        v6 += m.vertices[f[0]].dot(m.vertices[f[1]].cross(m.vertices[f[2]]));
    return v6 / 6.0;
}

}  // namespace cadfit::testing
