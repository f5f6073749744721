#include <doctest.h>

#include "cadfit/mesh.hpp"
#include "test_support.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace cadfit;
using namespace cadfit::testing;

namespace {

std::string cube_binary_stl() {
    TriMesh cube = make_unit_cube_mesh();
    std::string path = (std::filesystem::temp_directory_path() / "cadfit_test_cube.stl").string();
    save_stl(cube, path);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string cube_ascii_stl() {
    TriMesh cube = make_unit_cube_mesh();
    std::ostringstream out;
    out << "solid cube\n";
    for (size_t f = 0; f < cube.faces.size(); ++f) {
        Vec3 n = cube.face_normal(int(f));
        out << "  facet normal " << n.x() << " " << n.y() << " " << n.z() << "\n";
        out << "    outer loop\n";
        for (int v : cube.faces[f]) {
            const Vec3& p = cube.vertices[v];
            out << "      vertex " << p.x() << " " << p.y() << " " << p.z() << "\n";
        }
        out << "    endloop\n  endfacet\n";
    }
    out << "endsolid cube\n";
    return out.str();
}

// Test-local parity ray cast, independent of the library's membership path:
// counts crossings of a fixed ray against every triangle by brute force.
bool parity_oracle(const TriMesh& mesh, const Vec3& p) {
    static const Vec3 dirs[] = {Vec3(0.57735, 0.57735, 0.57735).normalized(),
                                Vec3(0.8351, -0.2591, 0.4853).normalized(),
                                Vec3(-0.1427, 0.9253, -0.3513).normalized()};
    for (const Vec3& d : dirs) {
        int crossings = 0;
        bool degenerate = false;
        for (const auto& f : mesh.faces) {
            Vec3 v0 = mesh.vertices[f[0]];
            Vec3 e1 = mesh.vertices[f[1]] - v0;
            Vec3 e2 = mesh.vertices[f[2]] - v0;
            Vec3 pv = d.cross(e2);
            double det = e1.dot(pv);
            if (std::abs(det) < 1e-12) continue;
            Vec3 tv = p - v0;
            double u = tv.dot(pv) / det;
            Vec3 qv = tv.cross(e1);
            double v = d.dot(qv) / det;
            double t = e2.dot(qv) / det;
            if (u < -1e-10 || v < -1e-10 || u + v > 1 + 1e-10) continue;
            if (u < 1e-10 || v < 1e-10 || u + v > 1 - 1e-10 || std::abs(t) < 1e-12) {
                degenerate = true;
                break;
            }
            if (t > 0) ++crossings;
        }
        if (!degenerate) return (crossings & 1) != 0;
    }
    return false;
}

}  // namespace

TEST_CASE("load_mesh: binary cube welds to 8 vertices, 12 faces") {
    TriMesh mesh = parse_stl(cube_binary_stl());
    CHECK(mesh.vertices.size() == 8);
    CHECK(mesh.faces.size() == 12);
    CHECK(is_watertight(mesh));
}

TEST_CASE("load_mesh: ASCII cube parses to the identical mesh") {
    TriMesh bin = parse_stl(cube_binary_stl());
    TriMesh ascii = parse_stl(cube_ascii_stl());
    REQUIRE(ascii.vertices.size() == bin.vertices.size());
    REQUIRE(ascii.faces.size() == bin.faces.size());
    for (size_t i = 0; i < bin.vertices.size(); ++i)
        CHECK((ascii.vertices[i] - bin.vertices[i]).norm() < 1e-12);
    for (size_t i = 0; i < bin.faces.size(); ++i) CHECK(ascii.faces[i] == bin.faces[i]);
}

TEST_CASE("load_mesh: error kinds") {
    std::string bytes = cube_binary_stl();
    SUBCASE("truncated binary header") {
        CHECK_THROWS_AS(parse_stl(bytes.substr(0, 40)), Error);
        try {
            parse_stl(bytes.substr(0, 40));
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::malformed_input);
        }
    }
    SUBCASE("truncated triangle data") {
        try {
            parse_stl(bytes.substr(0, 200));
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::malformed_input);
        }
    }
    SUBCASE("zero faces") {
        std::string empty = bytes.substr(0, 84);
        std::fill(empty.begin() + 80, empty.begin() + 84, char(0));
        try {
            parse_stl(empty);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::empty_mesh);
        }
    }
    SUBCASE("unreadable file") {
        try {
            load_mesh("/nonexistent/nowhere.stl");
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::io_error);
        }
    }
}

TEST_CASE("normalize_mesh: examples and inverse") {
    SUBCASE("cube spanning [0,10]^3") {
        auto res = normalize_mesh(make_box_mesh(Vec3(0, 0, 0), Vec3(10, 10, 10)));
        CHECK(res.scale == doctest::Approx(0.2).epsilon(1e-12));
        CHECK((res.center - Vec3(5, 5, 5)).norm() < 1e-12);
        Box3 b = res.mesh.bounds();
        CHECK((b.lo - Vec3(-1, -1, -1)).norm() < 1e-9);
        CHECK((b.hi - Vec3(1, 1, 1)).norm() < 1e-9);
        CHECK(b.longest_side() == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("already normalized is the identity") {
        auto res = normalize_mesh(make_box_mesh(Vec3(-1, -1, -1), Vec3(1, 1, 1)));
        CHECK(res.scale == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(res.center.norm() < 1e-12);
    }
    SUBCASE("2x1x1 box: longest side maps to 2") {
        auto res = normalize_mesh(make_box_mesh(Vec3(0, 0, 0), Vec3(2, 1, 1)));
        Vec3 ext = res.mesh.bounds().extent();
        CHECK(ext.x() == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(ext.y() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(ext.z() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("inverse transform recovers the original vertices") {
        TriMesh box = make_box_mesh(Vec3(3, -2, 7), Vec3(9, 1, 8.5));
        auto res = normalize_mesh(box);
        for (size_t i = 0; i < box.vertices.size(); ++i) {
            Vec3 back = res.mesh.vertices[i] / res.scale + res.center;
            CHECK((back - box.vertices[i]).norm() <=
                  1e-9 * std::max(1.0, box.vertices[i].norm()));
        }
    }
    SUBCASE("zero-extent box is rejected") {
        TriMesh degenerate;
        degenerate.vertices = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        degenerate.faces = {{0, 1, 2}};
        CHECK_THROWS_AS(normalize_mesh(degenerate), Error);
    }
}

TEST_CASE("point_in_mesh: examples") {
    TriMesh cube = make_unit_cube_mesh();
    CHECK(point_in_mesh(cube, Vec3(0, 0, 0)));
    CHECK_FALSE(point_in_mesh(cube, Vec3(2, 0, 0)));
    TriMesh shell = make_shell_mesh();
    REQUIRE(is_watertight(shell));
    CHECK_FALSE(point_in_mesh(shell, Vec3(0, 0, 0)));       // cavity center
    CHECK(point_in_mesh(shell, Vec3(0.35, 0.35, 0.35)));    // shell material
    CHECK(parity_oracle(shell, Vec3(0, 0, 0)) == false);
}

TEST_CASE("point_in_mesh agrees with the parity oracle on random probes") {
    std::vector<TriMesh> meshes = {make_unit_cube_mesh(), make_shell_mesh(),
                                   make_tube_mesh(0.5, 0.2, -0.4, 0.4),
                                   make_sphere_mesh(0.45)};
    Rng rng(99);
    for (const auto& mesh : meshes) {
        MeshAccel accel(mesh);
        int checked = 0;
        for (int i = 0; i < 12000 && checked < 10000; ++i) {
            Vec3 p(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8));
            // skip probes near the surface: boundary results are unspecified
            double nearest = std::numeric_limits<double>::max();
            for (const auto& f : mesh.faces)
                for (int v : f) nearest = std::min(nearest, (mesh.vertices[v] - p).norm());
            bool near_surface = false;
            for (const auto& f : mesh.faces) {
                const Vec3 &a = mesh.vertices[f[0]], &b = mesh.vertices[f[1]],
                           &c = mesh.vertices[f[2]];
                Vec3 n = (b - a).cross(c - a);
                if (n.norm() < 1e-15) continue;
                if (std::abs(n.normalized().dot(p - a)) < 1e-3) near_surface = true;
            }
            if (near_surface) continue;
            ++checked;
            bool expected = parity_oracle(mesh, p);
            CHECK(point_in_mesh(mesh, p) == expected);
            CHECK(accel.contains(p) == expected);
        }
        CHECK(checked > 2000);
    }
}

TEST_CASE("sample_surface: examples") {
    SUBCASE("unit square centroid") {
        TriMesh square;
        square.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
        square.faces = {{0, 1, 2}, {0, 2, 3}};
        auto pts = sample_surface(square, 10000, 42);
        Vec3 mean = Vec3::Zero();
        for (const auto& p : pts) mean += p;
        mean /= double(pts.size());
        CHECK((mean - Vec3(0.5, 0.5, 0)).norm() < 0.02);
    }
    SUBCASE("same seed twice is bit-identical") {
        TriMesh cube = make_unit_cube_mesh();
        auto a = sample_surface(cube, 5000, 7);
        auto b = sample_surface(cube, 5000, 7);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    SUBCASE("cube per-face share within 5% of 1/6") {
        TriMesh cube = make_unit_cube_mesh();
        auto pts = sample_surface(cube, 60000, 3);
        int counts[6] = {0, 0, 0, 0, 0, 0};
        for (const auto& p : pts) {
            if (std::abs(p.z() + 0.5) < 1e-9) ++counts[0];
            else if (std::abs(p.z() - 0.5) < 1e-9) ++counts[1];
            else if (std::abs(p.y() + 0.5) < 1e-9) ++counts[2];
            else if (std::abs(p.y() - 0.5) < 1e-9) ++counts[3];
            else if (std::abs(p.x() - 0.5) < 1e-9) ++counts[4];
            else ++counts[5];
        }
        for (int c : counts) CHECK(std::abs(c / 60000.0 - 1.0 / 6.0) < 0.05 / 6.0);
    }
}

TEST_CASE("slice_with_plane: examples and closure") {
    TriMesh cube = make_unit_cube_mesh();
    SUBCASE("plane z=0 gives one unit-square loop") {
        auto loops = slice_with_plane(cube, Plane::make(Vec3(0, 0, 0), Vec3(0, 0, 1)));
        REQUIRE(loops.size() == 1);
        Plane plane = Plane::make(Vec3(0, 0, 0), Vec3(0, 0, 1));
        Polygon2 poly;
        for (const auto& p : loops[0].points) poly.push_back(plane.to_plane(p));
        CHECK(std::abs(std::abs(signed_area(poly)) - 1.0) < 1e-9);
    }
    SUBCASE("plane z=2 misses") {
        CHECK(slice_with_plane(cube, Plane::make(Vec3(0, 0, 2), Vec3(0, 0, 1))).empty());
    }
    SUBCASE("through-hole tube gives two loops at mid-height") {
        TriMesh tube = make_tube_mesh(0.5, 0.2, -0.4, 0.4);
        REQUIRE(is_watertight(tube));
        auto loops = slice_with_plane(tube, Plane::make(Vec3(0, 0, 0), Vec3(0, 0, 1)));
        CHECK(loops.size() == 2);
    }
    SUBCASE("loops close within tolerance") {
        TriMesh sphere = make_sphere_mesh(0.5);
        auto loops = slice_with_plane(sphere, Plane::make(Vec3(0, 0, 0.17), Vec3(0, 0, 1)));
        REQUIRE(!loops.empty());
        for (const auto& loop : loops) {
            REQUIRE(loop.points.size() >= 3);
            for (size_t i = 0; i < loop.points.size(); ++i) {
                Vec3 gap = loop.points[(i + 1) % loop.points.size()] - loop.points[i];
                CHECK(gap.norm() > 1e-9); // consecutive points distinct
            }
        }
    }
}

TEST_CASE("cluster_normals: perfect cube yields 6 clusters covering all faces") {
    TriMesh cube = make_unit_cube_mesh();
    auto clusters = cluster_normals(cube, 5.0);
    CHECK(clusters.size() == 6);
    size_t covered = 0;
    for (const auto& c : clusters) covered += c.faces.size();
    CHECK(covered == cube.faces.size());
}

TEST_CASE("propose_sketch_planes: examples") {
    FitConfig cfg;
    SUBCASE("cube: 12 offset planes plus 15 axis planes") {
        TriMesh cube = make_box_mesh(Vec3(-1, -1, -1), Vec3(1, 1, 1));
        auto planes = propose_sketch_planes(cube, cfg);
        int cluster_count = 0, axis_count = 0;
        for (const auto& p : planes) {
            if (p.source == PlaneSource::planar_cluster) ++cluster_count;
            if (p.source == PlaneSource::axis_slice) ++axis_count;
        }
        CHECK(cluster_count == 12);
        CHECK(axis_count == 15);
        CHECK(planes.size() == 27);
    }
    SUBCASE("sphere: no cluster passes the area threshold") {
        auto norm = normalize_mesh(make_sphere_mesh(0.5));
        auto planes = propose_sketch_planes(norm.mesh, cfg);
        for (const auto& p : planes) CHECK(p.source == PlaneSource::axis_slice);
        CHECK(planes.size() == size_t(3 * cfg.n_slices));
    }
    SUBCASE("axis-only configuration") {
        cfg.sketch_source = SketchSource::axis;
        TriMesh cube = make_box_mesh(Vec3(-1, -1, -1), Vec3(1, 1, 1));
        auto planes = propose_sketch_planes(cube, cfg);
        CHECK(planes.size() == size_t(3 * cfg.n_slices));
    }
}

TEST_CASE("Plane::make produces an orthonormal frame") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        Vec3 n(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        if (n.norm() < 1e-3) continue;
        Plane p = Plane::make(Vec3(0, 0, 0), n);
        CHECK(std::abs(p.normal.norm() - 1) < 1e-9);
        CHECK(std::abs(p.u_axis.norm() - 1) < 1e-9);
        CHECK(std::abs(p.normal.dot(p.u_axis)) < 1e-9);
        CHECK(std::abs(p.v_axis().norm() - 1) < 1e-9);
    }
}
