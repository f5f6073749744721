#pragma once

#include "cadfit/config.hpp"
#include "cadfit/types.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace cadfit {

// Indexed triangle surface. Immutable after construction; all queries are
// read-only and safe to call from many workers.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    Vec3 face_normal(int f) const;    // unit normal, right-hand rule
    double face_area(int f) const;
    double surface_area() const;
    Box3 bounds() const;
};

// Oriented sketch/slicing plane with an in-plane frame.
struct Plane {
    Vec3 origin{0, 0, 0};
    Vec3 normal{0, 0, 1};
    Vec3 u_axis{1, 0, 0};

    Vec3 v_axis() const { return normal.cross(u_axis); }
    Vec2 to_plane(const Vec3& p) const {
        Vec3 d = p - origin;
        return {d.dot(u_axis), d.dot(v_axis())};
    }
    double height_of(const Vec3& p) const { return (p - origin).dot(normal); }
    Vec3 to_world(const Vec2& uv, double h = 0.0) const {
        return origin + uv.x() * u_axis + uv.y() * v_axis() + h * normal;
    }
    Plane translated(double h) const { return {origin + h * normal, normal, u_axis}; }

    // Builds a plane with a deterministic in-plane frame for the given normal.
    static Plane make(const Vec3& origin, const Vec3& normal);
};

// Closed 3D polyline (first point implicitly follows the last).
struct Loop3D {
    std::vector<Vec3> points;
};

// Where a proposed plane came from; drives profile scoring and the
// rectangular-slice suppression rule.
enum class PlaneSource { planar_cluster, axis_slice, residual };

struct ProposedPlane {
    Plane plane;          // the plane to slice with
    Plane reference;      // sketch plane profiles are attributed to
    PlaneSource source;
    int axis = -1;        // for axis_slice: 0/1/2
};

TriMesh load_mesh(const std::string& path);
TriMesh parse_stl(const std::string& bytes); // binary or ASCII
void save_stl(const TriMesh& mesh, const std::string& path);

// Welds duplicate vertices (1e-7) and drops degenerate faces.
TriMesh weld_vertices(const TriMesh& mesh, double tol = 1e-7);

// Closed 2-manifold test: every edge shared by exactly two oppositely
// oriented faces.
bool is_watertight(const TriMesh& mesh);

struct NormalizeResult {
    TriMesh mesh;
    double scale;  // applied as out = (in - center) * scale
    Vec3 center;
};
NormalizeResult normalize_mesh(const TriMesh& mesh);

// Generalized winding number (Van Oosterom-Strackee solid angles); O(faces).
double winding_number(const TriMesh& mesh, const Vec3& p);

// Inside test for watertight meshes: BVH parity ray cast with perturbation
// retries on degenerate hits, winding-number fallback.
class MeshAccel {
public:
    explicit MeshAccel(const TriMesh& mesh);
    ~MeshAccel();
    MeshAccel(MeshAccel&&) noexcept;
    MeshAccel& operator=(MeshAccel&&) noexcept;

    bool contains(const Vec3& p) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    const TriMesh* mesh_;
};

// Convenience single-query form (builds no acceleration; O(faces)).
bool point_in_mesh(const TriMesh& mesh, const Vec3& p);

// Area-weighted uniform surface samples, deterministic per seed.
std::vector<Vec3> sample_surface(const TriMesh& mesh, size_t n, uint64_t seed);

// All triangle-plane intersection segments chained into closed loops
// (endpoint tolerance 1e-7); open chains are discarded.
std::vector<Loop3D> slice_with_plane(const TriMesh& mesh, const Plane& plane);

// Planar-cluster offset planes plus axis-aligned quantile planes,
// deduplicated. Requires a normalized mesh.
std::vector<ProposedPlane> propose_sketch_planes(const TriMesh& mesh, const FitConfig& cfg);

// Greedy normal clustering used by propose_sketch_planes; exposed for tests.
struct NormalCluster {
    Vec3 normal;   // area-weighted mean, unit
    Vec3 centroid; // area-weighted face centroid
    double area;
    std::vector<int> faces;
};
std::vector<NormalCluster> cluster_normals(const TriMesh& mesh, double angle_tol_deg);

}  // namespace cadfit
