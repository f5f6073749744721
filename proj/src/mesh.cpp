#include "cadfit/mesh.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace cadfit {

Vec3 TriMesh::face_normal(int f) const {
    const auto& t = faces[f];
    Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3(0, 0, 0);
}

double TriMesh::face_area(int f) const {
    const auto& t = faces[f];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

double TriMesh::surface_area() const {
    double a = 0;
    for (int f = 0; f < int(faces.size()); ++f) a += face_area(f);
    return a;
}

Box3 TriMesh::bounds() const {
    Box3 b;
    for (const auto& v : vertices) b.expand(v);
    return b;
}

Plane Plane::make(const Vec3& origin, const Vec3& normal) {
    Vec3 n = normal.normalized();
    // stable perpendicular: cross with the least-dominant axis
    Vec3 ref = std::abs(n.x()) <= std::abs(n.y()) && std::abs(n.x()) <= std::abs(n.z())
                   ? Vec3(1, 0, 0)
                   : (std::abs(n.y()) <= std::abs(n.z()) ? Vec3(0, 1, 0) : Vec3(0, 0, 1));
    Vec3 u = n.cross(ref).normalized();
    return {origin, n, u};
}

TriMesh weld_vertices(const TriMesh& mesh, double tol) {
    // snap to a tol-grid; vertices within tol of each other land in the same
    // or adjacent cells, so also probe neighbors
    struct Key {
        int64_t x, y, z;
        bool operator<(const Key& o) const {
            return std::tie(x, y, z) < std::tie(o.x, o.y, o.z);
        }
    };
    auto key_of = [&](const Vec3& v) {
        return Key{int64_t(std::floor(v.x() / tol)), int64_t(std::floor(v.y() / tol)),
                   int64_t(std::floor(v.z() / tol))};
    };
    std::map<Key, int> lookup;
    TriMesh out;
    std::vector<int> remap(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        Key k = key_of(v);
        int found = -1;
        for (int dx = -1; dx <= 1 && found < 0; ++dx)
            for (int dy = -1; dy <= 1 && found < 0; ++dy)
                for (int dz = -1; dz <= 1 && found < 0; ++dz) {
                    auto it = lookup.find(Key{k.x + dx, k.y + dy, k.z + dz});
                    if (it != lookup.end() && (out.vertices[it->second] - v).norm() <= tol)
                        found = it->second;
                }
        if (found < 0) {
            found = int(out.vertices.size());
            out.vertices.push_back(v);
            lookup.emplace(k, found);
        }
        remap[i] = found;
    }
    for (const auto& f : mesh.faces) {
        std::array<int, 3> g{remap[f[0]], remap[f[1]], remap[f[2]]};
        if (g[0] == g[1] || g[1] == g[2] || g[2] == g[0]) continue; // degenerate after weld
        out.faces.push_back(g);
    }
    return out;
}

bool is_watertight(const TriMesh& mesh) {
    if (mesh.faces.empty()) return false;
    std::map<std::pair<int, int>, int> edges;
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            int a = f[e], b = f[(e + 1) % 3];
            if (a == b) return false;
            edges[{a, b}] += 1;
        }
    }
    for (const auto& [e, count] : edges) {
        if (count != 1) return false; // duplicate directed edge: non-manifold
        auto rev = edges.find({e.second, e.first});
        if (rev == edges.end()) return false; // boundary edge
    }
    return true;
}

NormalizeResult normalize_mesh(const TriMesh& mesh) {
    Box3 b = mesh.bounds();
    if (b.empty()) throw Error(ErrorKind::empty_mesh, "normalize_mesh: empty mesh");
    double longest = b.longest_side();
    if (longest <= 0)
        throw Error(ErrorKind::degenerate_input, "normalize_mesh: zero-extent bounding box");
    Vec3 center = b.center();
    double scale = 2.0 / longest;
    TriMesh out = mesh;
    for (auto& v : out.vertices) v = (v - center) * scale;
    return {std::move(out), scale, center};
}

double winding_number(const TriMesh& mesh, const Vec3& p) {
    // Van Oosterom & Strackee signed solid angle per triangle
    double total = 0;
    for (const auto& f : mesh.faces) {
        Vec3 a = mesh.vertices[f[0]] - p;
        Vec3 b = mesh.vertices[f[1]] - p;
        Vec3 c = mesh.vertices[f[2]] - p;
        double la = a.norm(), lb = b.norm(), lc = c.norm();
        double denom = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        double numer = a.dot(b.cross(c));
        total += 2.0 * std::atan2(numer, denom);
    }
    return total / (4.0 * M_PI);
}

bool point_in_mesh(const TriMesh& mesh, const Vec3& p) {
    return winding_number(mesh, p) > 0.5;
}

// ---------------------------------------------------------------------------
// BVH ray casting
// ---------------------------------------------------------------------------

struct MeshAccel::Impl {
    struct Node {
        Box3 box;
        int left = -1, right = -1; // children, or
        int begin = 0, end = 0;    // leaf triangle range
    };
    const TriMesh* mesh;
    std::vector<Node> nodes;
    std::vector<int> tris; // triangle indices, partitioned by build

    explicit Impl(const TriMesh& m) : mesh(&m) {
        tris.resize(m.faces.size());
        std::iota(tris.begin(), tris.end(), 0);
        if (!tris.empty()) build(0, int(tris.size()));
    }

    Box3 tri_box(int t) const {
        Box3 b;
        for (int v : mesh->faces[t]) b.expand(mesh->vertices[v]);
        return b;
    }

    int build(int begin, int end) {
        Node node;
        for (int i = begin; i < end; ++i) node.box.expand(tri_box(tris[i]));
        int idx = int(nodes.size());
        nodes.push_back(node);
        if (end - begin <= 4) {
            nodes[idx].begin = begin;
            nodes[idx].end = end;
            return idx;
        }
        Vec3 ext = node.box.extent();
        int axis = ext.x() >= ext.y() && ext.x() >= ext.z() ? 0 : (ext.y() >= ext.z() ? 1 : 2);
        int mid = (begin + end) / 2;
        std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                         [&](int a, int b) {
                             return tri_box(a).center()[axis] < tri_box(b).center()[axis];
                         });
        int l = build(begin, mid);
        int r = build(mid, end);
        nodes[idx].left = l;
        nodes[idx].right = r;
        nodes[idx].begin = nodes[idx].end = 0;
        return idx;
    }

    static bool ray_box(const Vec3& o, const Vec3& inv_d, const Box3& b) {
        double t0 = 0, t1 = std::numeric_limits<double>::max();
        for (int a = 0; a < 3; ++a) {
            double ta = (b.lo[a] - o[a]) * inv_d[a];
            double tb = (b.hi[a] - o[a]) * inv_d[a];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        return true;
    }

    // Counts crossings along ray (o, d); returns false if any hit is too close
    // to a triangle edge or a grazing configuration (caller retries).
    bool count_hits(const Vec3& o, const Vec3& d, int& crossings) const {
        crossings = 0;
        if (nodes.empty()) return true;
        Vec3 inv_d(1.0 / d.x(), 1.0 / d.y(), 1.0 / d.z());
        constexpr double kEps = 1e-10;
        std::vector<int> stack{0};
        while (!stack.empty()) {
            int ni = stack.back();
            stack.pop_back();
            const Node& node = nodes[ni];
            if (!ray_box(o, inv_d, node.box)) continue;
            if (node.left < 0) {
                for (int i = node.begin; i < node.end; ++i) {
                    const auto& f = mesh->faces[tris[i]];
                    const Vec3& v0 = mesh->vertices[f[0]];
                    Vec3 e1 = mesh->vertices[f[1]] - v0;
                    Vec3 e2 = mesh->vertices[f[2]] - v0;
                    Vec3 pv = d.cross(e2);
                    double det = e1.dot(pv);
                    double scale = std::max(1.0, e1.norm() * e2.norm());
                    if (std::abs(det) < kEps * scale) {
                        // grazing: only degenerate if the ray passes near the triangle plane
                        Vec3 n = e1.cross(e2);
                        double nn = n.norm();
                        if (nn > 0 && std::abs(n.dot(o - v0)) / nn < 1e-9) return false;
                        continue;
                    }
                    double inv_det = 1.0 / det;
                    Vec3 tv = o - v0;
                    double u = tv.dot(pv) * inv_det;
                    Vec3 qv = tv.cross(e1);
                    double v = d.dot(qv) * inv_det;
                    double t = e2.dot(qv) * inv_det;
                    constexpr double kBary = 1e-9;
                    if (u < -kBary || v < -kBary || u + v > 1 + kBary) continue;
                    if (std::abs(t) < 1e-12) return false; // origin on surface
                    if (u < kBary || v < kBary || u + v > 1 - kBary) return false; // edge hit
                    if (t > 0) ++crossings;
                }
            } else {
                stack.push_back(node.left);
                stack.push_back(node.right);
            }
        }
        return true;
    }
};

MeshAccel::MeshAccel(const TriMesh& mesh) : impl_(new Impl(mesh)), mesh_(&mesh) {}
MeshAccel::~MeshAccel() = default;
MeshAccel::MeshAccel(MeshAccel&&) noexcept = default;
MeshAccel& MeshAccel::operator=(MeshAccel&&) noexcept = default;

bool MeshAccel::contains(const Vec3& p) const {
    // fixed retry directions keep the result deterministic
    static const Vec3 kDirs[] = {
        Vec3(0.287514, 0.662083, 0.692078), Vec3(-0.5313, 0.791202, 0.302138),
        Vec3(0.93823, -0.203158, 0.280196), Vec3(0.128736, -0.964035, 0.232596),
        Vec3(-0.778151, -0.470391, 0.416312), Vec3(0.331149, 0.127682, -0.934895),
        Vec3(-0.193561, 0.562365, -0.803924), Vec3(0.719026, -0.517612, -0.463496),
    };
    for (const Vec3& d : kDirs) {
        int crossings = 0;
        if (impl_->count_hits(p, d, crossings)) return (crossings & 1) != 0;
    }
    return winding_number(*mesh_, p) > 0.5;
}

// ---------------------------------------------------------------------------
// Surface sampling
// ---------------------------------------------------------------------------

std::vector<Vec3> sample_surface(const TriMesh& mesh, size_t n, uint64_t seed) {
    std::vector<double> cum(mesh.faces.size());
    double total = 0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        total += mesh.face_area(int(f));
        cum[f] = total;
    }
    std::vector<Vec3> out;
    out.reserve(n);
    if (total <= 0 || mesh.faces.empty()) return out;
    Rng rng(seed);
    for (size_t i = 0; i < n; ++i) {
        double r = rng.uniform() * total;
        size_t f = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
        if (f >= mesh.faces.size()) f = mesh.faces.size() - 1;
        const auto& t = mesh.faces[f];
        double su = std::sqrt(rng.uniform());
        double v = rng.uniform();
        double b0 = 1 - su, b1 = su * (1 - v), b2 = su * v;
        out.push_back(b0 * mesh.vertices[t[0]] + b1 * mesh.vertices[t[1]] +
                      b2 * mesh.vertices[t[2]]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plane slicing
// ---------------------------------------------------------------------------

namespace {

struct SnapKey {
    int64_t x, y, z;
    bool operator<(const SnapKey& o) const { return std::tie(x, y, z) < std::tie(o.x, o.y, o.z); }
};

SnapKey snap_point(const Vec3& p, double tol) {
    return {int64_t(std::llround(p.x() / tol)), int64_t(std::llround(p.y() / tol)),
            int64_t(std::llround(p.z() / tol))};
}

}  // namespace

std::vector<Loop3D> slice_with_plane(const TriMesh& mesh, const Plane& plane) {
    constexpr double kTol = 1e-7;
    // collect crossing segments
    std::vector<std::pair<Vec3, Vec3>> segments;
    for (const auto& f : mesh.faces) {
        double d[3];
        Vec3 v[3];
        for (int i = 0; i < 3; ++i) {
            v[i] = mesh.vertices[f[i]];
            d[i] = (v[i] - plane.origin).dot(plane.normal);
            if (d[i] == 0) d[i] = 1e-15; // zeros treated as positive for parity consistency
        }
        Vec3 pts[2];
        int np = 0;
        for (int i = 0; i < 3 && np < 2; ++i) {
            int j = (i + 1) % 3;
            if ((d[i] > 0) != (d[j] > 0)) {
                double t = d[i] / (d[i] - d[j]);
                pts[np++] = v[i] + t * (v[j] - v[i]);
            }
        }
        if (np == 2 && (pts[0] - pts[1]).norm() > kTol) {
            // orient the segment so loops wind counterclockwise around +normal:
            // keep the triangle's own orientation relative to the plane
            Vec3 tri_n = (v[1] - v[0]).cross(v[2] - v[0]);
            Vec3 seg = pts[1] - pts[0];
            if (plane.normal.cross(tri_n).dot(seg) < 0) std::swap(pts[0], pts[1]);
            segments.emplace_back(pts[0], pts[1]);
        }
    }
    // chain by snapped endpoints
    std::map<SnapKey, std::vector<int>> starts;
    for (int i = 0; i < int(segments.size()); ++i)
        starts[snap_point(segments[i].first, kTol)].push_back(i);
    std::vector<bool> used(segments.size(), false);
    std::vector<Loop3D> loops;
    for (int i = 0; i < int(segments.size()); ++i) {
        if (used[i]) continue;
        Loop3D loop;
        int cur = i;
        used[i] = true;
        loop.points.push_back(segments[i].first);
        bool closed = false;
        while (true) {
            const Vec3& tail = segments[cur].second;
            if ((tail - loop.points.front()).norm() <= kTol * 10) {
                closed = true;
                break;
            }
            loop.points.push_back(tail);
            auto it = starts.find(snap_point(tail, kTol));
            int next = -1;
            if (it != starts.end()) {
                for (int cand : it->second) {
                    if (!used[cand] && (segments[cand].first - tail).norm() <= kTol * 10) {
                        next = cand;
                        break;
                    }
                }
            }
            if (next < 0) break; // open chain, discard
            used[next] = true;
            cur = next;
        }
        if (closed && loop.points.size() >= 3) {
            // drop consecutive duplicates
            Loop3D clean;
            for (const auto& p : loop.points) {
                if (clean.points.empty() || (clean.points.back() - p).norm() > 1e-9)
                    clean.points.push_back(p);
            }
            while (clean.points.size() >= 2 &&
                   (clean.points.back() - clean.points.front()).norm() <= 1e-9)
                clean.points.pop_back();
            if (clean.points.size() >= 3) loops.push_back(std::move(clean));
        }
    }
    return loops;
}

// ---------------------------------------------------------------------------
// Sketch plane proposal
// ---------------------------------------------------------------------------

std::vector<NormalCluster> cluster_normals(const TriMesh& mesh, double angle_tol_deg) {
    double cos_tol = std::cos(angle_tol_deg * M_PI / 180.0);
    std::vector<NormalCluster> clusters;
    // greedy assignment in face order; cluster normal is the area-weighted mean
    for (int f = 0; f < int(mesh.faces.size()); ++f) {
        double area = mesh.face_area(f);
        if (area <= 0) continue;
        Vec3 n = mesh.face_normal(f);
        const auto& t = mesh.faces[f];
        Vec3 c = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
        int best = -1;
        double best_dot = cos_tol;
        for (int k = 0; k < int(clusters.size()); ++k) {
            double dot = clusters[k].normal.dot(n);
            if (dot >= best_dot) {
                best_dot = dot;
                best = k;
            }
        }
        if (best < 0) {
            clusters.push_back({n, c * area, area, {f}});
        } else {
            auto& cl = clusters[best];
            Vec3 mean = cl.normal * cl.area + n * area;
            cl.normal = mean.normalized();
            cl.centroid += c * area;
            cl.area += area;
            cl.faces.push_back(f);
        }
    }
    for (auto& cl : clusters) cl.centroid /= cl.area;
    // refit: stray faces (e.g. curved walls grazing the angle tolerance) drag
    // the plane offset; keep only faces near the area-weighted median offset
    for (auto& cl : clusters) {
        std::vector<std::pair<double, double>> offsets; // (offset, area)
        offsets.reserve(cl.faces.size());
        for (int f : cl.faces) {
            const auto& t = mesh.faces[f];
            Vec3 c = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
            offsets.emplace_back(c.dot(cl.normal), mesh.face_area(f));
        }
        std::sort(offsets.begin(), offsets.end());
        double half = 0.5 * cl.area, acc = 0, median = offsets.back().first;
        for (const auto& [o, a] : offsets) {
            acc += a;
            if (acc >= half) {
                median = o;
                break;
            }
        }
        Vec3 normal = Vec3::Zero(), centroid = Vec3::Zero();
        double area = 0;
        for (int f : cl.faces) {
            const auto& t = mesh.faces[f];
            Vec3 c = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
            if (std::abs(c.dot(cl.normal) - median) > 0.02) continue;
            double a = mesh.face_area(f);
            normal += mesh.face_normal(f) * a;
            centroid += c * a;
            area += a;
        }
        if (area > 0) {
            cl.normal = normal.normalized();
            cl.centroid = centroid / area;
            cl.area = area;
        }
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const NormalCluster& a, const NormalCluster& b) { return a.area > b.area; });
    return clusters;
}

std::vector<ProposedPlane> propose_sketch_planes(const TriMesh& mesh, const FitConfig& cfg) {
    std::vector<ProposedPlane> planes;
    double total_area = mesh.surface_area();

    if (cfg.sketch_source != SketchSource::axis) {
        auto clusters = cluster_normals(mesh, cfg.cluster_angle_deg);
        for (const auto& cl : clusters) {
            if (cl.area < cfg.min_cluster_area_frac * total_area) continue;
            Plane reference = Plane::make(cl.centroid, cl.normal);
            for (double s : {+1.0, -1.0}) {
                ProposedPlane p;
                p.plane = reference.translated(s * cfg.slice_offset);
                p.reference = reference;
                p.source = PlaneSource::planar_cluster;
                planes.push_back(p);
            }
        }
    }
    if (cfg.sketch_source != SketchSource::planar) {
        Box3 b = mesh.bounds();
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 n(0, 0, 0);
            n[axis] = 1;
            for (int k = 1; k <= cfg.n_slices; ++k) {
                double q = b.lo[axis] + (b.hi[axis] - b.lo[axis]) * double(k) / (cfg.n_slices + 1);
                Vec3 origin = b.center();
                origin[axis] = q;
                ProposedPlane p;
                p.plane = Plane::make(origin, n);
                p.reference = p.plane;
                p.source = PlaneSource::axis_slice;
                p.axis = axis;
                planes.push_back(p);
            }
        }
    }
    // dedupe: same normal within angle tolerance and same offset within 1e-4
    double cos_tol = std::cos(cfg.cluster_angle_deg * M_PI / 180.0);
    std::vector<ProposedPlane> unique;
    for (const auto& p : planes) {
        bool dup = false;
        for (const auto& q : unique) {
            if (p.plane.normal.dot(q.plane.normal) >= cos_tol &&
                std::abs(p.plane.origin.dot(p.plane.normal) -
                         q.plane.origin.dot(q.plane.normal)) < 1e-4) {
                dup = true;
                break;
            }
        }
        if (!dup) unique.push_back(p);
    }
    return unique;
}

}  // namespace cadfit
