#include "cadfit/program.hpp"

#include "cadfit/mc_tables.hpp"
#include "cadfit/polygon.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace cadfit {

namespace {

Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

double corner_turn_angle(const Polygon2& poly, int i) {
    int n = int(poly.size());
    Vec2 u0 = (poly[i] - poly[(i + n - 1) % n]).normalized();
    Vec2 u1 = (poly[(i + 1) % n] - poly[i]).normalized();
    return std::acos(std::clamp(u0.dot(u1), -1.0, 1.0));
}

}  // namespace

Polygon2 apply_corner_to_polygon(const Polygon2& poly, int corner, CornerKind kind, double param) {
    int n = int(poly.size());
    if (corner < 0 || corner >= n)
        throw Error(ErrorKind::invalid_program, "corner index out of range");
    if (!(param > 0)) throw Error(ErrorKind::invalid_program, "corner param must be > 0");
    const Vec2& prev = poly[(corner + n - 1) % n];
    const Vec2& at = poly[corner];
    const Vec2& next = poly[(corner + 1) % n];
    Vec2 e0 = at - prev, e1 = next - at;
    double l0 = e0.norm(), l1 = e1.norm();
    double shorter = std::min(l0, l1);
    if (param > 0.5 * shorter + 1e-12)
        throw Error(ErrorKind::invalid_program,
                    "corner param exceeds half of the shorter adjacent edge");
    Vec2 u0 = e0 / l0, u1 = e1 / l1;
    double turn = std::acos(std::clamp(u0.dot(u1), -1.0, 1.0));
    if (turn <= 5.0 * M_PI / 180.0)
        throw Error(ErrorKind::invalid_program, "corner too flat for a feature (turn <= 5 deg)");

    Polygon2 out;
    out.reserve(poly.size() + 17);
    for (int i = 0; i < n; ++i) {
        if (i != corner) {
            out.push_back(poly[i]);
            continue;
        }
        if (kind == CornerKind::chamfer) {
            out.push_back(at - param * u0);
            out.push_back(at + param * u1);
        } else {
            double d = param * std::tan(0.5 * turn); // tangent offset along both edges
            if (d > 0.5 * shorter + 1e-12)
                throw Error(ErrorKind::invalid_program,
                            "fillet radius too large for adjacent edges");
            Vec2 t0 = at - d * u0;
            Vec2 t1 = at + d * u1;
            bool convex = (u0.x() * u1.y() - u0.y() * u1.x()) > 0;
            Vec2 center = convex ? Vec2(t0 + param * rot90(u0)) : Vec2(t0 - param * rot90(u0));
            double a0 = std::atan2(t0.y() - center.y(), t0.x() - center.x());
            double a1 = std::atan2(t1.y() - center.y(), t1.x() - center.x());
            double sweep = a1 - a0;
            if (convex)
                while (sweep < 0) sweep += 2 * M_PI;
            else
                while (sweep > 0) sweep -= 2 * M_PI;
            constexpr int kArcSegments = 16;
            for (int k = 0; k <= kArcSegments; ++k) {
                double a = a0 + sweep * double(k) / kArcSegments;
                out.push_back(center + param * Vec2(std::cos(a), std::sin(a)));
            }
        }
    }
    return out;
}

Profile apply_corner_feature(const Profile& profile, int corner, CornerKind kind, double param) {
    Profile out = profile;
    out.outer.points = apply_corner_to_polygon(profile.outer.points, corner, kind, param);
    return out;
}

namespace {

// Features are stored against original outer-loop corner indices; applying
// them in descending index order keeps earlier indices valid.
Polygon2 outer_with_features(const Profile& profile, const std::vector<CornerFeature>& features) {
    Polygon2 poly = profile.outer.points;
    std::vector<CornerFeature> sorted = features;
    std::sort(sorted.begin(), sorted.end(),
              [](const CornerFeature& a, const CornerFeature& b) { return a.corner > b.corner; });
    for (size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].corner == sorted[i - 1].corner)
            throw Error(ErrorKind::invalid_program, "duplicate corner feature");
    for (const auto& f : sorted) poly = apply_corner_to_polygon(poly, f.corner, f.kind, f.param);
    return poly;
}

double axis_side(const RevolveAxis& axis, const Vec2& p) {
    Vec2 d = axis.dir;
    return d.x() * (p.y() - axis.point.y()) - d.y() * (p.x() - axis.point.x());
}

}  // namespace

void validate_operation(const Operation& op) {
    if (op.profile.outer.points.size() < 3)
        throw Error(ErrorKind::invalid_program, "profile outer loop needs >= 3 points");
    if (op.kind == OpKind::extrude) {
        if (!(op.height > 0) || !std::isfinite(op.height))
            throw Error(ErrorKind::invalid_program, "extrude height must be > 0");
    } else {
        if (op.axis.dir.norm() < 1e-12)
            throw Error(ErrorKind::invalid_program, "revolve axis direction is zero");
        double lo = 0, hi = 0;
        RevolveAxis axis{op.axis.point, op.axis.dir.normalized()};
        for (const auto& p : op.profile.outer.points) {
            double s = axis_side(axis, p);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        if (lo < -1e-6 && hi > 1e-6)
            throw Error(ErrorKind::invalid_program,
                        "revolve profile must lie in one closed half-plane of its axis");
    }
    outer_with_features(op.profile, op.corner_features); // throws on bad features
}

void validate_program(const Program& program) {
    if (!program.ops.empty() && program.ops.front().role != BoolRole::boolean_union)
        throw Error(ErrorKind::invalid_program, "first operation must be a union");
    for (const auto& op : program.ops) validate_operation(op);
}

// ---------------------------------------------------------------------------
// Solid
// ---------------------------------------------------------------------------

Solid::Solid(Program program) : program_(std::move(program)) {
    validate_program(program_);
    ops_.reserve(program_.ops.size());
    for (const auto& op : program_.ops) {
        CompiledOp c;
        c.kind = op.kind;
        c.role = op.role;
        c.plane = op.profile.plane;
        c.outer = outer_with_features(op.profile, op.corner_features);
        for (const auto& h : op.profile.holes) c.holes.push_back(h.points);
        c.height = op.height;
        for (const auto& p : c.outer) c.bounds2.expand(p);
        for (const auto& h : c.holes)
            for (const auto& p : h) c.bounds2.expand(p);
        if (op.kind == OpKind::extrude) {
            for (int cu = 0; cu < 2; ++cu)
                for (int cv = 0; cv < 2; ++cv)
                    for (int ch = 0; ch < 2; ++ch)
                        c.bounds3.expand(c.plane.to_world(
                            Vec2(cu ? c.bounds2.hi.x() : c.bounds2.lo.x(),
                                 cv ? c.bounds2.hi.y() : c.bounds2.lo.y()),
                            ch ? c.height : 0.0));
        } else {
            c.axis_dir = op.axis.dir.normalized();
            c.axis_point = op.axis.point;
            c.axis_perp = rot90(c.axis_dir);
            double side = 0;
            for (const auto& p : c.outer) side += axis_side({c.axis_point, c.axis_dir}, p);
            if (side < 0) c.axis_perp = -c.axis_perp;
            double along_lo = std::numeric_limits<double>::max();
            double along_hi = std::numeric_limits<double>::lowest();
            double r_max = 0;
            for (const auto& p : c.outer) {
                Vec2 w = p - c.axis_point;
                along_lo = std::min(along_lo, w.dot(c.axis_dir));
                along_hi = std::max(along_hi, w.dot(c.axis_dir));
                r_max = std::max(r_max, std::abs(w.dot(c.axis_perp)));
            }
            Box3 axis_box;
            axis_box.expand(c.plane.to_world(c.axis_point + along_lo * c.axis_dir));
            axis_box.expand(c.plane.to_world(c.axis_point + along_hi * c.axis_dir));
            c.bounds3 = axis_box.inflated(r_max);
        }
        if (op.role == BoolRole::boolean_union) bounds_.expand(c.bounds3);
        ops_.push_back(std::move(c));
    }
}

bool Solid::op_contains_impl(const CompiledOp& op, const Vec3& p) {
    if (!op.bounds3.contains(p)) return false;
    if (op.kind == OpKind::extrude) {
        double h = op.plane.height_of(p);
        if (h < 0 || h > op.height) return false;
        Vec2 uv = op.plane.to_plane(p);
        if (!op.bounds2.contains(uv)) return false;
        return point_in_region(op.outer, op.holes, uv);
    }
    Vec2 uv = op.plane.to_plane(p);
    double xn = op.plane.height_of(p);
    Vec2 w = uv - op.axis_point;
    double along = w.dot(op.axis_dir);
    double s = w.dot(op.axis_perp);
    double r = std::sqrt(s * s + xn * xn);
    Vec2 mapped = op.axis_point + along * op.axis_dir + r * op.axis_perp;
    if (!op.bounds2.contains(mapped)) return false;
    return point_in_region(op.outer, op.holes, mapped);
}

double Solid::op_sdf_impl(const CompiledOp& op, const Vec3& p) {
    if (op.kind == OpKind::extrude) {
        Vec2 uv = op.plane.to_plane(p);
        double h = op.plane.height_of(p);
        double d2 = region_signed_distance(op.outer, op.holes, uv);
        double dz = std::max(-h, h - op.height);
        if (d2 > 0 && dz > 0) return std::hypot(d2, dz);
        return std::max(d2, dz);
    }
    Vec2 uv = op.plane.to_plane(p);
    double xn = op.plane.height_of(p);
    Vec2 w = uv - op.axis_point;
    double along = w.dot(op.axis_dir);
    double s = w.dot(op.axis_perp);
    double r = std::sqrt(s * s + xn * xn);
    Vec2 mapped = op.axis_point + along * op.axis_dir + r * op.axis_perp;
    return region_signed_distance(op.outer, op.holes, mapped);
}

bool Solid::contains(const Vec3& p) const {
    bool inside = false;
    for (const auto& op : ops_) {
        if (op.role == BoolRole::boolean_union)
            inside = inside || op_contains_impl(op, p);
        else
            inside = inside && !op_contains_impl(op, p);
    }
    return inside;
}

double Solid::signed_distance(const Vec3& p) const {
    double acc = std::numeric_limits<double>::max();
    for (const auto& op : ops_) {
        double d = op_sdf_impl(op, p);
        if (op.role == BoolRole::boolean_union)
            acc = std::min(acc, d);
        else
            acc = std::max(acc, -d);
    }
    return acc;
}

bool Solid::op_contains(size_t i, const Vec3& p) const { return op_contains_impl(ops_[i], p); }
double Solid::op_signed_distance(size_t i, const Vec3& p) const { return op_sdf_impl(ops_[i], p); }
Box3 Solid::op_bounds(size_t i) const { return ops_[i].bounds3; }

bool point_in_solid(const Solid& solid, const Vec3& p) { return solid.contains(p); }

// ---------------------------------------------------------------------------
// Marching cubes
// ---------------------------------------------------------------------------

TriMesh tessellate_solid(const Solid& solid, int resolution) {
    if (resolution < 16)
        throw Error(ErrorKind::domain_error, "tessellate_solid: resolution must be >= 16");
    if (solid.program().ops.empty()) throw Error(ErrorKind::empty_solid, "empty program");
    Box3 b = solid.bounds();
    if (b.empty()) throw Error(ErrorKind::empty_solid, "solid has empty bounds");
    double spacing = std::max(b.longest_side(), 1e-9) / resolution;
    Vec3 origin = b.lo - 2.0 * spacing * Vec3(1, 1, 1);
    int nx = int(std::ceil(b.extent().x() / spacing)) + 4;
    int ny = int(std::ceil(b.extent().y() / spacing)) + 4;
    int nz = int(std::ceil(b.extent().z() / spacing)) + 4;

    // corner field: signed distance estimate, clamped away from zero so no
    // sample sits exactly on the surface
    std::vector<float> field(size_t(nx + 1) * (ny + 1) * (nz + 1));
    auto fidx = [&](int x, int y, int z) {
        return size_t(x) + size_t(nx + 1) * (size_t(y) + size_t(ny + 1) * size_t(z));
    };
    parallel_for(size_t(nz + 1), [&](size_t z0, size_t z1) {
        for (size_t z = z0; z < z1; ++z)
            for (int y = 0; y <= ny; ++y)
                for (int x = 0; x <= nx; ++x) {
                    Vec3 p = origin + spacing * Vec3(x, y, double(z));
                    double d = solid.signed_distance(p);
                    if (std::abs(d) < 1e-9) d = 1e-9;
                    field[fidx(x, y, int(z))] = float(d);
                }
    });

    TriMesh mesh;
    std::map<std::pair<size_t, int>, int> edge_vertex; // (corner index, axis) -> vertex
    auto vertex_on_edge = [&](int x, int y, int z, int edge) {
        int c0 = kMcEdge[edge][0], c1 = kMcEdge[edge][1];
        int x0 = x + kMcCorner[c0][0], y0 = y + kMcCorner[c0][1], z0 = z + kMcCorner[c0][2];
        int x1 = x + kMcCorner[c1][0], y1 = y + kMcCorner[c1][1], z1 = z + kMcCorner[c1][2];
        int axis = x1 != x0 ? 0 : (y1 != y0 ? 1 : 2);
        size_t base = fidx(std::min(x0, x1), std::min(y0, y1), std::min(z0, z1));
        auto key = std::make_pair(base, axis);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        double v0 = field[fidx(x0, y0, z0)];
        double v1 = field[fidx(x1, y1, z1)];
        double t = std::clamp(v0 / (v0 - v1), 0.01, 0.99);
        Vec3 p0 = origin + spacing * Vec3(x0, y0, z0);
        Vec3 p1 = origin + spacing * Vec3(x1, y1, z1);
        int idx = int(mesh.vertices.size());
        mesh.vertices.push_back(p0 + t * (p1 - p0));
        edge_vertex.emplace(key, idx);
        return idx;
    };

    bool any_inside = false;
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    if (field[fidx(x + kMcCorner[c][0], y + kMcCorner[c][1],
                                   z + kMcCorner[c][2])] < 0)
                        cube |= 1 << c;
                }
                if (cube == 0) continue;
                any_inside = true;
                if (cube == 255) continue;
                const int8_t* tri = kMcTriTable[cube];
                for (int k = 0; tri[k] >= 0; k += 3) {
                    int a = vertex_on_edge(x, y, z, tri[k]);
                    int b2 = vertex_on_edge(x, y, z, tri[k + 1]);
                    int c2 = vertex_on_edge(x, y, z, tri[k + 2]);
                    if (a == b2 || b2 == c2 || c2 == a) continue;
                    mesh.faces.push_back({a, b2, c2});
                }
            }
    if (!any_inside || mesh.faces.empty())
        throw Error(ErrorKind::empty_solid, "tessellate_solid: no occupied cells");

    // orient outward: signed volume must be positive
    double vol6 = 0;
    for (const auto& f : mesh.faces)
        vol6 += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
    if (vol6 < 0)
        for (auto& f : mesh.faces) std::swap(f[1], f[2]);
    return mesh;
}

// ---------------------------------------------------------------------------
// Candidate surface sampling
// ---------------------------------------------------------------------------

CandidateSampler::CandidateSampler(const Profile& profile, OpKind kind, const RevolveAxis& axis)
    : profile_(profile), kind_(kind) {
    std::vector<Polygon2> hole_polys;
    for (const auto& h : profile_.holes) hole_polys.push_back(h.points);
    if (kind_ == OpKind::extrude) {
        tris_ = triangulate_region(profile_.outer.points, hole_polys);
        for (const auto& t : tris_) {
            cap_area_ += 0.5 * std::abs((t[1] - t[0]).x() * (t[2] - t[0]).y() -
                                        (t[2] - t[0]).x() * (t[1] - t[0]).y());
            tri_cum_.push_back(cap_area_);
        }
        auto add_loop = [&](const Polygon2& loop) {
            for (size_t i = 0; i < loop.size(); ++i) {
                const Vec2& a = loop[i];
                const Vec2& b = loop[(i + 1) % loop.size()];
                wall_len_ += (b - a).norm();
                walls_.push_back({a, b, wall_len_});
            }
        };
        add_loop(profile_.outer.points);
        for (const auto& h : hole_polys) add_loop(h);
        return;
    }
    axis_dir_ = axis.dir.normalized();
    axis_point_ = axis.point;
    axis_perp_ = rot90(axis_dir_);
    double side = 0;
    for (const auto& p : profile_.outer.points)
        side += axis_side({axis_point_, axis_dir_}, p);
    if (side < 0) axis_perp_ = -axis_perp_;
    auto add_lathe_loop = [&](const Polygon2& loop) {
        for (size_t i = 0; i < loop.size(); ++i) {
            const Vec2& a = loop[i];
            const Vec2& b = loop[(i + 1) % loop.size()];
            double r0 = std::max(0.0, (a - axis_point_).dot(axis_perp_));
            double r1 = std::max(0.0, (b - axis_point_).dot(axis_perp_));
            lathe_area_ += 2 * M_PI * (b - a).norm() * 0.5 * (r0 + r1);
            lathe_.push_back({a, b, r0, r1, lathe_area_});
        }
    };
    add_lathe_loop(profile_.outer.points);
    for (const auto& h : hole_polys) add_lathe_loop(h);
}

SurfaceSamples CandidateSampler::sample(double height, size_t n, uint64_t seed) const {
    SurfaceSamples out;
    Rng rng(seed);
    const Plane& plane = profile_.plane;

    if (kind_ == OpKind::extrude) {
        double h0 = std::min(0.0, height), h1 = std::max(0.0, height);
        double span = h1 - h0;
        out.total_area = 2 * cap_area_ + wall_len_ * span;
        if (out.total_area <= 0) return out;
        out.points.reserve(n);
        for (size_t i = 0; i < n; ++i) {
            double r = rng.uniform() * out.total_area;
            if (r < 2 * cap_area_ && cap_area_ > 0) {
                double which = r < cap_area_ ? h0 : h1;
                double pick = rng.uniform() * cap_area_;
                size_t ti =
                    std::lower_bound(tri_cum_.begin(), tri_cum_.end(), pick) - tri_cum_.begin();
                if (ti >= tris_.size()) ti = tris_.size() - 1;
                const auto& t = tris_[ti];
                double su = std::sqrt(rng.uniform());
                double v = rng.uniform();
                Vec2 uv = (1 - su) * t[0] + su * (1 - v) * t[1] + su * v * t[2];
                out.points.push_back(plane.to_world(uv, which));
            } else if (!walls_.empty() && span > 0) {
                double pick = rng.uniform() * wall_len_;
                size_t lo = 0, hi = walls_.size() - 1;
                while (lo < hi) {
                    size_t mid = (lo + hi) / 2;
                    if (walls_[mid].cum < pick)
                        lo = mid + 1;
                    else
                        hi = mid;
                }
                const Wall& w = walls_[lo];
                double seg_len = (w.b - w.a).norm();
                double t = seg_len > 0 ? (pick - (w.cum - seg_len)) / seg_len : 0.0;
                Vec2 uv = w.a + std::clamp(t, 0.0, 1.0) * (w.b - w.a);
                double z = h0 + rng.uniform() * span;
                out.points.push_back(plane.to_world(uv, z));
            }
        }
        return out;
    }

    out.total_area = lathe_area_;
    if (lathe_area_ <= 0) return out;
    Vec3 perp_world = axis_perp_.x() * plane.u_axis + axis_perp_.y() * plane.v_axis();
    Vec3 n_world = plane.normal;
    out.points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        double pick = rng.uniform() * lathe_area_;
        size_t lo = 0, hi = lathe_.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (lathe_[mid].cum < pick)
                lo = mid + 1;
            else
                hi = mid;
        }
        const LatheSeg& s = lathe_[lo];
        // position along the segment with density proportional to radius
        double u = rng.uniform();
        double t;
        if (std::abs(s.r1 - s.r0) < 1e-12 * (s.r0 + s.r1 + 1e-30)) {
            t = u;
        } else {
            double a0 = s.r0, d = s.r1 - s.r0;
            t = (-a0 + std::sqrt(a0 * a0 + u * d * (2 * a0 + d))) / d;
            t = std::clamp(t, 0.0, 1.0);
        }
        Vec2 p2 = s.a + t * (s.b - s.a);
        Vec2 w = p2 - axis_point_;
        double along = w.dot(axis_dir_);
        double r = std::max(0.0, w.dot(axis_perp_));
        double phi = rng.uniform() * 2 * M_PI;
        Vec3 on_axis = plane.to_world(axis_point_ + along * axis_dir_);
        out.points.push_back(on_axis + r * (std::cos(phi) * perp_world + std::sin(phi) * n_world));
    }
    return out;
}

SurfaceSamples sample_candidate_surface(const Profile& profile, OpKind kind, double height,
                                        const RevolveAxis& axis, size_t n, uint64_t seed) {
    return CandidateSampler(profile, kind, axis).sample(height, n, seed);
}

}  // namespace cadfit
