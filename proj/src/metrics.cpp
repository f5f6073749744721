#include "cadfit/metrics.hpp"

#include "cadfit/polygon.hpp"

#include <cmath>
#include <map>
#include <numeric>

namespace cadfit {

// ---------------------------------------------------------------------------
// KD-tree
// ---------------------------------------------------------------------------

struct KdTree3::Node {
    int axis = -1;     // -1 for leaf
    double split = 0;
    int left = -1, right = -1;
    int begin = 0, end = 0;
};

KdTree3::KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!points_.empty()) {
        build(0, int(points_.size()), 0);
        // leaf-contiguous flat coordinate layout for the hot query loop
        flat_.reserve(points_.size() * 3);
        for (int idx : order_) {
            flat_.push_back(points_[idx].x());
            flat_.push_back(points_[idx].y());
            flat_.push_back(points_[idx].z());
        }
    }
}

int KdTree3::build(int begin, int end, int depth) {
    Node node;
    int idx = int(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= 16) {
        nodes_[idx].begin = begin;
        nodes_[idx].end = end;
        return idx;
    }
    int axis = depth % 3;
    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    double split = points_[order_[mid]][axis];
    int l = build(begin, mid, depth + 1);
    int r = build(mid, end, depth + 1);
    nodes_[idx].axis = axis;
    nodes_[idx].split = split;
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
}

void KdTree3::query(int ni, const Vec3& p, double& best) const {
    const Node& node = nodes_[ni];
    if (node.axis < 0) {
        const double px = p.x(), py = p.y(), pz = p.z();
        const double* f = flat_.data() + size_t(node.begin) * 3;
        for (int i = node.begin; i < node.end; ++i, f += 3) {
            double dx = f[0] - px, dy = f[1] - py, dz = f[2] - pz;
            double d2 = dx * dx + dy * dy + dz * dz;
            if (d2 < best) best = d2;
        }
        return;
    }
    double d = p[node.axis] - node.split;
    int near = d < 0 ? node.left : node.right;
    int far = d < 0 ? node.right : node.left;
    query(near, p, best);
    if (d * d < best) query(far, p, best);
}

double KdTree3::nearest_dist2(const Vec3& p) const {
    if (points_.empty()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::max();
    query(0, p, best);
    return best;
}

// ---------------------------------------------------------------------------
// Chamfer distance
// ---------------------------------------------------------------------------

double chamfer_to_index(const std::vector<Vec3>& P, const KdTree3& q_index, ChamferMode mode) {
    if (P.empty() || q_index.points().empty())
        throw Error(ErrorKind::domain_error, "chamfer_distance: empty point cloud");
    std::vector<double> d(P.size());
    parallel_for(P.size(), [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) {
            double d2 = q_index.nearest_dist2(P[i]);
            d[i] = mode == ChamferMode::one_sided ? d2 : std::sqrt(d2);
        }
    });
    double sum = 0;
    for (double v : d) sum += v;
    return sum / double(P.size());
}

double chamfer_distance(const std::vector<Vec3>& P, const std::vector<Vec3>& Q,
                        ChamferMode mode) {
    if (P.empty() || Q.empty())
        throw Error(ErrorKind::domain_error, "chamfer_distance: empty point cloud");
    KdTree3 qt(Q);
    double pq = chamfer_to_index(P, qt, mode);
    if (mode == ChamferMode::one_sided) return pq;
    KdTree3 pt(P);
    double qp = chamfer_to_index(Q, pt, ChamferMode::symmetric);
    return 0.5 * (pq + qp);
}

// ---------------------------------------------------------------------------
// Similarity alignment
// ---------------------------------------------------------------------------

Eigen::Matrix3d Similarity::rotation_matrix() const {
    return (Eigen::AngleAxisd(rotation.z(), Vec3::UnitZ()) *
            Eigen::AngleAxisd(rotation.y(), Vec3::UnitY()) *
            Eigen::AngleAxisd(rotation.x(), Vec3::UnitX()))
        .toRotationMatrix();
}

Vec3 Similarity::apply(const Vec3& p) const { return scale * (rotation_matrix() * p) + translation; }

Vec3 Similarity::apply_inverse(const Vec3& p) const {
    return rotation_matrix().transpose() * ((p - translation) / scale);
}

namespace {

// Symmetric CD of T(pred) vs gt without rebuilding trees: the gt->pred term is
// evaluated through the inverse transform, with distances rescaled by s.
double aligned_cd(const Similarity& t, const std::vector<Vec3>& pred, const KdTree3& pred_tree,
                  const std::vector<Vec3>& gt, const KdTree3& gt_tree) {
    Eigen::Matrix3d R = t.rotation_matrix();
    double fwd = 0;
    for (const auto& p : pred) {
        Vec3 q = t.scale * (R * p) + t.translation;
        fwd += std::sqrt(gt_tree.nearest_dist2(q));
    }
    fwd /= double(pred.size());
    double bwd = 0;
    for (const auto& g : gt) {
        Vec3 q = R.transpose() * ((g - t.translation) / t.scale);
        bwd += t.scale * std::sqrt(pred_tree.nearest_dist2(q));
    }
    bwd /= double(gt.size());
    return 0.5 * (fwd + bwd);
}

std::vector<Vec3> subsample(const std::vector<Vec3>& pts, size_t cap) {
    if (pts.size() <= cap) return pts;
    std::vector<Vec3> out;
    out.reserve(cap);
    double step = double(pts.size()) / double(cap);
    for (size_t i = 0; i < cap; ++i) out.push_back(pts[size_t(i * step)]);
    return out;
}

}  // namespace

AlignResult align_similarity(const std::vector<Vec3>& pred_full, const std::vector<Vec3>& gt_full) {
    if (pred_full.size() < 100 || gt_full.size() < 100)
        throw Error(ErrorKind::domain_error, "align_similarity: need >= 100 points per cloud");
    std::vector<Vec3> pred = subsample(pred_full, 2048);
    std::vector<Vec3> gt = subsample(gt_full, 2048);

    Vec3 cp = Vec3::Zero(), cg = Vec3::Zero();
    for (const auto& p : pred) cp += p;
    cp /= double(pred.size());
    for (const auto& g : gt) cg += g;
    cg /= double(gt.size());
    double rp = 0, rg = 0;
    for (const auto& p : pred) rp += (p - cp).squaredNorm();
    for (const auto& g : gt) rg += (g - cg).squaredNorm();
    rp = std::sqrt(rp / double(pred.size()));
    rg = std::sqrt(rg / double(gt.size()));
    if (rp < 1e-12 || rg < 1e-12)
        throw Error(ErrorKind::degenerate_input, "align_similarity: degenerate point cloud");

    Similarity t;
    t.scale = rg / rp;
    t.translation = cg - t.scale * cp;

    KdTree3 pred_tree(pred);
    KdTree3 gt_tree(gt);
    double cd = aligned_cd(t, pred, pred_tree, gt, gt_tree);
    const double cd_init = cd;

    // parameter vector: rx ry rz tx ty tz log(s)
    auto get = [&](int i) -> double {
        if (i < 3) return t.rotation[i];
        if (i < 6) return t.translation[i - 3];
        return std::log(t.scale);
    };
    auto set = [&](int i, double v) {
        if (i < 3)
            t.rotation[i] = v;
        else if (i < 6)
            t.translation[i - 3] = v;
        else
            t.scale = std::exp(v);
    };
    auto eval_at = [&](int i, double v) {
        double save = get(i);
        set(i, v);
        double c = aligned_cd(t, pred, pred_tree, gt, gt_tree);
        set(i, save);
        return c;
    };

    double radius = 0.3;
    constexpr double kGolden = 0.6180339887498949;
    for (int iter = 0; iter < 50; ++iter) {
        double cd_before_iter = cd;
        for (int i = 0; i < 7; ++i) {
            double x0 = get(i);
            double lo = x0 - radius, hi = x0 + radius;
            double x1 = hi - kGolden * (hi - lo);
            double x2 = lo + kGolden * (hi - lo);
            double f1 = eval_at(i, x1), f2 = eval_at(i, x2);
            for (int gs = 0; gs < 16; ++gs) {
                if (f1 <= f2) {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - kGolden * (hi - lo);
                    f1 = eval_at(i, x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + kGolden * (hi - lo);
                    f2 = eval_at(i, x2);
                }
            }
            double xb = f1 <= f2 ? x1 : x2;
            double fb = std::min(f1, f2);
            if (fb < cd) { // accept only improvements: CD never increases
                set(i, xb);
                cd = fb;
            }
        }
        radius *= 0.6;
        if (cd_before_iter - cd < 1e-5) break;
    }
    return {t, cd_init, cd};
}

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

const KdTree3& Target::index() const {
    if (!surface_index) throw Error(ErrorKind::domain_error, "target has no surface index");
    return *surface_index;
}

Target make_mesh_target(const TriMesh& mesh, size_t surface_samples, uint64_t seed) {
    Target t;
    t.mesh = &mesh;
    t.bounds = mesh.bounds();
    t.surface_points = sample_surface(mesh, surface_samples, seed);
    t.surface_index = std::make_shared<KdTree3>(t.surface_points);
    auto accel = std::make_shared<MeshAccel>(mesh);
    Box3 bounds = t.bounds;
    t.membership = [accel, bounds](const Vec3& p) {
        return bounds.contains(p) && accel->contains(p);
    };
    const TriMesh* m = &mesh;
    t.slicer = [m](const Plane& plane) { return slice_with_plane(*m, plane); };
    return t;
}

// ---------------------------------------------------------------------------
// Residual targets: nearest-cell membership + marching-squares slicer
// ---------------------------------------------------------------------------

namespace {

// Oriented marching-squares segments on a binary field; inside kept on the
// left so chained loops wind counterclockwise around occupied regions.
struct Seg2 {
    Vec2 a, b;
};

void emit_case(int c, double x, double y, double s, std::vector<Seg2>& out) {
    const Vec2 e0(x + 0.5 * s, y);         // bottom
    const Vec2 e1(x + s, y + 0.5 * s);     // right
    const Vec2 e2(x + 0.5 * s, y + s);     // top
    const Vec2 e3(x, y + 0.5 * s);         // left
    switch (c) {
        case 1: out.push_back({e0, e3}); break;
        case 2: out.push_back({e1, e0}); break;
        case 3: out.push_back({e1, e3}); break;
        case 4: out.push_back({e2, e1}); break;
        case 5:
            out.push_back({e0, e3});
            out.push_back({e2, e1});
            break;
        case 6: out.push_back({e2, e0}); break;
        case 7: out.push_back({e2, e3}); break;
        case 8: out.push_back({e3, e2}); break;
        case 9: out.push_back({e0, e2}); break;
        case 10:
            out.push_back({e1, e0});
            out.push_back({e3, e2});
            break;
        case 11: out.push_back({e1, e2}); break;
        case 12: out.push_back({e3, e1}); break;
        case 13: out.push_back({e0, e1}); break;
        case 14: out.push_back({e3, e0}); break;
        default: break;
    }
}

std::vector<Loop3D> contour_on_plane(const VoxelGrid& grid, const Plane& plane,
                                     const std::function<bool(const Vec3&)>& membership) {
    // raster covering the projected grid bounds
    Box3 gb{grid.origin, grid.origin + grid.spacing * Vec3(grid.dims[0], grid.dims[1], grid.dims[2])};
    Box2 rb;
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy)
            for (int cz = 0; cz < 2; ++cz)
                rb.expand(plane.to_plane(Vec3(cx ? gb.hi.x() : gb.lo.x(), cy ? gb.hi.y() : gb.lo.y(),
                                              cz ? gb.hi.z() : gb.lo.z())));
    double s = grid.spacing;
    int nu = int(std::ceil(rb.extent().x() / s)) + 4;
    int nv = int(std::ceil(rb.extent().y() / s)) + 4;
    Vec2 lo = rb.lo - Vec2(2 * s, 2 * s);
    std::vector<uint8_t> field(size_t(nu + 1) * (nv + 1));
    for (int j = 0; j <= nv; ++j)
        for (int i = 0; i <= nu; ++i) {
            Vec2 uv = lo + s * Vec2(i, j);
            field[size_t(j) * (nu + 1) + i] = membership(plane.to_world(uv)) ? 1 : 0;
        }
    std::vector<Seg2> segs;
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            int c = field[size_t(j) * (nu + 1) + i] | (field[size_t(j) * (nu + 1) + i + 1] << 1) |
                    (field[size_t(j + 1) * (nu + 1) + i + 1] << 2) |
                    (field[size_t(j + 1) * (nu + 1) + i] << 3);
            emit_case(c, lo.x() + i * s, lo.y() + j * s, s, segs);
        }
    // chain segments by exact endpoints
    auto key = [&](const Vec2& p) {
        return std::pair<int64_t, int64_t>(std::llround(p.x() / (0.25 * s)),
                                           std::llround(p.y() / (0.25 * s)));
    };
    std::map<std::pair<int64_t, int64_t>, std::vector<int>> starts;
    for (int i = 0; i < int(segs.size()); ++i) starts[key(segs[i].a)].push_back(i);
    std::vector<bool> used(segs.size(), false);
    std::vector<Loop3D> loops;
    for (int i = 0; i < int(segs.size()); ++i) {
        if (used[i]) continue;
        std::vector<Vec2> pts{segs[i].a};
        used[i] = true;
        int cur = i;
        bool closed = false;
        while (true) {
            Vec2 tail = segs[cur].b;
            if ((tail - pts.front()).norm() < 0.25 * s) {
                closed = true;
                break;
            }
            pts.push_back(tail);
            auto it = starts.find(key(tail));
            int next = -1;
            if (it != starts.end())
                for (int cand : it->second)
                    if (!used[cand] && (segs[cand].a - tail).norm() < 0.25 * s) {
                        next = cand;
                        break;
                    }
            if (next < 0) break;
            used[next] = true;
            cur = next;
        }
        if (closed && pts.size() >= 3) {
            Loop3D loop;
            loop.points.reserve(pts.size());
            for (const auto& p : pts) loop.points.push_back(plane.to_world(p));
            loops.push_back(std::move(loop));
        }
    }
    return loops;
}

}  // namespace

Target residual_target(const VoxelGrid& residual) {
    if (residual.popcount() == 0)
        throw Error(ErrorKind::domain_error, "residual_target: empty residual grid");
    auto grid = std::make_shared<VoxelGrid>(residual);
    Target t;
    t.from_residual = true;
    t.bounds = grid->occupied_bounds().inflated(grid->spacing);
    t.membership = [grid](const Vec3& p) {
        Vec3 rel = (p - grid->origin) / grid->spacing;
        int x = int(std::floor(rel.x()));
        int y = int(std::floor(rel.y()));
        int z = int(std::floor(rel.z()));
        if (x < 0 || y < 0 || z < 0 || x >= grid->dims[0] || y >= grid->dims[1] ||
            z >= grid->dims[2])
            return false;
        return grid->get(x, y, z);
    };
    // boundary cells: occupied with at least one empty 6-neighbor
    for (int z = 0; z < grid->dims[2]; ++z)
        for (int y = 0; y < grid->dims[1]; ++y)
            for (int x = 0; x < grid->dims[0]; ++x) {
                if (!grid->get(x, y, z)) continue;
                bool boundary = false;
                const int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                      {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
                for (const auto& d : nb) {
                    int nx = x + d[0], ny = y + d[1], nz = z + d[2];
                    if (nx < 0 || ny < 0 || nz < 0 || nx >= grid->dims[0] || ny >= grid->dims[1] ||
                        nz >= grid->dims[2] || !grid->get(nx, ny, nz)) {
                        boundary = true;
                        break;
                    }
                }
                if (boundary) t.surface_points.push_back(grid->cell_center(x, y, z));
            }
    t.surface_index = std::make_shared<KdTree3>(t.surface_points);
    auto membership = t.membership;
    t.slicer = [grid, membership](const Plane& plane) {
        return contour_on_plane(*grid, plane, membership);
    };
    return t;
}

}  // namespace cadfit
