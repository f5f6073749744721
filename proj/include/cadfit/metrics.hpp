#pragma once

#include "cadfit/mesh.hpp"
#include "cadfit/types.hpp"
#include "cadfit/voxel.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace cadfit {

// Exact nearest-neighbor index over a fixed point set.
class KdTree3 {
public:
    explicit KdTree3(std::vector<Vec3> points);
    // squared distance to the nearest point; infinity when empty
    double nearest_dist2(const Vec3& p) const;
    const std::vector<Vec3>& points() const { return points_; }

private:
    struct Node;
    std::vector<Node> nodes_;
    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<double> flat_;
    int build(int begin, int end, int depth);
    void query(int node, const Vec3& p, double& best) const;
};

enum class ChamferMode { symmetric, one_sided };

// symmetric: unsquared L2, averaged both directions, halved.
// one_sided: mean squared distance P -> Q.
double chamfer_distance(const std::vector<Vec3>& P, const std::vector<Vec3>& Q, ChamferMode mode);
double chamfer_to_index(const std::vector<Vec3>& P, const KdTree3& q_index, ChamferMode mode);

struct Similarity {
    Vec3 rotation{0, 0, 0}; // XYZ Euler angles, radians
    Vec3 translation{0, 0, 0};
    double scale = 1.0;

    Eigen::Matrix3d rotation_matrix() const;
    Vec3 apply(const Vec3& p) const;
    Vec3 apply_inverse(const Vec3& p) const;
};

struct AlignResult {
    Similarity transform;
    double cd_before; // symmetric CD at the centroid/scale initialization
    double cd_after;
};

// Derivative-free similarity alignment (cyclic coordinate descent with
// golden-section line search) minimizing symmetric CD of pred onto gt.
AlignResult align_similarity(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt);

// Fitting target: membership oracle + surface cloud + bounds + plane slicer.
struct Target {
    std::function<bool(const Vec3&)> membership;
    std::vector<Vec3> surface_points;
    Box3 bounds;
    std::function<std::vector<Loop3D>(const Plane&)> slicer;

    const TriMesh* mesh = nullptr; // set for mesh-backed targets
    std::shared_ptr<KdTree3> surface_index;
    bool from_residual = false;

    const KdTree3& index() const;
};

// Mesh-backed target; keeps a BVH for membership and a KD-tree over sampled
// surface points. The mesh must stay alive for the target's lifetime.
Target make_mesh_target(const TriMesh& mesh, size_t surface_samples, uint64_t seed);

// Grid-backed target: nearest-cell membership, boundary-cell centers as the
// surface cloud, marching-squares contours as the slicer.
Target residual_target(const VoxelGrid& residual);

}  // namespace cadfit
