#include "cadfit/voxel.hpp"

#include <bit>
#include <cmath>

namespace cadfit {

uint64_t VoxelGrid::popcount() const {
    uint64_t n = 0;
    for (uint64_t w : bits) n += std::popcount(w);
    return n;
}

bool VoxelGrid::comparable(const VoxelGrid& o) const {
    return dims == o.dims && spacing == o.spacing && origin == o.origin;
}

Box3 VoxelGrid::occupied_bounds() const {
    Box3 b;
    for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
            for (int x = 0; x < dims[0]; ++x)
                if (get(x, y, z)) {
                    b.expand(origin + spacing * Vec3(x, y, z));
                    b.expand(origin + spacing * Vec3(x + 1, y + 1, z + 1));
                }
    return b;
}

VoxelGrid VoxelGrid::empty_like(const VoxelGrid& g) {
    VoxelGrid out;
    out.origin = g.origin;
    out.spacing = g.spacing;
    out.dims = g.dims;
    out.bits.assign(g.bits.size(), 0);
    return out;
}

VoxelGrid make_grid(const Box3& bounds, int resolution) {
    if (resolution < 16) throw Error(ErrorKind::domain_error, "grid resolution must be >= 16");
    VoxelGrid g;
    double longest = std::max(bounds.longest_side(), 1e-12);
    g.spacing = longest / resolution;
    g.origin = bounds.lo;
    for (int a = 0; a < 3; ++a) {
        int n = int(std::ceil(bounds.extent()[a] / g.spacing - 1e-9));
        g.dims[a] = std::max(1, n);
    }
    g.bits.assign((g.cell_count() + 63) / 64, 0);
    return g;
}

void fill_grid(VoxelGrid& grid, const std::function<bool(const Vec3&)>& oracle) {
    const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
    parallel_for(size_t(nz), [&](size_t z0, size_t z1) {
        for (size_t z = z0; z < z1; ++z)
            for (int y = 0; y < ny; ++y)
                for (int x = 0; x < nx; ++x)
                    if (oracle(grid.cell_center(x, y, int(z)))) grid.set(x, y, int(z), true);
    });
}

VoxelGrid voxelize(const std::function<bool(const Vec3&)>& oracle, const Box3& bounds,
                   int resolution) {
    VoxelGrid g = make_grid(bounds, resolution);
    fill_grid(g, oracle);
    return g;
}

static void check_comparable(const VoxelGrid& a, const VoxelGrid& b) {
    if (!a.comparable(b))
        throw Error(ErrorKind::incompatible_grids, "voxel grids have different geometry");
}

VoxelGrid grid_and(const VoxelGrid& a, const VoxelGrid& b) {
    check_comparable(a, b);
    VoxelGrid out = a;
    for (size_t i = 0; i < out.bits.size(); ++i) out.bits[i] &= b.bits[i];
    return out;
}

VoxelGrid grid_or(const VoxelGrid& a, const VoxelGrid& b) {
    check_comparable(a, b);
    VoxelGrid out = a;
    for (size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= b.bits[i];
    return out;
}

VoxelGrid grid_and_not(const VoxelGrid& a, const VoxelGrid& b) {
    check_comparable(a, b);
    VoxelGrid out = a;
    for (size_t i = 0; i < out.bits.size(); ++i) out.bits[i] &= ~b.bits[i];
    return out;
}

uint64_t popcount_and(const VoxelGrid& a, const VoxelGrid& b) {
    check_comparable(a, b);
    uint64_t n = 0;
    for (size_t i = 0; i < a.bits.size(); ++i) n += std::popcount(a.bits[i] & b.bits[i]);
    return n;
}

uint64_t popcount_or(const VoxelGrid& a, const VoxelGrid& b) {
    check_comparable(a, b);
    uint64_t n = 0;
    for (size_t i = 0; i < a.bits.size(); ++i) n += std::popcount(a.bits[i] | b.bits[i]);
    return n;
}

double volumetric_iou(const VoxelGrid& a, const VoxelGrid& b) {
    uint64_t u = popcount_or(a, b);
    if (u == 0) return 1.0; // both empty: identical
    return double(popcount_and(a, b)) / double(u);
}

Residuals compute_residuals(const VoxelGrid& target, const VoxelGrid& solid) {
    check_comparable(target, solid);
    uint64_t m = target.popcount();
    if (m == 0) throw Error(ErrorKind::domain_error, "compute_residuals: empty target grid");
    Residuals r;
    r.plus = grid_and_not(target, solid);
    r.minus = grid_and_not(solid, target);
    r.a = double(r.plus.popcount()) / double(m);
    r.b = double(r.minus.popcount()) / double(m);
    return r;
}

ErrorDecomposition error_decomposition(double a, double b) {
    if (a < 0 || a > 1 || b < 0 || !std::isfinite(a) || !std::isfinite(b))
        throw Error(ErrorKind::domain_error, "error_decomposition: need 0 <= a <= 1 and b >= 0");
    ErrorDecomposition out;
    out.E = a + b;
    out.iou = (1.0 - a) / (1.0 + b);
    out.bound_ok = (1.0 - out.iou) <= out.E + 1e-12;
    return out;
}

}  // namespace cadfit
