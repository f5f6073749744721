#pragma once

#include "cadfit/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace cadfit {

// Packed occupancy grid. Two grids are comparable only when origin, spacing
// and dims match exactly.
struct VoxelGrid {
    Vec3 origin{0, 0, 0};
    double spacing = 1.0;
    std::array<int, 3> dims{0, 0, 0};
    std::vector<uint64_t> bits;

    size_t cell_count() const { return size_t(dims[0]) * dims[1] * dims[2]; }
    size_t bit_index(int x, int y, int z) const {
        return size_t(x) + size_t(dims[0]) * (size_t(y) + size_t(dims[1]) * size_t(z));
    }
    bool get(int x, int y, int z) const {
        size_t i = bit_index(x, y, z);
        return (bits[i >> 6] >> (i & 63)) & 1;
    }
    void set(int x, int y, int z, bool v) {
        size_t i = bit_index(x, y, z);
        if (v)
            bits[i >> 6] |= uint64_t(1) << (i & 63);
        else
            bits[i >> 6] &= ~(uint64_t(1) << (i & 63));
    }
    Vec3 cell_center(int x, int y, int z) const {
        return origin + spacing * Vec3(x + 0.5, y + 0.5, z + 0.5);
    }
    uint64_t popcount() const;
    bool comparable(const VoxelGrid& o) const;
    double cell_volume() const { return spacing * spacing * spacing; }
    Box3 occupied_bounds() const; // tight box over occupied cells

    static VoxelGrid empty_like(const VoxelGrid& g);
};

// Shared grid geometry for a set of solids: cubical cells covering `bounds`
// with `resolution` cells along the longest side.
VoxelGrid make_grid(const Box3& bounds, int resolution);

// Fills a grid (cell occupied iff oracle(cell center)); parallel over z-slabs.
VoxelGrid voxelize(const std::function<bool(const Vec3&)>& oracle, const Box3& bounds,
                   int resolution);
void fill_grid(VoxelGrid& grid, const std::function<bool(const Vec3&)>& oracle);

// Bit ops over comparable grids.
VoxelGrid grid_and(const VoxelGrid& a, const VoxelGrid& b);
VoxelGrid grid_or(const VoxelGrid& a, const VoxelGrid& b);
VoxelGrid grid_and_not(const VoxelGrid& a, const VoxelGrid& b);
uint64_t popcount_and(const VoxelGrid& a, const VoxelGrid& b);
uint64_t popcount_or(const VoxelGrid& a, const VoxelGrid& b);

// popcount(A&B) / popcount(A|B); defined as 1 when both grids are empty.
double volumetric_iou(const VoxelGrid& a, const VoxelGrid& b);

struct Residuals {
    VoxelGrid plus;  // target minus solid (under-reconstructed)
    VoxelGrid minus; // solid minus target (over-reconstructed)
    double a = 0;    // |plus| / |target|
    double b = 0;    // |minus| / |target|
};
Residuals compute_residuals(const VoxelGrid& target, const VoxelGrid& solid);

struct ErrorDecomposition {
    double E;
    double iou;
    bool bound_ok;
};
ErrorDecomposition error_decomposition(double a, double b);

}  // namespace cadfit
