#pragma once

#include <cstdint>

namespace cadfit {

// Triangulation table for marching cubes; 16 entries per case, -1 terminated.
extern const int8_t kMcTriTable[256][16];

// Cube corner offsets (x, y, z), Bourke numbering.
inline constexpr int kMcCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

// The two corners joined by each of the 12 cube edges.
inline constexpr int kMcEdge[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

}  // namespace cadfit
