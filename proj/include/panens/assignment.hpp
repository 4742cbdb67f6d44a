#pragma once

#include <utility>
#include <vector>

#include "panens/errors.hpp"

namespace panens {

struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> costs;  // row-major, rows * cols

    double at(int r, int c) const { return costs[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return costs[static_cast<std::size_t>(r) * cols + c]; }
};

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
    double total_cost = 0.0;
};

/// Minimum-cost assignment (Kuhn-Munkres, O(n^3) potentials form).
/// Rectangular matrices are zero-padded to square internally; the returned
/// pairs cover min(rows, cols) rows/cols of the real matrix. Throws
/// NonFiniteCost if any entry is NaN or infinite.
Assignment hungarian_solve(const CostMatrix& m);

}  // namespace panens
