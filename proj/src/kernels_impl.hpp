#pragma once

// Per-element bodies shared by the serial and OpenMP kernel variants. Both
// variants iterate the same index space over these helpers, which is what
// makes their outputs bit-identical.

#include <algorithm>
#include <cstdint>

#include "panens/detmath.hpp"
#include "panens/mask.hpp"

namespace panens::kern::detail {

inline float bilinear_at(const float* src, int sh, int sw, int dh, int dw, int dy, int dx) {
    const double sy = (dy + 0.5) * (static_cast<double>(sh) / dh) - 0.5;
    const double sx = (dx + 0.5) * (static_cast<double>(sw) / dw) - 0.5;
    const double cy = std::min(std::max(sy, 0.0), static_cast<double>(sh - 1));
    const double cx = std::min(std::max(sx, 0.0), static_cast<double>(sw - 1));
    const int y0 = static_cast<int>(cy);
    const int x0 = static_cast<int>(cx);
    const int y1 = std::min(y0 + 1, sh - 1);
    const int x1 = std::min(x0 + 1, sw - 1);
    const double fy = cy - y0;
    const double fx = cx - x0;

    const double v00 = src[static_cast<std::size_t>(y0) * sw + x0];
    const double v01 = src[static_cast<std::size_t>(y0) * sw + x1];
    const double v10 = src[static_cast<std::size_t>(y1) * sw + x0];
    const double v11 = src[static_cast<std::size_t>(y1) * sw + x1];

    // Lerp form keeps constant grids exactly constant.
    const double top = v00 + (v01 - v00) * fx;
    const double bot = v10 + (v11 - v10) * fx;
    return static_cast<float>(top + (bot - top) * fy);
}

inline void argmax_fuse_at(const float* const* grids, const double* weights, std::size_t k,
                           std::size_t p, int32_t* winner, double* value) {
    int32_t best = -1;
    double best_v = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
        const double v = weights[t] * detmath::sigmoid(grids[t][p]);
        if (best < 0 || v > best_v) {
            best = static_cast<int32_t>(t);
            best_v = v;
        }
    }
    winner[p] = best;
    value[p] = best < 0 ? 0.0 : best_v;
}

}  // namespace panens::kern::detail
