#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "panens/dims.hpp"
#include "panens/errors.hpp"

namespace panens {

/// Dense pre-sigmoid mask logits, row-major.
struct LogitGrid {
    Dims dims;
    std::vector<float> values;

    static LogitGrid constant(Dims d, float v) {
        return LogitGrid{d, std::vector<float>(d.count(), v)};
    }
    float at(int r, int c) const {
        return values[static_cast<std::size_t>(r) * dims.width + c];
    }
    bool finite() const;
};

/// Run-length encoded binary mask over row-major pixel order. The first run
/// counts zeros (possibly 0); every later run is non-empty. This makes the
/// encoding of any mask unique.
struct BinaryMask {
    Dims dims;
    std::vector<uint32_t> runs;

    uint64_t area() const;       // number of 1-pixels
    bool empty() const { return area() == 0; }
};

/// Per-frame masks of one object over a whole video.
struct MaskTube {
    Dims dims;
    std::vector<BinaryMask> frames;

    uint64_t area() const;
};

BinaryMask rle_encode(Dims dims, const uint8_t* bits);
BinaryMask rle_encode(Dims dims, const std::vector<uint8_t>& bits);

/// Inverse of rle_encode. Throws RunSumMismatch when the runs do not sum to
/// height*width.
std::vector<uint8_t> rle_decode(const BinaryMask& mask);

/// Hard mask: pixel is 1 iff logit > 0 (ties at exactly 0 go to background).
BinaryMask threshold(const LogitGrid& grid);

/// |a∩b| and |a∪b| by walking the two run sequences in lockstep.
std::pair<uint64_t, uint64_t> intersection_union(const BinaryMask& a, const BinaryMask& b);

/// Intersection-over-union; 0 when both masks are empty.
double iou_2d(const BinaryMask& a, const BinaryMask& b);

/// Spatio-temporal IoU: sums intersections and unions over frames before
/// dividing, so empty frame pairs contribute nothing.
double iou_tube(const MaskTube& a, const MaskTube& b);

LogitGrid hflip(const LogitGrid& grid);
BinaryMask hflip_mask(const BinaryMask& mask);

/// Bilinear resize with the half-pixel-center convention
/// (src = (dst + 0.5) * scale - 0.5, clamped to the border).
LogitGrid resize_bilinear(const LogitGrid& grid, Dims target);

}  // namespace panens
