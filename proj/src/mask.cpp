#include "panens/mask.hpp"

#include <algorithm>
#include <cmath>

#include "panens/kernels.hpp"

namespace panens {

bool LogitGrid::finite() const {
    for (float v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

uint64_t BinaryMask::area() const {
    uint64_t a = 0;
    for (std::size_t i = 1; i < runs.size(); i += 2) a += runs[i];
    return a;
}

uint64_t MaskTube::area() const {
    uint64_t a = 0;
    for (const BinaryMask& m : frames) a += m.area();
    return a;
}

BinaryMask rle_encode(Dims dims, const uint8_t* bits) {
    BinaryMask out;
    out.dims = dims;
    const std::size_t n = dims.count();
    uint32_t count = 0;
    uint8_t cur = 0;  // runs start with the zero-run, possibly empty
    for (std::size_t i = 0; i < n; ++i) {
        const uint8_t b = bits[i] ? 1 : 0;
        if (b != cur) {
            out.runs.push_back(count);
            count = 0;
            cur = b;
        }
        ++count;
    }
    out.runs.push_back(count);
    return out;
}

BinaryMask rle_encode(Dims dims, const std::vector<uint8_t>& bits) {
    return rle_encode(dims, bits.data());
}

std::vector<uint8_t> rle_decode(const BinaryMask& mask) {
    const std::size_t n = mask.dims.count();
    uint64_t sum = 0;
    for (uint32_t r : mask.runs) sum += r;
    if (sum != n)
        throw RunSumMismatch("rle runs sum to " + std::to_string(sum) + ", expected " +
                             std::to_string(n));
    std::vector<uint8_t> bits(n);
    std::size_t pos = 0;
    uint8_t v = 0;
    for (uint32_t r : mask.runs) {
        std::fill_n(bits.begin() + pos, r, v);
        pos += r;
        v = !v;
    }
    return bits;
}

BinaryMask threshold(const LogitGrid& grid) {
    std::vector<uint8_t> bits(grid.values.size());
    kern::threshold_bits(grid.values.data(), grid.values.size(), bits.data());
    return rle_encode(grid.dims, bits);
}

std::pair<uint64_t, uint64_t> intersection_union(const BinaryMask& a, const BinaryMask& b) {
    if (a.dims != b.dims) throw DimsMismatch("intersection_union: mask dims differ");
    const uint64_t total = a.dims.count();
    uint64_t inter = 0, uni = 0, consumed = 0;

    std::size_t ia = 0, ib = 0;
    uint64_t ca = a.runs.empty() ? 0 : a.runs[0];
    uint64_t cb = b.runs.empty() ? 0 : b.runs[0];
    bool va = false, vb = false;
    while (consumed < total) {
        while (ca == 0 && ia + 1 < a.runs.size()) {
            ++ia;
            ca = a.runs[ia];
            va = !va;
        }
        while (cb == 0 && ib + 1 < b.runs.size()) {
            ++ib;
            cb = b.runs[ib];
            vb = !vb;
        }
        const uint64_t step = std::min(ca, cb);
        if (step == 0) throw RunSumMismatch("intersection_union: runs shorter than grid");
        if (va && vb) inter += step;
        if (va || vb) uni += step;
        ca -= step;
        cb -= step;
        consumed += step;
    }
    return {inter, uni};
}

double iou_2d(const BinaryMask& a, const BinaryMask& b) {
    const auto [inter, uni] = intersection_union(a, b);
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_tube(const MaskTube& a, const MaskTube& b) {
    if (a.dims != b.dims) throw DimsMismatch("iou_tube: tube dims differ");
    if (a.frames.size() != b.frames.size())
        throw LengthMismatch("iou_tube: tube lengths differ (" +
                             std::to_string(a.frames.size()) + " vs " +
                             std::to_string(b.frames.size()) + ")");
    uint64_t inter = 0, uni = 0;
    for (std::size_t t = 0; t < a.frames.size(); ++t) {
        const auto [i, u] = intersection_union(a.frames[t], b.frames[t]);
        inter += i;
        uni += u;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

LogitGrid hflip(const LogitGrid& grid) {
    LogitGrid out;
    out.dims = grid.dims;
    out.values.resize(grid.values.size());
    kern::hflip_grid(grid.values.data(), grid.dims.height, grid.dims.width, out.values.data());
    return out;
}

BinaryMask hflip_mask(const BinaryMask& mask) {
    std::vector<uint8_t> bits = rle_decode(mask);
    std::vector<uint8_t> flipped(bits.size());
    const int h = mask.dims.height, w = mask.dims.width;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            flipped[static_cast<std::size_t>(r) * w + c] =
                bits[static_cast<std::size_t>(r) * w + (w - 1 - c)];
    return rle_encode(mask.dims, flipped);
}

LogitGrid resize_bilinear(const LogitGrid& grid, Dims target) {
    if (!target.valid()) throw DimsMismatch("resize_bilinear: invalid target dims");
    if (target == grid.dims) return grid;
    LogitGrid out;
    out.dims = target;
    out.values.resize(target.count());
    kern::resize_bilinear(grid.values.data(), grid.dims.height, grid.dims.width,
                          out.values.data(), target.height, target.width);
    return out;
}

}  // namespace panens
