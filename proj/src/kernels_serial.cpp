// Serial reference kernels. These define the result every parallel schedule
// must reproduce exactly; the tests and the benchmark compare against them.

#include "kernels_impl.hpp"
#include "panens/kernels.hpp"

namespace panens::kern {

void threshold_bits_serial(const float* logits, std::size_t n, uint8_t* bits) {
    for (std::size_t i = 0; i < n; ++i) bits[i] = logits[i] > 0.0f ? 1 : 0;
}

void hflip_grid_serial(const float* src, int h, int w, float* dst) {
    for (int r = 0; r < h; ++r) {
        const float* in = src + static_cast<std::size_t>(r) * w;
        float* out = dst + static_cast<std::size_t>(r) * w;
        for (int c = 0; c < w; ++c) out[c] = in[w - 1 - c];
    }
}

void resize_bilinear_serial(const float* src, int sh, int sw, float* dst, int dh, int dw) {
    for (int y = 0; y < dh; ++y)
        for (int x = 0; x < dw; ++x)
            dst[static_cast<std::size_t>(y) * dw + x] = detail::bilinear_at(src, sh, sw, dh, dw, y, x);
}

void tube_iou_matrix_serial(const MaskTube* as, std::size_t na, const MaskTube* bs,
                            std::size_t nb, double* out) {
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = iou_tube(as[i], bs[j]);
}

void add_into_serial(double* acc, const float* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += src[i];
}

void divide_into_serial(float* dst, const double* acc, double divisor, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(acc[i] / divisor);
}

void argmax_fuse_serial(const float* const* grids, const double* weights, std::size_t k,
                        std::size_t n, int32_t* winner, double* value) {
    for (std::size_t p = 0; p < n; ++p) detail::argmax_fuse_at(grids, weights, k, p, winner, value);
}

}  // namespace panens::kern
