// OpenMP kernels plus the mode dispatchers. Outputs are per-element
// independent (or integer-reduced inside iou_tube), so any thread schedule
// reproduces the serial reference bit for bit.

#include "kernels_impl.hpp"
#include "panens/kernels.hpp"
#include "panens/parallel.hpp"

namespace panens::kern {

void threshold_bits_omp(const float* logits, std::size_t n, uint8_t* bits) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) bits[i] = logits[i] > 0.0f ? 1 : 0;
}

void hflip_grid_omp(const float* src, int h, int w, float* dst) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        const float* in = src + static_cast<std::size_t>(r) * w;
        float* out = dst + static_cast<std::size_t>(r) * w;
        for (int c = 0; c < w; ++c) out[c] = in[w - 1 - c];
    }
}

void resize_bilinear_omp(const float* src, int sh, int sw, float* dst, int dh, int dw) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dh; ++y)
        for (int x = 0; x < dw; ++x)
            dst[static_cast<std::size_t>(y) * dw + x] = detail::bilinear_at(src, sh, sw, dh, dw, y, x);
}

void tube_iou_matrix_omp(const MaskTube* as, std::size_t na, const MaskTube* bs,
                         std::size_t nb, double* out) {
    const std::int64_t total = static_cast<std::int64_t>(na * nb);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t i = static_cast<std::size_t>(idx) / nb;
        const std::size_t j = static_cast<std::size_t>(idx) % nb;
        out[idx] = iou_tube(as[i], bs[j]);
    }
}

void add_into_omp(double* acc, const float* src, std::size_t n) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) acc[i] += src[i];
}

void divide_into_omp(float* dst, const double* acc, double divisor, std::size_t n) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) dst[i] = static_cast<float>(acc[i] / divisor);
}

void argmax_fuse_omp(const float* const* grids, const double* weights, std::size_t k,
                     std::size_t n, int32_t* winner, double* value) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < sn; ++p)
        detail::argmax_fuse_at(grids, weights, k, static_cast<std::size_t>(p), winner, value);
}

// --- dispatchers ---------------------------------------------------------

namespace {
inline bool use_omp() { return par::mode() == par::Mode::openmp && par::openmp_available(); }
}  // namespace

void threshold_bits(const float* logits, std::size_t n, uint8_t* bits) {
    use_omp() ? threshold_bits_omp(logits, n, bits) : threshold_bits_serial(logits, n, bits);
}

void hflip_grid(const float* src, int h, int w, float* dst) {
    use_omp() ? hflip_grid_omp(src, h, w, dst) : hflip_grid_serial(src, h, w, dst);
}

void resize_bilinear(const float* src, int sh, int sw, float* dst, int dh, int dw) {
    use_omp() ? resize_bilinear_omp(src, sh, sw, dst, dh, dw)
              : resize_bilinear_serial(src, sh, sw, dst, dh, dw);
}

void tube_iou_matrix(const MaskTube* as, std::size_t na, const MaskTube* bs, std::size_t nb,
                     double* out) {
    use_omp() ? tube_iou_matrix_omp(as, na, bs, nb, out)
              : tube_iou_matrix_serial(as, na, bs, nb, out);
}

void add_into(double* acc, const float* src, std::size_t n) {
    use_omp() ? add_into_omp(acc, src, n) : add_into_serial(acc, src, n);
}

void divide_into(float* dst, const double* acc, double divisor, std::size_t n) {
    use_omp() ? divide_into_omp(dst, acc, divisor, n) : divide_into_serial(dst, acc, divisor, n);
}

void argmax_fuse(const float* const* grids, const double* weights, std::size_t k, std::size_t n,
                 int32_t* winner, double* value) {
    use_omp() ? argmax_fuse_omp(grids, weights, k, n, winner, value)
              : argmax_fuse_serial(grids, weights, k, n, winner, value);
}

}  // namespace panens::kern
