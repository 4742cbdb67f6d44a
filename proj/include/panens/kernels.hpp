#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "panens/mask.hpp"

namespace panens::kern {

// Data-parallel inner loops. Each kernel exists in a serial reference form
// and an OpenMP form; the unsuffixed name dispatches on par::mode(). Every
// kernel writes per-element-independent output (or reduces integers), so the
// two forms are bit-identical and the tests assert exactly that.

// --- threshold: bits[i] = logits[i] > 0 ---------------------------------
void threshold_bits_serial(const float* logits, std::size_t n, uint8_t* bits);
void threshold_bits_omp(const float* logits, std::size_t n, uint8_t* bits);
void threshold_bits(const float* logits, std::size_t n, uint8_t* bits);

// --- horizontal flip of a row-major grid --------------------------------
void hflip_grid_serial(const float* src, int h, int w, float* dst);
void hflip_grid_omp(const float* src, int h, int w, float* dst);
void hflip_grid(const float* src, int h, int w, float* dst);

// --- bilinear resize, half-pixel centers --------------------------------
void resize_bilinear_serial(const float* src, int sh, int sw, float* dst, int dh, int dw);
void resize_bilinear_omp(const float* src, int sh, int sw, float* dst, int dh, int dw);
void resize_bilinear(const float* src, int sh, int sw, float* dst, int dh, int dw);

// --- pairwise tube IoU matrix: out[i*nb + j] = iou(as[i], bs[j]) ---------
void tube_iou_matrix_serial(const MaskTube* as, std::size_t na, const MaskTube* bs,
                            std::size_t nb, double* out);
void tube_iou_matrix_omp(const MaskTube* as, std::size_t na, const MaskTube* bs,
                         std::size_t nb, double* out);
void tube_iou_matrix(const MaskTube* as, std::size_t na, const MaskTube* bs,
                     std::size_t nb, double* out);

// --- elementwise accumulation used by logit averaging --------------------
void add_into_serial(double* acc, const float* src, std::size_t n);
void add_into_omp(double* acc, const float* src, std::size_t n);
void add_into(double* acc, const float* src, std::size_t n);

void divide_into_serial(float* dst, const double* acc, double divisor, std::size_t n);
void divide_into_omp(float* dst, const double* acc, double divisor, std::size_t n);
void divide_into(float* dst, const double* acc, double divisor, std::size_t n);

// --- per-pixel winner for panoptic fusion --------------------------------
// For each pixel p: winner[p] = argmax_k weight[k] * sigmoid(grid_k[p]),
// ties going to the lowest k; value[p] = the winning score.
void argmax_fuse_serial(const float* const* grids, const double* weights, std::size_t k,
                        std::size_t n, int32_t* winner, double* value);
void argmax_fuse_omp(const float* const* grids, const double* weights, std::size_t k,
                     std::size_t n, int32_t* winner, double* value);
void argmax_fuse(const float* const* grids, const double* weights, std::size_t k,
                 std::size_t n, int32_t* winner, double* value);

}  // namespace panens::kern
