#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace panens::detmath {

// exp(x) from a fixed polynomial so results depend only on IEEE-754 basic
// operations, not on the host libm. Accuracy is ~1 ulp-level relative error,
// which the tests pin against std::exp. Range reduction: x = k*ln2 + r with
// |r| <= 0.5*ln2, then a degree-13 Taylor evaluation of e^r.
inline double exp(double x) {
    if (x != x) return x;
    if (x > 709.782712893384) return HUGE_VAL;
    if (x < -745.133219101941) return 0.0;

    static constexpr double kInvLn2 = 1.4426950408889634074;
    static constexpr double kLn2Hi = 6.93147180369123816490e-01;
    static constexpr double kLn2Lo = 1.90821492927058770002e-10;

    double kd = std::floor(x * kInvLn2 + 0.5);
    int k = static_cast<int>(kd);
    double r = (x - kd * kLn2Hi) - kd * kLn2Lo;

    // Horner over 1/i! for i = 13 .. 0.
    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;

    return std::ldexp(p, k);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + detmath::exp(-x)); }

// Softmax of a logit vector, computed in double with the usual max shift.
inline std::vector<double> softmax(const float* logits, std::size_t n) {
    std::vector<double> out(n);
    double mx = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) mx = logits[i] > mx ? logits[i] : mx;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = detmath::exp(static_cast<double>(logits[i]) - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
    return out;
}

}  // namespace panens::detmath
