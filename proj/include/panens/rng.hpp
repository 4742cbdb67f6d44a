#pragma once

#include <cstdint>

namespace panens {

// Deterministic 64-bit generator (splitmix64 mixing). Chosen over std::mt19937
// because its output is fully specified by the mixing constants below and is
// therefore identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n). n must be > 0; modulo bias is irrelevant at the
    // ranges used here (n << 2^64).
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    // Uniform integer in [lo, hi], inclusive.
    int next_int(int lo, int hi) {
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Approximate standard normal via the Irwin-Hall sum of 12 uniforms.
    // Avoids log/cos so the byte stream does not depend on the platform libm.
    double next_gaussian() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += next_unit();
        return s - 6.0;
    }

    // Independent child stream. Forking with distinct tags decouples the
    // consumers so adding draws in one phase does not shift another.
    Rng fork(uint64_t tag) const {
        Rng mixer(state_ ^ (0xD6E8FEB86659FD93ULL * (tag + 1)));
        return Rng(mixer.next_u64());
    }

private:
    uint64_t state_;
};

}  // namespace panens
