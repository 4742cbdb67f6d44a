#pragma once

#include <cstddef>
#include <cstdint>

namespace panens {

// Grid geometry shared by masks, logit grids and panoptic frames.
struct Dims {
    int height = 0;
    int width = 0;

    bool valid() const { return height >= 1 && width >= 1; }
    std::size_t count() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }

    friend bool operator==(const Dims& a, const Dims& b) {
        return a.height == b.height && a.width == b.width;
    }
    friend bool operator!=(const Dims& a, const Dims& b) { return !(a == b); }
};

}  // namespace panens
