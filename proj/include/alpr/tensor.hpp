#pragma once

#include <cstddef>
#include <vector>

namespace alpr {

// Dense float tensor in (channel, row, col) order.
struct Tensor {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(int w, int h, int c) : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, 0.0f) {}

    std::size_t size() const { return data.size(); }

    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height + y) * width + x;
    }

    float& at(int c, int y, int x) { return data[index(c, y, x)]; }
    float at(int c, int y, int x) const { return data[index(c, y, x)]; }
};

}  // namespace alpr
