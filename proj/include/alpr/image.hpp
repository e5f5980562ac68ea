#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace alpr {

// Axis-aligned rectangle in pixel coordinates, top-left origin.
struct PixelBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const PixelBox&) const = default;
    long long area() const { return static_cast<long long>(w) * h; }
};

// Interleaved 8-bit RGB raster, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

    bool empty() const { return width <= 0 || height <= 0; }

    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * width + x) * 3;
    }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto o = offset(x, y);
        pixels[o] = r;
        pixels[o + 1] = g;
        pixels[o + 2] = b;
    }

    std::array<std::uint8_t, 3> get(int x, int y) const {
        auto o = offset(x, y);
        return {pixels[o], pixels[o + 1], pixels[o + 2]};
    }
};

// PNG/JPEG by extension; ".rgb" is headerless raw RGB with dims in "<path>.dim".
Image load_image(const std::string& path);
void save_image(const Image& image, const std::string& path);

Image resize_bilinear(const Image& src, int out_w, int out_h);

// Crops `box` from `src`; pixels outside the raster are filled with `fill`.
Image crop_with_fill(const Image& src, const PixelBox& box, std::uint8_t fill = 127);

PixelBox clamp_to_image(const PixelBox& box, int width, int height);

// Axis-aligned box outline, `thickness` pixels thick, clipped to the raster.
void draw_box(Image& image, const PixelBox& box,
              std::uint8_t r, std::uint8_t g, std::uint8_t b, int thickness = 2);

}  // namespace alpr
