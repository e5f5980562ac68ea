#include "alpr/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Image load_raw(const std::string& path) {
    std::ifstream dim(path + ".dim");
    if (!dim) throw IoError("missing sidecar for raw image: " + path + ".dim");
    int w = 0, h = 0;
    dim >> w >> h;
    if (w <= 0 || h <= 0) throw IoError("invalid dimensions in sidecar: " + path + ".dim");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open raw image: " + path);
    Image img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw IoError("raw image shorter than sidecar dimensions: " + path);
    return img;
}

void save_raw(const Image& image, const std::string& path) {
    std::ofstream dim(path + ".dim");
    if (!dim) throw IoError("cannot write sidecar: " + path + ".dim");
    dim << image.width << " " << image.height << "\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write raw image: " + path);
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
}

}  // namespace

Image load_image(const std::string& path) {
    if (has_suffix(path, ".rgb")) return load_raw(path);

    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot decode image: " + path);
    Image img(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x)
            img.set(x, y, row[x][2], row[x][1], row[x][0]);
    }
    return img;
}

void save_image(const Image& image, const std::string& path) {
    if (image.empty()) throw ValidationError("cannot save empty image");
    if (has_suffix(path, ".rgb")) {
        save_raw(image, path);
        return;
    }
    cv::Mat bgr(image.height, image.width, CV_8UC3);
    for (int y = 0; y < image.height; ++y) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width; ++x) {
            auto p = image.get(x, y);
            row[x] = cv::Vec3b(p[2], p[1], p[0]);
        }
    }
    if (!cv::imwrite(path, bgr)) throw IoError("cannot encode image: " + path);
}

Image resize_bilinear(const Image& src, int out_w, int out_h) {
    if (src.empty()) throw ValidationError("cannot resize empty image");
    if (out_w <= 0 || out_h <= 0) throw ValidationError("non-positive resize target");
    if (out_w == src.width && out_h == src.height) return src;

    Image dst(out_w, out_h);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
        int y0 = static_cast<int>(fy);
        int y1 = std::min(y0 + 1, src.height - 1);
        double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
            int x0 = static_cast<int>(fx);
            int x1 = std::min(x0 + 1, src.width - 1);
            double wx = fx - x0;
            auto p00 = src.get(x0, y0);
            auto p10 = src.get(x1, y0);
            auto p01 = src.get(x0, y1);
            auto p11 = src.get(x1, y1);
            for (int c = 0; c < 3; ++c) {
                double v = (1 - wy) * ((1 - wx) * p00[c] + wx * p10[c]) +
                           wy * ((1 - wx) * p01[c] + wx * p11[c]);
                dst.pixels[dst.offset(x, y) + c] =
                    static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return dst;
}

Image crop_with_fill(const Image& src, const PixelBox& box, std::uint8_t fill) {
    if (box.w <= 0 || box.h <= 0) throw ValidationError("degenerate crop box");
    Image dst(box.w, box.h, fill);
    for (int y = 0; y < box.h; ++y) {
        int sy = box.y + y;
        if (sy < 0 || sy >= src.height) continue;
        for (int x = 0; x < box.w; ++x) {
            int sx = box.x + x;
            if (sx < 0 || sx >= src.width) continue;
            auto p = src.get(sx, sy);
            dst.set(x, y, p[0], p[1], p[2]);
        }
    }
    return dst;
}

PixelBox clamp_to_image(const PixelBox& box, int width, int height) {
    int x0 = std::clamp(box.x, 0, width);
    int y0 = std::clamp(box.y, 0, height);
    int x1 = std::clamp(box.x + box.w, 0, width);
    int y1 = std::clamp(box.y + box.h, 0, height);
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

void draw_box(Image& image, const PixelBox& box,
              std::uint8_t r, std::uint8_t g, std::uint8_t b, int thickness) {
    for (int y = box.y; y < box.y + box.h; ++y) {
        if (y < 0 || y >= image.height) continue;
        bool edge_row = y < box.y + thickness || y >= box.y + box.h - thickness;
        for (int x = box.x; x < box.x + box.w; ++x) {
            if (x < 0 || x >= image.width) continue;
            bool edge_col = x < box.x + thickness || x >= box.x + box.w - thickness;
            if (edge_row || edge_col) image.set(x, y, r, g, b);
        }
    }
}

}  // namespace alpr
