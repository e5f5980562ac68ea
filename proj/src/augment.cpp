#include "alpr/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "alpr/errors.hpp"
#include "alpr/layout.hpp"

namespace alpr {

namespace {

constexpr double kPi = 3.14159265358979323846;

// rng helpers kept off std::uniform_* so fixed seeds give identical streams
// everywhere
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + uniform01(rng) * (hi - lo);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * n) % n;
}

PixelBox clamp_box(const PixelBox& box, int width, int height) {
    PixelBox out = clamp_to_image(box, width, height);
    if (out.w < 1) out.w = 1;
    if (out.h < 1) out.h = 1;
    out.x = std::clamp(out.x, 0, width - out.w);
    out.y = std::clamp(out.y, 0, height - out.h);
    return out;
}

Image resize_nearest(const Image& src, int out_w, int out_h) {
    Image dst(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        int sy = std::min(src.height - 1, y * src.height / out_h);
        for (int x = 0; x < out_w; ++x) {
            int sx = std::min(src.width - 1, x * src.width / out_w);
            auto p = src.get(sx, sy);
            dst.set(x, y, p[0], p[1], p[2]);
        }
    }
    return dst;
}

bool slot_is_letter(char original) { return glyph_is_letter(original); }

bool glyph_fits_slot(char glyph, bool letter_slot) {
    if (letter_slot) return glyph_is_letter(glyph) || glyph == '0';  // '0' doubles as 'O'
    return glyph_is_digit(glyph);
}

}  // namespace

AnnotatedPlate negative_image(AnnotatedPlate plate) {
    for (auto& v : plate.raster.pixels) v = static_cast<std::uint8_t>(255 - v);
    return plate;
}

AnnotatedPlate jitter(const AnnotatedPlate& plate, std::uint64_t seed, const JitterParams& params) {
    if (plate.raster.empty()) throw ValidationError("cannot jitter an empty plate");
    std::mt19937_64 rng(seed);
    const double brightness = uniform_in(rng, params.brightness_low, params.brightness_high);
    const double angle_deg = uniform_in(rng, params.rotation_deg_low, params.rotation_deg_high);
    const double crop = uniform_in(rng, params.crop_low, params.crop_high);

    AnnotatedPlate out = plate;

    if (brightness != 1.0) {
        for (auto& v : out.raster.pixels)
            v = static_cast<std::uint8_t>(
                std::clamp(std::lround(v * brightness), 0l, 255l));
    }

    if (angle_deg != 0.0) {
        const double theta = angle_deg * kPi / 180.0;
        const double cos_t = std::cos(theta), sin_t = std::sin(theta);
        const double cx = out.raster.width / 2.0, cy = out.raster.height / 2.0;

        Image rotated(out.raster.width, out.raster.height, 127);
        for (int y = 0; y < rotated.height; ++y) {
            for (int x = 0; x < rotated.width; ++x) {
                // inverse map: source = R(-theta) * (p - c) + c
                double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                double sx = cos_t * dx + sin_t * dy + cx - 0.5;
                double sy = -sin_t * dx + cos_t * dy + cy - 0.5;
                if (sx < 0 || sy < 0 || sx > out.raster.width - 1 || sy > out.raster.height - 1)
                    continue;
                int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
                int x1 = std::min(x0 + 1, out.raster.width - 1);
                int y1 = std::min(y0 + 1, out.raster.height - 1);
                double wx = sx - x0, wy = sy - y0;
                auto p00 = out.raster.get(x0, y0);
                auto p10 = out.raster.get(x1, y0);
                auto p01 = out.raster.get(x0, y1);
                auto p11 = out.raster.get(x1, y1);
                for (int c = 0; c < 3; ++c) {
                    double v = (1 - wy) * ((1 - wx) * p00[c] + wx * p10[c]) +
                               wy * ((1 - wx) * p01[c] + wx * p11[c]);
                    rotated.pixels[rotated.offset(x, y) + c] =
                        static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
                }
            }
        }
        out.raster = std::move(rotated);

        for (auto& ch : out.chars) {
            // axis-aligned hull of the forward-rotated corners
            double corners[4][2] = {
                {static_cast<double>(ch.box.x), static_cast<double>(ch.box.y)},
                {static_cast<double>(ch.box.x + ch.box.w), static_cast<double>(ch.box.y)},
                {static_cast<double>(ch.box.x), static_cast<double>(ch.box.y + ch.box.h)},
                {static_cast<double>(ch.box.x + ch.box.w),
                 static_cast<double>(ch.box.y + ch.box.h)}};
            double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
            for (auto& corner : corners) {
                double dx = corner[0] - cx, dy = corner[1] - cy;
                double rx = cos_t * dx - sin_t * dy + cx;
                double ry = sin_t * dx + cos_t * dy + cy;
                min_x = std::min(min_x, rx);
                max_x = std::max(max_x, rx);
                min_y = std::min(min_y, ry);
                max_y = std::max(max_y, ry);
            }
            ch.box = clamp_box({static_cast<int>(std::floor(min_x)),
                                static_cast<int>(std::floor(min_y)),
                                static_cast<int>(std::ceil(max_x - min_x)),
                                static_cast<int>(std::ceil(max_y - min_y))},
                               out.raster.width, out.raster.height);
        }
    }

    if (crop != 0.0) {
        int bx = static_cast<int>(std::lround(crop * out.raster.width));
        int by = static_cast<int>(std::lround(crop * out.raster.height));
        int new_w = out.raster.width + 2 * bx;
        int new_h = out.raster.height + 2 * by;
        if (new_w >= 1 && new_h >= 1 && (bx != 0 || by != 0)) {
            out.raster = crop_with_fill(out.raster, {-bx, -by, new_w, new_h});
            for (auto& ch : out.chars) {
                ch.box.x += bx;
                ch.box.y += by;
                ch.box = clamp_box(ch.box, new_w, new_h);
            }
        }
    }

    return out;
}

AnnotatedPlate rescale_margin(const AnnotatedPlate& plate, std::uint64_t seed,
                              const RescaleParams& params) {
    if (plate.raster.empty()) throw ValidationError("cannot rescale an empty plate");
    std::mt19937_64 rng(seed);
    const double scale = uniform_in(rng, params.scale_low, params.scale_high);
    const double margin = uniform_in(rng, params.margin_low, params.margin_high);

    int sw = std::max(1, static_cast<int>(std::lround(plate.raster.width * scale)));
    int sh = std::max(1, static_cast<int>(std::lround(plate.raster.height * scale)));
    int bx = static_cast<int>(std::lround(margin * sw));
    int by = static_cast<int>(std::lround(margin * sh));

    AnnotatedPlate out;
    out.layout = plate.layout;
    Image scaled = resize_bilinear(plate.raster, sw, sh);
    if (bx == 0 && by == 0) {
        out.raster = std::move(scaled);
    } else {
        out.raster = Image(sw + 2 * bx, sh + 2 * by, params.fill);
        for (int y = 0; y < sh; ++y)
            for (int x = 0; x < sw; ++x) {
                auto p = scaled.get(x, y);
                out.raster.set(x + bx, y + by, p[0], p[1], p[2]);
            }
    }

    const double fx = static_cast<double>(sw) / plate.raster.width;
    const double fy = static_cast<double>(sh) / plate.raster.height;
    for (const auto& ch : plate.chars) {
        CharAnnotation t = ch;
        t.box.x = static_cast<int>(std::lround(ch.box.x * fx)) + bx;
        t.box.y = static_cast<int>(std::lround(ch.box.y * fy)) + by;
        t.box.w = std::max(1, static_cast<int>(std::lround(ch.box.w * fx)));
        t.box.h = std::max(1, static_cast<int>(std::lround(ch.box.h * fy)));
        t.box = clamp_box(t.box, out.raster.width, out.raster.height);
        out.chars.push_back(t);
    }
    return out;
}

CharacterPermuter::CharacterPermuter(const std::vector<AnnotatedPlate>& corpus) {
    for (const auto& plate : corpus) {
        for (const auto& ch : plate.chars) {
            if (class_from_glyph(ch.glyph) < 0) continue;
            PixelBox box = clamp_to_image(ch.box, plate.raster.width, plate.raster.height);
            if (box.w <= 0 || box.h <= 0)
                throw ValidationError("character box crops an empty region");
            donors_[ch.glyph].push_back(crop_with_fill(plate.raster, box));
            ++counts_[ch.glyph];
        }
    }
}

AnnotatedPlate CharacterPermuter::permute(const AnnotatedPlate& plate, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    AnnotatedPlate out = plate;
    for (auto& slot : out.chars) {
        const bool letter_slot = slot_is_letter(slot.glyph);

        char best = 0;
        long best_count = 0;
        std::vector<char> tied;
        for (const auto& [glyph, patches] : donors_) {
            if (patches.empty() || !glyph_fits_slot(glyph, letter_slot)) continue;
            long count = counts_[glyph];
            if (best == 0 || count < best_count) {
                best = glyph;
                best_count = count;
                tied.assign(1, glyph);
            } else if (count == best_count) {
                tied.push_back(glyph);
            }
        }
        if (best == 0)
            throw ValidationError(std::string("donor pool has no ") +
                                  (letter_slot ? "letter" : "digit") + " glyphs");
        char chosen = tied[uniform_index(rng, tied.size())];

        const auto& patches = donors_[chosen];
        const Image& donor = patches[uniform_index(rng, patches.size())];

        PixelBox box = clamp_to_image(slot.box, out.raster.width, out.raster.height);
        if (box.w <= 0 || box.h <= 0)
            throw ValidationError("character box crops an empty region");
        Image resized = resize_nearest(donor, box.w, box.h);  // hard-edge paste, no blending
        for (int y = 0; y < box.h; ++y)
            for (int x = 0; x < box.w; ++x) {
                auto p = resized.get(x, y);
                out.raster.set(box.x + x, box.y + y, p[0], p[1], p[2]);
            }

        slot.glyph = chosen;
        ++counts_[chosen];
    }
    return out;
}

AnnotatedPlate permute_characters(const AnnotatedPlate& plate, CharacterPermuter& permuter,
                                  std::uint64_t seed) {
    return permuter.permute(plate, seed);
}

}  // namespace alpr
