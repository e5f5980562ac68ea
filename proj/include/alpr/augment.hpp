#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alpr/image.hpp"

namespace alpr {

struct CharAnnotation {
    char glyph = '?';
    PixelBox box;
};

struct AnnotatedPlate {
    Image raster;
    std::string layout;
    std::vector<CharAnnotation> chars;  // boxes in patch coordinates
};

// Pixel-wise inversion; annotations unchanged. Involution.
AnnotatedPlate negative_image(AnnotatedPlate plate);

struct JitterParams {
    float brightness_low = 0.85f;
    float brightness_high = 1.15f;
    float rotation_deg_low = -5.0f;
    float rotation_deg_high = 5.0f;
    float crop_low = -0.02f;  // negative crops inward
    float crop_high = 0.08f;  // positive adds margin
};

// Random brightness / rotation / crop-margin, deterministic given seed.
// Rotated boxes become the axis-aligned hull of their rotated corners.
AnnotatedPlate jitter(const AnnotatedPlate& plate, std::uint64_t seed,
                      const JitterParams& params = {});

struct RescaleParams {
    float scale_low = 0.7f;
    float scale_high = 1.3f;
    float margin_low = 0.0f;   // fraction of the scaled patch per side
    float margin_high = 0.25f;
    std::uint8_t fill = 127;
};

// Simulates looser or tighter LP detections by rescaling the patch and
// padding a margin around it.
AnnotatedPlate rescale_margin(const AnnotatedPlate& plate, std::uint64_t seed,
                              const RescaleParams& params = {});

// Donor pool and running glyph counts for balance-driven character
// permutation. Donor patches are harvested from the corpus itself; each
// slot is refilled with the currently rarest glyph of its category ('0'
// serves both categories, standing in for the merged 'O').
class CharacterPermuter {
public:
    explicit CharacterPermuter(const std::vector<AnnotatedPlate>& corpus);

    AnnotatedPlate permute(const AnnotatedPlate& plate, std::uint64_t seed);

    const std::map<char, long>& frequency() const { return counts_; }
    bool has_donor(char glyph) const { return donors_.count(glyph) != 0; }

private:
    std::map<char, std::vector<Image>> donors_;
    std::map<char, long> counts_;
};

AnnotatedPlate permute_characters(const AnnotatedPlate& plate, CharacterPermuter& permuter,
                                  std::uint64_t seed);

}  // namespace alpr
