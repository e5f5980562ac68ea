#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alpr/decode.hpp"
#include "alpr/image.hpp"
#include "alpr/model.hpp"

namespace alpr {

// 35-class alphabet: digits 0-9 then A-Z with 'O' merged into '0'.
inline constexpr int kAlphabetSize = 35;
char glyph_from_class(int class_id);
int class_from_glyph(char glyph);  // -1 when outside the alphabet
bool glyph_is_letter(char glyph);
bool glyph_is_digit(char glyph);

enum class VehicleKind { Car, Motorcycle };
enum class RowPolicy { One, Two, Either };
enum class RowMode { One, Two };

const char* vehicle_kind_name(VehicleKind kind);
std::optional<VehicleKind> vehicle_kind_from_name(const std::string& name);

struct CharDetection {
    BoundingBox box;  // LP-patch coordinates
    char glyph = '?';
    float score = 0.0f;
};

struct LayoutRuleSet {
    std::string name;
    int min_chars = 4;
    int max_chars = 8;
    std::string pattern;  // over {L, D, ?}; empty = no fixed positions
    RowPolicy rows = RowPolicy::One;
    float char_conf_threshold = 0.5f;
    std::map<char, char> digit_to_letter;
    std::map<char, char> letter_to_digit;
};

// The five layout classes of the LP detector plus the undefined fallback.
std::map<std::string, LayoutRuleSet> builtin_rulesets();

// Layout-rules file: one record per line,
//   name min max pattern rows threshold [d2l=1I,2Z,...] [l2d=A4,...]
// with '-' for an absent pattern and rows in {one,two,either}.
std::map<std::string, LayoutRuleSet> load_rulesets(const std::string& path);
void save_rulesets(const std::map<std::string, LayoutRuleSet>& rules, const std::string& path);

// Trims an NMS-filtered candidate pool to the layout's character count:
// keeps candidates at or above the threshold, drops the lowest-scored past
// max_chars, and re-admits the best below-threshold candidates up to
// min_chars. Output preserves pool order and never fabricates entries.
std::vector<CharDetection> enforce_count(const std::vector<CharDetection>& pool,
                                         const LayoutRuleSet& rules);

struct SwapResult {
    std::string text;
    std::vector<int> unmapped_positions;  // pattern slots left unconverted
};

SwapResult apply_swaps(const std::string& text, const LayoutRuleSet& rules);

RowMode detect_rows(const std::vector<CharDetection>& detections, VehicleKind vehicle_kind,
                    const LayoutRuleSet& rules);

std::vector<CharDetection> reading_order(const std::vector<CharDetection>& detections,
                                         RowMode mode);
std::string assemble_text(const std::vector<CharDetection>& detections, RowMode mode);

struct PlateReading {
    std::string text;
    std::vector<CharDetection> characters;  // reading order
    bool negative = false;
    bool short_pool = false;                // fewer candidates than min_chars
    std::vector<int> flagged_positions;     // unmapped pattern violations
};

// Decode + NMS + count enforcement + row handling + swaps on a raw
// character head.
PlateReading read_plate_from_map(const Tensor& head,
                                 const std::vector<std::array<float, 2>>& anchors,
                                 const LayoutRuleSet& rules, VehicleKind vehicle_kind,
                                 double nms_iou = 0.25);

PlateReading recognize_plate(const Image& lp_patch, const NetworkModel& crnet,
                             const LayoutRuleSet& rules, VehicleKind vehicle_kind,
                             double nms_iou = 0.25);

}  // namespace alpr
