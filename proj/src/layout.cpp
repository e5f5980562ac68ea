#include "alpr/layout.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "alpr/errors.hpp"
#include "alpr/inference.hpp"

namespace alpr {

namespace {

const std::map<char, char> kDigitToLetter = {
    {'1', 'I'}, {'2', 'Z'}, {'4', 'A'}, {'5', 'S'}, {'6', 'G'}, {'7', 'Z'}, {'8', 'B'}};

const std::map<char, char> kLetterToDigit = {
    {'A', '4'}, {'B', '8'}, {'D', '0'}, {'G', '6'}, {'I', '1'},
    {'J', '1'}, {'Q', '0'}, {'S', '5'}, {'Z', '7'}};

LayoutRuleSet make_ruleset(std::string name, int min_chars, int max_chars, std::string pattern,
                           RowPolicy rows, float threshold) {
    LayoutRuleSet r;
    r.name = std::move(name);
    r.min_chars = min_chars;
    r.max_chars = max_chars;
    r.pattern = std::move(pattern);
    r.rows = rows;
    r.char_conf_threshold = threshold;
    r.digit_to_letter = kDigitToLetter;
    r.letter_to_digit = kLetterToDigit;
    return r;
}

const char* row_policy_name(RowPolicy p) {
    switch (p) {
        case RowPolicy::One: return "one";
        case RowPolicy::Two: return "two";
        case RowPolicy::Either: return "either";
    }
    return "?";
}

RowPolicy row_policy_from_name(const std::string& s, int line) {
    if (s == "one") return RowPolicy::One;
    if (s == "two") return RowPolicy::Two;
    if (s == "either") return RowPolicy::Either;
    throw ConfigError("unknown row policy \"" + s + "\"", line);
}

std::map<char, char> parse_swap_list(const std::string& spec, int line) {
    std::map<char, char> out;
    std::istringstream in(spec);
    std::string pair;
    while (std::getline(in, pair, ',')) {
        if (pair.size() != 2)
            throw ConfigError("swap entries must be two characters, got \"" + pair + "\"", line);
        out[pair[0]] = pair[1];
    }
    return out;
}

std::string format_swap_list(const std::map<char, char>& m) {
    std::string out;
    for (auto [from, to] : m) {
        if (!out.empty()) out += ',';
        out += from;
        out += to;
    }
    return out;
}

float box_top(const BoundingBox& b) { return b.cy - b.h / 2.0f; }
float box_bottom(const BoundingBox& b) { return b.cy + b.h / 2.0f; }

}  // namespace

char glyph_from_class(int class_id) {
    if (class_id < 0 || class_id >= kAlphabetSize) throw ValidationError("glyph class out of range");
    if (class_id < 10) return static_cast<char>('0' + class_id);
    char letter = static_cast<char>('A' + (class_id - 10));
    return letter >= 'O' ? static_cast<char>(letter + 1) : letter;
}

int class_from_glyph(char glyph) {
    if (glyph >= '0' && glyph <= '9') return glyph - '0';
    if (glyph == 'O') return 0;  // merged with '0'
    if (glyph >= 'A' && glyph <= 'Z') {
        int idx = glyph - 'A';
        if (glyph > 'O') --idx;
        return 10 + idx;
    }
    return -1;
}

bool glyph_is_letter(char glyph) { return glyph >= 'A' && glyph <= 'Z'; }
bool glyph_is_digit(char glyph) { return glyph >= '0' && glyph <= '9'; }

const char* vehicle_kind_name(VehicleKind kind) {
    return kind == VehicleKind::Car ? "car" : "motorcycle";
}

std::optional<VehicleKind> vehicle_kind_from_name(const std::string& name) {
    if (name == "car") return VehicleKind::Car;
    if (name == "motorcycle") return VehicleKind::Motorcycle;
    return std::nullopt;
}

std::map<std::string, LayoutRuleSet> builtin_rulesets() {
    std::map<std::string, LayoutRuleSet> rules;
    rules["american"] = make_ruleset("american", 4, 7, "", RowPolicy::One, 0.5f);
    rules["brazilian"] = make_ruleset("brazilian", 7, 7, "LLLDDDD", RowPolicy::Either, 0.5f);
    rules["chinese"] = make_ruleset("chinese", 6, 6, "L?????", RowPolicy::One, 0.5f);
    rules["european"] = make_ruleset("european", 5, 8, "", RowPolicy::Either, 0.65f);
    rules["taiwanese"] = make_ruleset("taiwanese", 5, 6, "", RowPolicy::One, 0.5f);
    rules["undefined"] = make_ruleset("undefined", 4, 8, "", RowPolicy::One, 0.5f);
    return rules;
}

std::map<std::string, LayoutRuleSet> load_rulesets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open layout rules file: " + path);

    std::map<std::string, LayoutRuleSet> rules;
    std::string raw;
    int line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::istringstream line(raw);
        std::string name;
        if (!(line >> name)) continue;

        LayoutRuleSet r;
        r.name = name;
        std::string pattern, rows;
        if (!(line >> r.min_chars >> r.max_chars >> pattern >> rows >> r.char_conf_threshold))
            throw ConfigError("expected: name min max pattern rows threshold", line_number);
        if (r.min_chars < 0 || r.min_chars > r.max_chars)
            throw ConfigError("invalid character count range", line_number);
        if (pattern != "-") {
            if (static_cast<int>(pattern.size()) != r.min_chars || r.min_chars != r.max_chars)
                throw ConfigError("pattern length must equal min = max character count", line_number);
            for (char c : pattern)
                if (c != 'L' && c != 'D' && c != '?')
                    throw ConfigError("pattern may only contain L, D, ?", line_number);
            r.pattern = pattern;
        }
        r.rows = row_policy_from_name(rows, line_number);
        if (r.char_conf_threshold < 0.0f || r.char_conf_threshold > 1.0f)
            throw ConfigError("confidence threshold must be in [0,1]", line_number);

        r.digit_to_letter = kDigitToLetter;
        r.letter_to_digit = kLetterToDigit;
        std::string extra;
        while (line >> extra) {
            if (extra.rfind("d2l=", 0) == 0)
                r.digit_to_letter = parse_swap_list(extra.substr(4), line_number);
            else if (extra.rfind("l2d=", 0) == 0)
                r.letter_to_digit = parse_swap_list(extra.substr(4), line_number);
            else
                throw ConfigError("unknown rules attribute \"" + extra + "\"", line_number);
        }
        rules[name] = std::move(r);
    }
    if (rules.empty()) throw ConfigError("layout rules file defines no layouts");
    return rules;
}

void save_rulesets(const std::map<std::string, LayoutRuleSet>& rules, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write layout rules file: " + path);
    out << "# layout  min  max  pattern  rows  threshold\n";
    for (const auto& [name, r] : rules) {
        out << name << " " << r.min_chars << " " << r.max_chars << " "
            << (r.pattern.empty() ? "-" : r.pattern) << " " << row_policy_name(r.rows) << " "
            << r.char_conf_threshold;
        if (r.digit_to_letter != kDigitToLetter)
            out << " d2l=" << format_swap_list(r.digit_to_letter);
        if (r.letter_to_digit != kLetterToDigit)
            out << " l2d=" << format_swap_list(r.letter_to_digit);
        out << "\n";
    }
}

std::vector<CharDetection> enforce_count(const std::vector<CharDetection>& pool,
                                         const LayoutRuleSet& rules) {
    std::vector<std::size_t> above, below;
    for (std::size_t i = 0; i < pool.size(); ++i)
        (pool[i].score >= rules.char_conf_threshold ? above : below).push_back(i);

    auto by_score_desc = [&](std::size_t a, std::size_t b) {
        if (pool[a].score != pool[b].score) return pool[a].score > pool[b].score;
        return a < b;
    };

    if (static_cast<int>(above.size()) > rules.max_chars) {
        std::sort(above.begin(), above.end(), by_score_desc);
        above.resize(rules.max_chars);
    } else if (static_cast<int>(above.size()) < rules.min_chars && !below.empty()) {
        std::sort(below.begin(), below.end(), by_score_desc);
        for (std::size_t i : below) {
            if (static_cast<int>(above.size()) >= rules.min_chars) break;
            above.push_back(i);
        }
    }

    std::sort(above.begin(), above.end());
    std::vector<CharDetection> out;
    out.reserve(above.size());
    for (std::size_t i : above) out.push_back(pool[i]);
    return out;
}

SwapResult apply_swaps(const std::string& text, const LayoutRuleSet& rules) {
    if (rules.pattern.empty()) return {text, {}};
    if (text.size() != rules.pattern.size())
        throw ValidationError("text length does not match layout pattern");

    SwapResult result{text, {}};
    for (std::size_t i = 0; i < text.size(); ++i) {
        char slot = rules.pattern[i];
        char c = result.text[i];
        if (slot == 'L' && glyph_is_digit(c)) {
            auto it = rules.digit_to_letter.find(c);
            if (it != rules.digit_to_letter.end()) result.text[i] = it->second;
            else result.unmapped_positions.push_back(static_cast<int>(i));
        } else if (slot == 'D' && glyph_is_letter(c)) {
            auto it = rules.letter_to_digit.find(c);
            if (it != rules.letter_to_digit.end()) result.text[i] = it->second;
            else result.unmapped_positions.push_back(static_cast<int>(i));
        }
    }
    return result;
}

RowMode detect_rows(const std::vector<CharDetection>& detections, VehicleKind vehicle_kind,
                    const LayoutRuleSet& rules) {
    if (detections.empty()) throw ValidationError("detect_rows requires at least one detection");
    switch (rules.rows) {
        case RowPolicy::One: return RowMode::One;
        case RowPolicy::Two: return RowMode::Two;
        case RowPolicy::Either: break;
    }
    if (rules.name == "brazilian")
        return vehicle_kind == VehicleKind::Motorcycle ? RowMode::Two : RowMode::One;

    // Two rows when half or more of the characters lie entirely below some
    // other character.
    const std::size_t n = detections.size();
    std::size_t below_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (box_top(detections[i].box) >= box_bottom(detections[j].box)) {
                ++below_count;
                break;
            }
        }
    }
    return 2 * below_count >= n ? RowMode::Two : RowMode::One;
}

std::vector<CharDetection> reading_order(const std::vector<CharDetection>& detections,
                                         RowMode mode) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    auto by_x = [&](std::size_t a, std::size_t b) {
        if (detections[a].box.cx != detections[b].box.cx)
            return detections[a].box.cx < detections[b].box.cx;
        return a < b;
    };

    if (mode == RowMode::Two && detections.size() > 1) {
        float top = detections[0].box.cy, bottom = detections[0].box.cy;
        for (const auto& d : detections) {
            top = std::min(top, d.box.cy);
            bottom = std::max(bottom, d.box.cy);
        }
        if (top < bottom) {
            // 1D 2-means on the y centers, seeded at the extremes
            float c0 = top, c1 = bottom;
            std::vector<int> assign(detections.size(), 0);
            for (int iter = 0; iter < 100; ++iter) {
                bool changed = false;
                for (std::size_t i = 0; i < detections.size(); ++i) {
                    float y = detections[i].box.cy;
                    int a = std::abs(y - c0) <= std::abs(y - c1) ? 0 : 1;
                    if (a != assign[i]) {
                        assign[i] = a;
                        changed = true;
                    }
                }
                double s0 = 0.0, s1 = 0.0;
                int n0 = 0, n1 = 0;
                for (std::size_t i = 0; i < detections.size(); ++i) {
                    if (assign[i] == 0) { s0 += detections[i].box.cy; ++n0; }
                    else { s1 += detections[i].box.cy; ++n1; }
                }
                if (n0 > 0) c0 = static_cast<float>(s0 / n0);
                if (n1 > 0) c1 = static_cast<float>(s1 / n1);
                if (!changed && iter > 0) break;
            }
            std::vector<std::size_t> top_row, bottom_row;
            for (std::size_t i = 0; i < detections.size(); ++i)
                (assign[i] == (c0 <= c1 ? 0 : 1) ? top_row : bottom_row).push_back(i);
            std::sort(top_row.begin(), top_row.end(), by_x);
            std::sort(bottom_row.begin(), bottom_row.end(), by_x);
            order = std::move(top_row);
            order.insert(order.end(), bottom_row.begin(), bottom_row.end());

            std::vector<CharDetection> out;
            out.reserve(order.size());
            for (std::size_t i : order) out.push_back(detections[i]);
            return out;
        }
    }

    std::sort(order.begin(), order.end(), by_x);
    std::vector<CharDetection> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(detections[i]);
    return out;
}

std::string assemble_text(const std::vector<CharDetection>& detections, RowMode mode) {
    std::string text;
    for (const auto& d : reading_order(detections, mode)) text += d.glyph;
    return text;
}

PlateReading read_plate_from_map(const Tensor& head,
                                 const std::vector<std::array<float, 2>>& anchors,
                                 const LayoutRuleSet& rules, VehicleKind vehicle_kind,
                                 double nms_iou) {
    const int a_count = static_cast<int>(anchors.size());
    if (a_count <= 0 || head.channels % a_count != 0)
        throw ValidationError("character head channels do not divide by anchor count");
    const int classes = head.channels / a_count - 5;
    if (classes != kAlphabetSize)
        throw ValidationError("character head must predict the 35-class alphabet");

    // Full candidate pool (threshold 0), then per-class NMS; the confidence
    // threshold only partitions the pool inside enforce_count.
    auto pool_dets = nms(decode_region(head, anchors, classes, 0.0f), nms_iou);

    std::vector<CharDetection> pool;
    pool.reserve(pool_dets.size());
    for (const auto& d : pool_dets)
        pool.push_back({d.box, glyph_from_class(d.class_id), d.score});

    PlateReading reading;
    auto selected = enforce_count(pool, rules);
    if (selected.empty()) {
        reading.negative = true;
        return reading;
    }
    reading.short_pool = static_cast<int>(selected.size()) < rules.min_chars;

    RowMode mode = detect_rows(selected, vehicle_kind, rules);
    reading.characters = reading_order(selected, mode);
    for (const auto& d : reading.characters) reading.text += d.glyph;

    if (!rules.pattern.empty() && reading.text.size() == rules.pattern.size()) {
        SwapResult swapped = apply_swaps(reading.text, rules);
        reading.text = swapped.text;
        reading.flagged_positions = swapped.unmapped_positions;
        for (std::size_t i = 0; i < reading.characters.size(); ++i)
            reading.characters[i].glyph = reading.text[i];
    }
    return reading;
}

PlateReading recognize_plate(const Image& lp_patch, const NetworkModel& crnet,
                             const LayoutRuleSet& rules, VehicleKind vehicle_kind,
                             double nms_iou) {
    int region = crnet.region_layer_index();
    if (region < 0) throw ValidationError("character network has no region layer");
    Tensor input = preprocess(lp_patch, crnet.input_width, crnet.input_height);
    auto outputs = forward(crnet, input);
    return read_plate_from_map(outputs[region], crnet.layers[region].anchors, rules, vehicle_kind,
                               nms_iou);
}

}  // namespace alpr
