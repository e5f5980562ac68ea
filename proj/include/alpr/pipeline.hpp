#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alpr/decode.hpp"
#include "alpr/image.hpp"
#include "alpr/layout.hpp"
#include "alpr/model.hpp"

namespace alpr {

struct VehicleDetection {
    BoundingBox box;  // normalized image coordinates
    VehicleKind kind = VehicleKind::Car;
    float score = 0.0f;
};

struct PlateDetection {
    BoundingBox box;  // normalized vehicle-patch coordinates
    std::string layout;
    float score = 0.0f;
};

struct PlateResult {
    VehicleDetection vehicle;
    std::optional<PlateDetection> plate;
    BoundingBox plate_box_image;            // plate box mapped back to image coordinates
    std::vector<CharDetection> characters;  // reading order, LP-patch coordinates
    std::string text;
    bool negative() const { return !plate.has_value() || text.empty(); }
};

struct StageTimings {
    double vehicle_ms = 0.0;      // one vehicle-detection pass
    double lp_ms = 0.0;           // summed over vehicles
    double recognition_ms = 0.0;  // summed over vehicles
    int vehicles = 0;
    double total_ms = 0.0;
};

struct PipelineModels {
    NetworkModel vehicle;
    NetworkModel lp;
    NetworkModel crnet;
};

struct PipelineConfig {
    float vehicle_threshold = 0.25f;
    float lp_decode_threshold = 0.25f;
    float layout_threshold = 0.75f;
    double nms_iou = 0.25;
    float enlarge_target_ratio = 2.75f;
    float enlarge_band_low = 2.5f;
    float enlarge_band_high = 3.0f;
    std::map<std::string, LayoutRuleSet> rules = builtin_rulesets();
    // class index -> name for the two detector heads
    std::vector<std::string> vehicle_class_names = {"car", "motorcycle"};
    std::vector<std::string> lp_class_names = {"american", "brazilian", "chinese", "european",
                                               "taiwanese"};
};

std::vector<VehicleDetection> detect_vehicles(const Image& image, const NetworkModel& model,
                                              const PipelineConfig& config);

// Keeps only the highest-scored LP candidate; a best score below the layout
// threshold downgrades the layout to "undefined" but keeps the box.
std::optional<PlateDetection> detect_plate(const Image& vehicle_patch, const NetworkModel& model,
                                           const PipelineConfig& config);

// Expands the crop region symmetrically about the LP center along the
// deficient axis until w/h hits the target, unless already inside the band.
// Out-of-raster area is filled with mid-gray.
Image enlarge_patch(const Image& image, const PixelBox& lp_box, float target_ratio = 2.75f,
                    float band_low = 2.5f, float band_high = 3.0f);

PixelBox to_pixel_box(const BoundingBox& box, int width, int height);
BoundingBox to_normalized_box(const PixelBox& box, int width, int height);

struct PipelineOutput {
    std::vector<PlateResult> results;
    StageTimings timings;
};

PipelineOutput run_pipeline(const Image& image, const PipelineModels& models,
                            const PipelineConfig& config);

// Per-image record as written to / read from results files.
struct ImageResult {
    std::string image_path;
    int width = 0;
    int height = 0;
    std::vector<PlateResult> results;
    StageTimings timings;
};

}  // namespace alpr
