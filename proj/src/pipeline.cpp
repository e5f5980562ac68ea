#include "alpr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "alpr/errors.hpp"
#include "alpr/inference.hpp"

namespace alpr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

const Tensor& region_head(const NetworkModel& model, const std::vector<Tensor>& outputs) {
    int idx = model.region_layer_index();
    if (idx < 0) throw ValidationError("network has no region layer");
    return outputs[idx];
}

std::string class_name(const std::vector<std::string>& names, int id, const char* fallback) {
    if (id >= 0 && id < static_cast<int>(names.size())) return names[id];
    return fallback;
}

}  // namespace

PixelBox to_pixel_box(const BoundingBox& box, int width, int height) {
    int w = std::max(1, static_cast<int>(std::lround(box.w * width)));
    int h = std::max(1, static_cast<int>(std::lround(box.h * height)));
    int x = static_cast<int>(std::lround(box.cx * width - w / 2.0));
    int y = static_cast<int>(std::lround(box.cy * height - h / 2.0));
    return {x, y, w, h};
}

BoundingBox to_normalized_box(const PixelBox& box, int width, int height) {
    BoundingBox b;
    b.cx = static_cast<float>((box.x + box.w / 2.0) / width);
    b.cy = static_cast<float>((box.y + box.h / 2.0) / height);
    b.w = static_cast<float>(static_cast<double>(box.w) / width);
    b.h = static_cast<float>(static_cast<double>(box.h) / height);
    return b;
}

std::vector<VehicleDetection> detect_vehicles(const Image& image, const NetworkModel& model,
                                              const PipelineConfig& config) {
    int region = model.region_layer_index();
    if (region < 0) throw ValidationError("vehicle network has no region layer");
    const LayerSpec& head = model.layers[region];

    Tensor input = preprocess(image, model.input_width, model.input_height);
    auto outputs = forward(model, input);
    auto detections = decode_region(region_head(model, outputs), head.anchors, head.classes,
                                    config.vehicle_threshold);
    detections = nms(detections, config.nms_iou);

    std::vector<VehicleDetection> vehicles;
    vehicles.reserve(detections.size());
    for (const auto& d : detections) {
        VehicleDetection v;
        v.box = d.box;
        v.kind = class_name(config.vehicle_class_names, d.class_id, "car") == "motorcycle"
                     ? VehicleKind::Motorcycle
                     : VehicleKind::Car;
        v.score = d.score;
        vehicles.push_back(v);
    }
    return vehicles;
}

std::optional<PlateDetection> detect_plate(const Image& vehicle_patch, const NetworkModel& model,
                                           const PipelineConfig& config) {
    if (vehicle_patch.empty()) throw ValidationError("empty vehicle patch");
    int region = model.region_layer_index();
    if (region < 0) throw ValidationError("LP network has no region layer");
    const LayerSpec& head = model.layers[region];

    Tensor input = preprocess(vehicle_patch, model.input_width, model.input_height);
    auto outputs = forward(model, input);
    auto detections = decode_region(region_head(model, outputs), head.anchors, head.classes,
                                    config.lp_decode_threshold);
    if (detections.empty()) return std::nullopt;

    // Each vehicle has one LP: only the highest-confidence candidate counts.
    std::size_t best = 0;
    for (std::size_t i = 1; i < detections.size(); ++i)
        if (detections[i].score > detections[best].score) best = i;

    const Detection& d = detections[best];
    PlateDetection plate;
    plate.box = d.box;
    plate.score = d.score;
    plate.layout = d.score < config.layout_threshold
                       ? "undefined"
                       : class_name(config.lp_class_names, d.class_id, "undefined");
    return plate;
}

Image enlarge_patch(const Image& image, const PixelBox& lp_box, float target_ratio,
                    float band_low, float band_high) {
    if (lp_box.w <= 0 || lp_box.h <= 0) throw ValidationError("degenerate LP box");

    double ratio = static_cast<double>(lp_box.w) / lp_box.h;
    PixelBox crop = lp_box;
    if (ratio < band_low) {
        int new_w = static_cast<int>(std::ceil(lp_box.h * static_cast<double>(target_ratio)));
        double cx = lp_box.x + lp_box.w / 2.0;
        crop.x = static_cast<int>(std::floor(cx - new_w / 2.0 + 0.5));
        crop.w = new_w;
    } else if (ratio > band_high) {
        int new_h = static_cast<int>(std::ceil(lp_box.w / static_cast<double>(target_ratio)));
        double cy = lp_box.y + lp_box.h / 2.0;
        crop.y = static_cast<int>(std::floor(cy - new_h / 2.0 + 0.5));
        crop.h = new_h;
    }
    return crop_with_fill(image, crop, 127);
}

PipelineOutput run_pipeline(const Image& image, const PipelineModels& models,
                            const PipelineConfig& config) {
    if (image.empty()) throw ValidationError("empty input image");
    PipelineOutput out;
    const auto t_total = Clock::now();

    auto t0 = Clock::now();
    auto vehicles = detect_vehicles(image, models.vehicle, config);
    out.timings.vehicle_ms = ms_since(t0);
    out.timings.vehicles = static_cast<int>(vehicles.size());

    auto undefined_rules = config.rules.find("undefined");
    if (undefined_rules == config.rules.end())
        throw ValidationError("rule set must define the \"undefined\" layout");

    for (const auto& vehicle : vehicles) {
        PlateResult result;
        result.vehicle = vehicle;

        // Crop on the clamped region; vehicles at the image edge keep their
        // visible part rather than being skipped.
        PixelBox vbox = clamp_to_image(to_pixel_box(vehicle.box, image.width, image.height),
                                       image.width, image.height);
        if (vbox.w <= 0 || vbox.h <= 0) {
            out.results.push_back(std::move(result));
            continue;
        }
        Image patch = crop_with_fill(image, vbox);

        t0 = Clock::now();
        auto plate = detect_plate(patch, models.lp, config);
        out.timings.lp_ms += ms_since(t0);
        if (!plate) {
            out.results.push_back(std::move(result));
            continue;
        }
        result.plate = plate;

        PixelBox lp_in_patch = to_pixel_box(plate->box, vbox.w, vbox.h);
        PixelBox lp_in_image{lp_in_patch.x + vbox.x, lp_in_patch.y + vbox.y, lp_in_patch.w,
                             lp_in_patch.h};
        // reported box is truncated to the vehicle region; the enlarged
        // recognition crop below still uses the raw extent
        PixelBox lp_clamped = clamp_to_image(
            {lp_in_image.x - vbox.x, lp_in_image.y - vbox.y, lp_in_image.w, lp_in_image.h},
            vbox.w, vbox.h);
        lp_clamped.w = std::max(1, lp_clamped.w);
        lp_clamped.h = std::max(1, lp_clamped.h);
        lp_clamped.x = std::clamp(lp_clamped.x, 0, std::max(0, vbox.w - lp_clamped.w)) + vbox.x;
        lp_clamped.y = std::clamp(lp_clamped.y, 0, std::max(0, vbox.h - lp_clamped.h)) + vbox.y;
        result.plate_box_image =
            to_normalized_box(lp_clamped, image.width, image.height);

        t0 = Clock::now();
        Image lp_patch = enlarge_patch(image, lp_in_image, config.enlarge_target_ratio,
                                       config.enlarge_band_low, config.enlarge_band_high);
        auto rules_it = config.rules.find(plate->layout);
        const LayoutRuleSet& rules =
            rules_it == config.rules.end() ? undefined_rules->second : rules_it->second;
        PlateReading reading =
            recognize_plate(lp_patch, models.crnet, rules, vehicle.kind, config.nms_iou);
        out.timings.recognition_ms += ms_since(t0);

        result.characters = std::move(reading.characters);
        result.text = std::move(reading.text);
        out.results.push_back(std::move(result));
    }

    out.timings.total_ms = ms_since(t_total);
    return out;
}

}  // namespace alpr
