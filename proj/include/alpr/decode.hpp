#pragma once

#include <array>
#include <vector>

#include "alpr/tensor.hpp"

namespace alpr {

// Box center and extent, normalized to [0,1] of the decoded frame.
struct BoundingBox {
    float cx = 0.0f;
    float cy = 0.0f;
    float w = 0.0f;
    float h = 0.0f;
};

struct Detection {
    BoundingBox box;
    float objectness = 0.0f;
    std::vector<float> class_probs;
    int class_id = 0;
    float score = 0.0f;
};

// Decodes a terminal region feature map of (classes+5)*A channels.
// Cells are scanned row, column, anchor; only detections with
// score >= conf_threshold are returned.
std::vector<Detection> decode_region(const Tensor& feature_map,
                                     const std::vector<std::array<float, 2>>& anchors,
                                     int classes, float conf_threshold);

double iou(const BoundingBox& a, const BoundingBox& b);

// Greedy per-class suppression: sorted by score descending (ties keep the
// lower original index), a detection survives iff its IoU with every kept
// detection of the same class is < iou_threshold.
std::vector<Detection> nms(const std::vector<Detection>& detections, double iou_threshold);

struct AnchorStats {
    int iterations = 0;
    std::vector<double> cost_history;  // total 1-IoU cost after each assignment
};

// k-means over (w,h) pairs with 1-IoU distance for co-centered boxes,
// k-means++ seeded deterministically. Centroid updates that would raise a
// cluster's cost are rejected, so the recorded cost never increases.
std::vector<std::array<float, 2>> compute_anchors(const std::vector<std::array<float, 2>>& boxes,
                                                  int k, unsigned seed = 7,
                                                  AnchorStats* stats = nullptr);

}  // namespace alpr
