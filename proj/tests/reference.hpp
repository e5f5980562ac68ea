#pragma once

// Scalar reference implementations used as oracles by the unit and
// acceptance suites. They work on flat arrays with explicit index
// arithmetic and stay independent of the library's code paths.

#include <algorithm>
#include <cmath>
#include <vector>

#include "alpr/decode.hpp"

namespace testref {

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// Region decoding straight off the darknet entry layout:
// entry_index(a, e, row, col) = ((a*(classes+5) + e) * H + row) * W + col.
inline std::vector<alpr::Detection> decode_region(
    const alpr::Tensor& fm, const std::vector<std::array<float, 2>>& anchors, int classes,
    float conf_threshold) {
    const int W = fm.width, H = fm.height, A = static_cast<int>(anchors.size());
    const float* data = fm.data.data();
    auto entry = [&](int a, int e, int row, int col) {
        return data[((a * (classes + 5) + e) * H + row) * W + col];
    };

    std::vector<alpr::Detection> out;
    for (int row = 0; row < H; ++row) {
        for (int col = 0; col < W; ++col) {
            for (int a = 0; a < A; ++a) {
                alpr::Detection d;
                d.box.cx = std::clamp((sigmoid(entry(a, 0, row, col)) + col) / W, 0.0f, 1.0f);
                d.box.cy = std::clamp((sigmoid(entry(a, 1, row, col)) + row) / H, 0.0f, 1.0f);
                d.box.w = anchors[a][0] * std::exp(entry(a, 2, row, col)) / W;
                d.box.h = anchors[a][1] * std::exp(entry(a, 3, row, col)) / H;
                d.objectness = sigmoid(entry(a, 4, row, col));

                float m = entry(a, 5, row, col);
                for (int c = 1; c < classes; ++c) m = std::max(m, entry(a, 5 + c, row, col));
                d.class_probs.resize(classes);
                float sum = 0.0f;
                for (int c = 0; c < classes; ++c) {
                    d.class_probs[c] = std::exp(entry(a, 5 + c, row, col) - m);
                    sum += d.class_probs[c];
                }
                d.class_id = 0;
                for (int c = 0; c < classes; ++c) {
                    d.class_probs[c] /= sum;
                    if (d.class_probs[c] > d.class_probs[d.class_id]) d.class_id = c;
                }
                d.score = d.objectness * d.class_probs[d.class_id];
                if (d.score >= conf_threshold) out.push_back(std::move(d));
            }
        }
    }
    return out;
}

// Exhaustive suppression: repeatedly take the global best unprocessed
// detection, then mark every same-class overlap at or above the threshold.
inline std::vector<alpr::Detection> nms(const std::vector<alpr::Detection>& detections,
                                        double iou_threshold) {
    const std::size_t n = detections.size();
    std::vector<bool> removed(n, false), kept_flag(n, false);
    std::vector<alpr::Detection> kept;

    for (;;) {
        int best = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (removed[i] || kept_flag[i]) continue;
            if (best < 0 || detections[i].score > detections[best].score) best = static_cast<int>(i);
        }
        if (best < 0) break;
        kept_flag[best] = true;
        kept.push_back(detections[best]);
        for (std::size_t i = 0; i < n; ++i) {
            if (removed[i] || kept_flag[i]) continue;
            if (detections[i].class_id == detections[best].class_id &&
                alpr::iou(detections[best].box, detections[i].box) >= iou_threshold)
                removed[i] = true;
        }
    }
    return kept;
}

}  // namespace testref
