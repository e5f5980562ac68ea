#include "alpr/decode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

inline float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

double iou_wh(const std::array<float, 2>& a, const std::array<float, 2>& b) {
    double inter = static_cast<double>(std::min(a[0], b[0])) * std::min(a[1], b[1]);
    double uni = static_cast<double>(a[0]) * a[1] + static_cast<double>(b[0]) * b[1] - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double cluster_cost(const std::vector<std::array<float, 2>>& boxes,
                    const std::vector<int>& assignment,
                    const std::vector<std::array<float, 2>>& centroids) {
    double cost = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i)
        cost += 1.0 - iou_wh(boxes[i], centroids[assignment[i]]);
    return cost;
}

// Uniform draw decoupled from std::uniform_* so seeded runs are reproducible
// across standard libraries.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick_weighted(std::mt19937_64& rng, const std::vector<double>& weights) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) {
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (weights[i] >= 0.0) return i;
        return 0;
    }
    double r = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (r < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace

std::vector<Detection> decode_region(const Tensor& fm,
                                     const std::vector<std::array<float, 2>>& anchors,
                                     int classes, float conf_threshold) {
    const int a_count = static_cast<int>(anchors.size());
    if (a_count <= 0 || classes <= 0 || fm.channels != (classes + 5) * a_count)
        throw ValidationError("feature map channels do not factor as (classes+5) x anchors");

    const int grid_w = fm.width;
    const int grid_h = fm.height;
    std::vector<Detection> out;
    std::vector<float> logits(static_cast<std::size_t>(classes));

    for (int row = 0; row < grid_h; ++row) {
        for (int col = 0; col < grid_w; ++col) {
            for (int a = 0; a < a_count; ++a) {
                const int base = a * (classes + 5);
                const float tx = fm.at(base + 0, row, col);
                const float ty = fm.at(base + 1, row, col);
                const float tw = fm.at(base + 2, row, col);
                const float th = fm.at(base + 3, row, col);
                const float to = fm.at(base + 4, row, col);
                for (int c = 0; c < classes; ++c)
                    logits[c] = fm.at(base + 5 + c, row, col);

                Detection d;
                d.box.cx = std::clamp((sigmoidf(tx) + col) / grid_w, 0.0f, 1.0f);
                d.box.cy = std::clamp((sigmoidf(ty) + row) / grid_h, 0.0f, 1.0f);
                d.box.w = anchors[a][0] * std::exp(tw) / grid_w;
                d.box.h = anchors[a][1] * std::exp(th) / grid_h;
                d.objectness = sigmoidf(to);

                float m = logits[0];
                for (int c = 1; c < classes; ++c) m = std::max(m, logits[c]);
                float sum = 0.0f;
                d.class_probs.resize(classes);
                for (int c = 0; c < classes; ++c) {
                    d.class_probs[c] = std::exp(logits[c] - m);
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

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ax0 = a.cx - a.w / 2.0, ax1 = a.cx + a.w / 2.0;
    const double ay0 = a.cy - a.h / 2.0, ay1 = a.cy + a.h / 2.0;
    const double bx0 = b.cx - b.w / 2.0, bx1 = b.cx + b.w / 2.0;
    const double by0 = b.cy - b.h / 2.0, by1 = b.cy + b.h / 2.0;

    const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
    const double ih = std::min(ay1, by1) - std::max(ay0, by0);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> nms(const std::vector<Detection>& detections, double iou_threshold) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (detections[a].score != detections[b].score)
            return detections[a].score > detections[b].score;
        return a < b;
    });

    std::vector<Detection> kept;
    for (std::size_t idx : order) {
        const Detection& d = detections[idx];
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (k.class_id == d.class_id && iou(k.box, d.box) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

std::vector<std::array<float, 2>> compute_anchors(const std::vector<std::array<float, 2>>& boxes,
                                                  int k, unsigned seed, AnchorStats* stats) {
    const int n = static_cast<int>(boxes.size());
    if (n == 0) throw ValidationError("cannot cluster an empty box set");
    if (k <= 0 || k > n) throw ValidationError("anchor count must be in [1, number of boxes]");

    std::mt19937_64 rng(seed);
    std::vector<std::array<float, 2>> centroids;
    centroids.reserve(k);

    // k-means++: first pick uniform, then proportional to squared distance.
    centroids.push_back(boxes[static_cast<std::size_t>(uniform01(rng) * n) % n]);
    std::vector<double> weights(n);
    while (static_cast<int>(centroids.size()) < k) {
        bool any = false;
        for (int i = 0; i < n; ++i) {
            double d = 1.0;
            for (const auto& c : centroids) d = std::min(d, 1.0 - iou_wh(boxes[i], c));
            weights[i] = d * d;
            any = any || weights[i] > 0.0;
        }
        if (!any) {
            // all remaining boxes coincide with a centroid; take the first
            // not yet chosen so k centroids always exist
            for (int i = 0; i < n && static_cast<int>(centroids.size()) < k; ++i) {
                bool used = false;
                for (const auto& c : centroids) used = used || (c == boxes[i]);
                if (!used) centroids.push_back(boxes[i]);
            }
            while (static_cast<int>(centroids.size()) < k) centroids.push_back(boxes[0]);
            break;
        }
        centroids.push_back(boxes[pick_weighted(rng, weights)]);
    }

    std::vector<int> assignment(n, 0);
    constexpr int max_iterations = 300;
    int iterations = 0;
    for (; iterations < max_iterations; ++iterations) {
        std::vector<int> next(n, 0);
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = 1.0 - iou_wh(boxes[i], centroids[c]);
                if (d < best) {
                    best = d;
                    next[i] = c;
                }
            }
        }
        if (stats) stats->cost_history.push_back(cluster_cost(boxes, next, centroids));
        bool stable = iterations > 0 && next == assignment;
        assignment = std::move(next);
        if (stable) break;

        for (int c = 0; c < k; ++c) {
            double sw = 0.0, sh = 0.0;
            int count = 0;
            for (int i = 0; i < n; ++i) {
                if (assignment[i] != c) continue;
                sw += boxes[i][0];
                sh += boxes[i][1];
                ++count;
            }
            if (count == 0) continue;
            std::array<float, 2> candidate{static_cast<float>(sw / count),
                                           static_cast<float>(sh / count)};
            double old_cost = 0.0, new_cost = 0.0;
            for (int i = 0; i < n; ++i) {
                if (assignment[i] != c) continue;
                old_cost += 1.0 - iou_wh(boxes[i], centroids[c]);
                new_cost += 1.0 - iou_wh(boxes[i], candidate);
            }
            if (new_cost <= old_cost) centroids[c] = candidate;
        }
    }

    std::sort(centroids.begin(), centroids.end(), [](const auto& a, const auto& b) {
        double aa = static_cast<double>(a[0]) * a[1];
        double bb = static_cast<double>(b[0]) * b[1];
        if (aa != bb) return aa < bb;
        return a[0] < b[0];
    });
    if (stats) stats->iterations = iterations;
    return centroids;
}

}  // namespace alpr
