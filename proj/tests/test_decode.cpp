#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "alpr/decode.hpp"
#include "alpr/errors.hpp"

#include "reference.hpp"

using namespace alpr;

namespace {

BoundingBox corner_box(double x0, double y0, double x1, double y1) {
    BoundingBox b;
    b.cx = static_cast<float>((x0 + x1) / 2.0);
    b.cy = static_cast<float>((y0 + y1) / 2.0);
    b.w = static_cast<float>(x1 - x0);
    b.h = static_cast<float>(y1 - y0);
    return b;
}

Tensor random_feature_map(int w, int h, int c, std::mt19937& rng) {
    std::uniform_real_distribution<float> value(-3.0f, 3.0f);
    Tensor t(w, h, c);
    for (auto& v : t.data) v = value(rng);
    return t;
}

std::vector<Detection> random_detections(int n, int classes, std::mt19937& rng) {
    std::uniform_real_distribution<float> pos(0.1f, 0.9f);
    std::uniform_real_distribution<float> extent(0.05f, 0.4f);
    std::uniform_real_distribution<float> score(0.01f, 1.0f);
    std::vector<Detection> out(n);
    for (auto& d : out) {
        d.box = {pos(rng), pos(rng), extent(rng), extent(rng)};
        d.class_id = static_cast<int>(rng() % classes);
        d.score = score(rng);
        d.objectness = d.score;
    }
    return out;
}

bool same_detections(const std::vector<Detection>& a, const std::vector<Detection>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].score != b[i].score || a[i].class_id != b[i].class_id) return false;
        if (a[i].box.cx != b[i].box.cx || a[i].box.cy != b[i].box.cy) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("all-zero 1x1 grid decodes to the centered anchor box") {
    Tensor fm(1, 1, 7);  // (2 + 5) * 1
    auto dets = decode_region(fm, {{1.0f, 1.0f}}, 2, 0.0f);
    REQUIRE(dets.size() == 1);
    const Detection& d = dets[0];
    CHECK(d.box.cx == 0.5f);
    CHECK(d.box.cy == 0.5f);
    CHECK(d.box.w == 1.0f);
    CHECK(d.box.h == 1.0f);
    CHECK(d.objectness == 0.5f);
    CHECK(d.class_probs[0] == 0.5f);
    CHECK(d.class_probs[1] == 0.5f);
}

TEST_CASE("candidate count is bounded by W*H*A") {
    std::mt19937 rng(2);
    Tensor fm = random_feature_map(14, 9, 35, rng);
    auto dets = decode_region(fm, {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}}, 2, 0.0f);
    CHECK(dets.size() <= 14 * 9 * 5);
    CHECK(dets.size() == 14 * 9 * 5);  // threshold 0 keeps everything

    for (const auto& d : dets) {
        CHECK(d.box.cx >= 0.0f);
        CHECK(d.box.cx <= 1.0f);
        CHECK(d.box.w > 0.0f);
        float sum = 0.0f;
        for (float p : d.class_probs) sum += p;
        CHECK(sum == doctest::Approx(1.0f).epsilon(1e-5));
    }
}

TEST_CASE("decoder matches the scalar reference bit-exactly") {
    std::mt19937 rng(3);
    struct Head {
        int w, h, c, classes;
        std::vector<std::array<float, 2>> anchors;
    };
    const std::vector<Head> heads = {
        {14, 9, 35, 2, {{1.32f, 1.73f}, {3.19f, 4.01f}, {5.06f, 8.10f}, {9.47f, 4.84f}, {11.2f, 10.0f}}},
        {13, 13, 50, 5, {{1.08f, 1.19f}, {3.42f, 4.41f}, {6.63f, 11.38f}, {9.42f, 5.11f}, {16.6f, 10.5f}}},
        {44, 16, 200, 35, {{1, 3}, {1.5f, 4.5f}, {2, 6}, {3, 8}, {4, 10}}}};

    for (const auto& head : heads) {
        CAPTURE(head.w);
        for (int trial = 0; trial < 5; ++trial) {
            Tensor fm = random_feature_map(head.w, head.h, head.c, rng);
            for (float threshold : {0.0f, 0.3f}) {
                auto fast = decode_region(fm, head.anchors, head.classes, threshold);
                auto slow = testref::decode_region(fm, head.anchors, head.classes, threshold);
                REQUIRE(fast.size() == slow.size());
                for (std::size_t i = 0; i < fast.size(); ++i) {
                    CHECK(fast[i].box.cx == slow[i].box.cx);
                    CHECK(fast[i].box.cy == slow[i].box.cy);
                    CHECK(fast[i].box.w == slow[i].box.w);
                    CHECK(fast[i].box.h == slow[i].box.h);
                    CHECK(fast[i].objectness == slow[i].objectness);
                    CHECK(fast[i].score == slow[i].score);
                    CHECK(fast[i].class_id == slow[i].class_id);
                    CHECK(fast[i].class_probs == slow[i].class_probs);
                }
            }
        }
    }
}

TEST_CASE("decode rejects a channel mismatch") {
    Tensor fm(2, 2, 8);
    CHECK_THROWS_AS(decode_region(fm, {{1.0f, 1.0f}}, 2, 0.0f), ValidationError);
}

TEST_CASE("iou") {
    BoundingBox a = corner_box(0, 0, 10, 10);
    SUBCASE("identical boxes") { CHECK(iou(a, a) == 1.0); }
    SUBCASE("disjoint boxes") {
        BoundingBox b = corner_box(20, 20, 30, 30);
        CHECK(iou(a, b) == 0.0);
    }
    SUBCASE("half-overlap corner case is 1/3") {
        BoundingBox b = corner_box(5, 0, 15, 10);
        CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("symmetry and scale invariance") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<float> u(0.05f, 1.0f);
        for (int i = 0; i < 200; ++i) {
            BoundingBox p{u(rng), u(rng), u(rng), u(rng)};
            BoundingBox q{u(rng), u(rng), u(rng), u(rng)};
            CHECK(iou(p, q) == iou(q, p));
            // boxes store float, so scaling rounds at float precision
            const float s = 4.0f;  // exact in binary: scaling is lossless
            BoundingBox ps{p.cx * s, p.cy * s, p.w * s, p.h * s};
            BoundingBox qs{q.cx * s, q.cy * s, q.w * s, q.h * s};
            CHECK(iou(ps, qs) == doctest::Approx(iou(p, q)).epsilon(1e-12));
        }
    }
}

TEST_CASE("nms") {
    SUBCASE("duplicate pair keeps the higher score") {
        std::vector<Detection> dets(2);
        dets[0].box = corner_box(0, 0, 10, 10);
        dets[0].score = 0.9f;
        dets[1].box = corner_box(0, 0, 10, 15);  // IoU 10/15 = 0.67
        dets[1].score = 0.8f;
        auto kept = nms(dets, 0.25);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].score == 0.9f);
    }
    SUBCASE("single detection unchanged") {
        std::vector<Detection> dets(1);
        dets[0].box = corner_box(0, 0, 1, 1);
        dets[0].score = 0.4f;
        CHECK(nms(dets, 0.25).size() == 1);
    }
    SUBCASE("different classes never suppress each other") {
        std::vector<Detection> dets(2);
        dets[0].box = corner_box(0, 0, 10, 10);
        dets[0].score = 0.9f;
        dets[0].class_id = 0;
        dets[1].box = corner_box(0, 0, 10, 10);
        dets[1].score = 0.8f;
        dets[1].class_id = 1;
        CHECK(nms(dets, 0.25).size() == 2);
    }
    SUBCASE("matches the exhaustive reference on random sets") {
        std::mt19937 rng(7);
        for (int trial = 0; trial < 200; ++trial) {
            auto dets = random_detections(1 + static_cast<int>(rng() % 20), 3, rng);
            for (double threshold : {0.25, 0.5}) {
                auto fast = nms(dets, threshold);
                auto slow = testref::nms(dets, threshold);
                CHECK(same_detections(fast, slow));
            }
        }
    }
    SUBCASE("retained set is permutation invariant") {
        std::mt19937 rng(9);
        for (int trial = 0; trial < 50; ++trial) {
            auto dets = random_detections(12, 2, rng);
            auto kept = nms(dets, 0.25);
            auto shuffled = dets;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            auto kept2 = nms(shuffled, 0.25);
            // same retained multiset of scores (scores are a.s. distinct)
            auto key = [](const std::vector<Detection>& v) {
                std::vector<float> s;
                for (const auto& d : v) s.push_back(d.score);
                std::sort(s.begin(), s.end());
                return s;
            };
            CHECK(key(kept) == key(kept2));
        }
    }
    SUBCASE("no two retained same-class boxes overlap at or above threshold") {
        std::mt19937 rng(13);
        auto dets = random_detections(30, 2, rng);
        auto kept = nms(dets, 0.25);
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (std::size_t j = i + 1; j < kept.size(); ++j)
                if (kept[i].class_id == kept[j].class_id)
                    CHECK(iou(kept[i].box, kept[j].box) < 0.25);
    }
}

TEST_CASE("k-means anchors") {
    SUBCASE("single cluster of identical boxes") {
        std::vector<std::array<float, 2>> boxes(4, {0.2f, 0.3f});
        auto anchors = compute_anchors(boxes, 1);
        REQUIRE(anchors.size() == 1);
        CHECK(anchors[0][0] == doctest::Approx(0.2f));
        CHECK(anchors[0][1] == doctest::Approx(0.3f));
    }
    SUBCASE("two tight clusters split exactly") {
        std::vector<std::array<float, 2>> boxes = {{0.1f, 0.1f}, {0.1f, 0.1f}, {0.1f, 0.1f},
                                                   {0.5f, 0.5f}, {0.5f, 0.5f}, {0.5f, 0.5f}};
        auto anchors = compute_anchors(boxes, 2);
        REQUIRE(anchors.size() == 2);
        CHECK(anchors[0][0] == doctest::Approx(0.1f));
        CHECK(anchors[0][1] == doctest::Approx(0.1f));
        CHECK(anchors[1][0] == doctest::Approx(0.5f));
        CHECK(anchors[1][1] == doctest::Approx(0.5f));
    }
    SUBCASE("k equal to box count returns the boxes") {
        std::vector<std::array<float, 2>> boxes = {{0.1f, 0.2f}, {0.3f, 0.1f}, {0.6f, 0.5f}};
        auto anchors = compute_anchors(boxes, 3);
        auto sorted_boxes = boxes;
        std::sort(sorted_boxes.begin(), sorted_boxes.end(), [](const auto& a, const auto& b) {
            return a[0] * a[1] < b[0] * b[1];
        });
        CHECK(anchors == sorted_boxes);
    }
    SUBCASE("errors") {
        std::vector<std::array<float, 2>> boxes = {{0.1f, 0.1f}};
        CHECK_THROWS_AS(compute_anchors({}, 1), ValidationError);
        CHECK_THROWS_AS(compute_anchors(boxes, 2), ValidationError);
    }
    SUBCASE("total cost never increases across iterations") {
        std::mt19937 rng(21);
        std::uniform_real_distribution<float> u(0.02f, 0.9f);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::array<float, 2>> boxes(40);
            for (auto& b : boxes) b = {u(rng), u(rng)};
            AnchorStats stats;
            compute_anchors(boxes, 5, 7 + trial, &stats);
            REQUIRE(stats.cost_history.size() >= 1);
            for (std::size_t i = 1; i < stats.cost_history.size(); ++i)
                CHECK(stats.cost_history[i] <= stats.cost_history[i - 1] + 1e-12);
        }
    }
    SUBCASE("deterministic under a fixed seed") {
        std::mt19937 rng(31);
        std::uniform_real_distribution<float> u(0.02f, 0.9f);
        std::vector<std::array<float, 2>> boxes(25);
        for (auto& b : boxes) b = {u(rng), u(rng)};
        CHECK(compute_anchors(boxes, 4, 42) == compute_anchors(boxes, 4, 42));
    }
}
