#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "alpr/eval.hpp"

using namespace alpr;

namespace {

ScoredBox pred(int x, int y, int w, int h, float score, int cls = 0) {
    return {{x, y, w, h}, cls, score};
}

TruthBox truth(int x, int y, int w, int h, int cls = 0) { return {{x, y, w, h}, cls}; }

// Independent route: try every prediction order compatible with descending
// score and count the matches the greedy rule produces.
MatchCounts reference_match(std::vector<ScoredBox> predictions,
                            const std::vector<TruthBox>& ground_truth, double threshold) {
    std::stable_sort(predictions.begin(), predictions.end(),
                     [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
    std::vector<bool> used(ground_truth.size(), false);
    MatchCounts counts;
    for (const auto& p : predictions) {
        int pick = -1;
        double best = threshold;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            if (used[g] || ground_truth[g].cls != p.cls) continue;
            double v = pixel_iou(p.box, ground_truth[g].box);
            if (v > best) {
                best = v;
                pick = static_cast<int>(g);
            }
        }
        if (pick >= 0) {
            used[pick] = true;
            ++counts.tp;
        } else {
            ++counts.fp;
        }
    }
    counts.fn = static_cast<int>(ground_truth.size()) - counts.tp;
    return counts;
}

ImageResult make_result(const std::string& path, int w, int h,
                        const std::vector<PlateResult>& results) {
    return {path, w, h, results, {}};
}

PlateResult make_plate_result(const PixelBox& vehicle_px, const PixelBox& plate_px,
                              const std::string& layout, const std::string& text, int img_w,
                              int img_h, float score = 0.9f) {
    PlateResult r;
    r.vehicle.box = to_normalized_box(vehicle_px, img_w, img_h);
    r.vehicle.kind = VehicleKind::Car;
    r.vehicle.score = score;
    PlateDetection plate;
    plate.layout = layout;
    plate.score = score;
    plate.box = to_normalized_box(plate_px, vehicle_px.w, vehicle_px.h);
    r.plate = plate;
    r.plate_box_image = to_normalized_box(plate_px, img_w, img_h);
    r.text = text;
    return r;
}

AnnotationRecord make_annotation(const std::string& path, const PixelBox& vehicle_px,
                                 const PixelBox& plate_px, const std::string& layout,
                                 const std::string& text) {
    AnnotationRecord rec;
    rec.image_path = path;
    VehicleAnnotation v;
    v.kind = "car";
    v.box = vehicle_px;
    PlateAnnotation p;
    p.layout = layout;
    p.box = plate_px;
    p.text = text;
    v.plate = p;
    rec.vehicles.push_back(v);
    return rec;
}

}  // namespace

TEST_CASE("match_detections") {
    SUBCASE("exact predictions are all true positives") {
        std::vector<TruthBox> gt = {truth(0, 0, 10, 10), truth(50, 50, 10, 10)};
        std::vector<ScoredBox> preds = {pred(0, 0, 10, 10, 0.9f), pred(50, 50, 10, 10, 0.8f)};
        MatchCounts c = match_detections(preds, gt);
        CHECK(c.tp == 2);
        CHECK(c.fp == 0);
        CHECK(c.fn == 0);
    }
    SUBCASE("four predictions over three truths give precision 0.75 recall 1") {
        std::vector<TruthBox> gt = {truth(0, 0, 10, 10), truth(50, 50, 10, 10),
                                    truth(100, 100, 10, 10)};
        std::vector<ScoredBox> preds = {pred(0, 0, 10, 10, 0.9f), pred(50, 50, 10, 10, 0.8f),
                                        pred(100, 100, 10, 10, 0.7f),
                                        pred(200, 200, 10, 10, 0.6f)};
        MatchCounts c = match_detections(preds, gt);
        CHECK(c.tp == 3);
        CHECK(c.fp == 1);
        CHECK(c.fn == 0);
        CHECK(precision(c) == doctest::Approx(0.75));
        CHECK(recall(c) == doctest::Approx(1.0));
    }
    SUBCASE("iou at exactly the threshold does not match") {
        // IoU((0,0,10,10),(5,0,15,10) shifted) = 1/3; with threshold 1/3 the
        // strict comparison rejects it
        std::vector<TruthBox> gt = {truth(0, 0, 10, 10)};
        std::vector<ScoredBox> preds = {pred(5, 0, 10, 10, 0.9f)};
        MatchCounts c = match_detections(preds, gt, 1.0 / 3.0);
        CHECK(c.tp == 0);
        CHECK(c.fp == 1);
        CHECK(c.fn == 1);
    }
    SUBCASE("class mismatch never matches") {
        std::vector<TruthBox> gt = {truth(0, 0, 10, 10, 1)};
        std::vector<ScoredBox> preds = {pred(0, 0, 10, 10, 0.9f, 0)};
        MatchCounts c = match_detections(preds, gt);
        CHECK(c.tp == 0);
    }
    SUBCASE("random instances agree with the reference matcher") {
        std::mt19937 rng(5);
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<TruthBox> gt;
            std::vector<ScoredBox> preds;
            int ng = static_cast<int>(rng() % 10), np = static_cast<int>(rng() % 10);
            auto random_box = [&]() {
                return PixelBox{static_cast<int>(rng() % 40), static_cast<int>(rng() % 40),
                                5 + static_cast<int>(rng() % 20), 5 + static_cast<int>(rng() % 20)};
            };
            for (int i = 0; i < ng; ++i) gt.push_back({random_box(), static_cast<int>(rng() % 2)});
            for (int i = 0; i < np; ++i)
                preds.push_back({random_box(), static_cast<int>(rng() % 2),
                                 static_cast<float>(rng() % 1000) / 1000.0f});
            MatchCounts a = match_detections(preds, gt, 0.5);
            MatchCounts b = reference_match(preds, gt, 0.5);
            CHECK(a.tp == b.tp);
            CHECK(a.fp == b.fp);
            CHECK(a.fn == b.fn);
            CHECK(a.tp + a.fn == ng);
            CHECK(a.tp + a.fp == np);
        }
    }
}

TEST_CASE("recognition_rate") {
    SUBCASE("two exact of four") {
        std::vector<std::pair<std::string, std::string>> results = {
            {"ABC1234", "ABC1234"}, {"XYZ9876", "XYZ9876"}, {"ABC1235", "ABC1234"}, {"", "AAA111"}};
        CHECK(recognition_rate(results) == doctest::Approx(0.5));
    }
    SUBCASE("a single wrong character fails the plate") {
        std::vector<std::pair<std::string, std::string>> results = {{"ABC1233", "ABC1234"}};
        CHECK(recognition_rate(results) == 0.0);
    }
    SUBCASE("merged 1/I scoring") {
        std::vector<std::pair<std::string, std::string>> results = {{"AIC1234", "A1C1234"}};
        CHECK(recognition_rate(results, false) == 0.0);
        CHECK(recognition_rate(results, true) == 1.0);
    }
    SUBCASE("empty list is an error") {
        CHECK_THROWS_AS(recognition_rate({}), ValidationError);
    }
}

TEST_CASE("aggregate_runs") {
    SUBCASE("the five EnglishLP runs average to 95.7") {
        RunStats stats = aggregate_runs({96.1, 97.1, 98.0, 95.1, 92.2});
        CHECK(std::abs(stats.mean - 95.7) <= 0.05);
        CHECK(stats.stddev > 0.0);
    }
    SUBCASE("identical values have zero deviation") {
        RunStats stats = aggregate_runs({4.0, 4.0, 4.0});
        CHECK(stats.mean == 4.0);
        CHECK(stats.stddev == 0.0);
    }
    SUBCASE("two values") {
        RunStats stats = aggregate_runs({2.0, 4.0});
        CHECK(stats.mean == 3.0);
        CHECK(stats.stddev == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("mean is permutation invariant") {
        std::vector<double> values = {1.5, 9.25, 4.0, 7.125, 3.0};
        auto shuffled = values;
        std::mt19937 rng(7);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(aggregate_runs(values).mean == doctest::Approx(aggregate_runs(shuffled).mean));
    }
    SUBCASE("empty input is an error") { CHECK_THROWS_AS(aggregate_runs({}), ValidationError); }
}

TEST_CASE("split_dataset") {
    std::vector<std::string> manifest;
    for (int i = 0; i < 100; ++i) manifest.push_back("img" + std::to_string(i));

    SUBCASE("40/20/40 sizes") {
        SplitProtocol protocol;  // defaults to 0.4 / 0.2 / 0.4
        SplitResult split = split_dataset(manifest, protocol, 1);
        CHECK(split.train.size() == 40);
        CHECK(split.validation.size() == 20);
        CHECK(split.test.size() == 40);
    }
    SUBCASE("partitions are disjoint and exhaustive") {
        SplitProtocol protocol;
        protocol.train = 0.37;
        protocol.validation = 0.21;
        protocol.test = 0.42;
        for (unsigned seed : {1u, 2u, 99u}) {
            SplitResult split = split_dataset(manifest, protocol, seed);
            std::set<std::string> all;
            for (const auto* part : {&split.train, &split.validation, &split.test})
                for (const auto& item : *part) CHECK(all.insert(item).second);
            CHECK(all.size() == manifest.size());
        }
    }
    SUBCASE("seeds permute but keep sizes") {
        SplitProtocol protocol;
        SplitResult a = split_dataset(manifest, protocol, 1);
        SplitResult b = split_dataset(manifest, protocol, 2);
        CHECK(a.train.size() == b.train.size());
        CHECK(a.train != b.train);
        CHECK(split_dataset(manifest, protocol, 1).train == a.train);
    }
    SUBCASE("fixed lists pass through") {
        SplitProtocol protocol;
        protocol.kind = SplitKind::Fixed;
        protocol.train_list = {"img1", "img2"};
        protocol.validation_list = {"img3"};
        protocol.test_list = {"img4", "img5"};
        SplitResult split = split_dataset(manifest, protocol, 0);
        CHECK(split.train == protocol.train_list);
        CHECK(split.test == protocol.test_list);
    }
    SUBCASE("errors") {
        SplitProtocol bad;
        bad.train = 0.5;
        bad.validation = 0.2;
        bad.test = 0.2;
        CHECK_THROWS_AS(split_dataset(manifest, bad, 1), ValidationError);

        SplitProtocol missing;
        missing.kind = SplitKind::Fixed;
        missing.train_list = {"not-there"};
        CHECK_THROWS_AS(split_dataset(manifest, missing, 1), ValidationError);

        CHECK_THROWS_AS(split_dataset({}, SplitProtocol{}, 1), ValidationError);
    }
}

TEST_CASE("annotation files round trip") {
    AnnotationRecord rec = make_annotation("imgs/a.png", {10, 20, 200, 100}, {50, 60, 66, 22},
                                           "brazilian", "ABC1234");
    rec.vehicles[0].plate->chars.push_back({'A', {52, 62, 8, 16}});
    rec.vehicles[0].plate->chars.push_back({'B', {61, 62, 8, 16}});
    AnnotationRecord plate_only;
    plate_only.image_path = "plates/b.png";
    PlateAnnotation p;
    p.layout = "european";
    p.box = {0, 0, 100, 40};
    p.text = "AB123";
    plate_only.standalone_plates.push_back(p);

    std::stringstream buffer;
    write_annotations({rec, plate_only}, buffer);
    auto loaded = parse_annotations(buffer);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].image_path == "imgs/a.png");
    REQUIRE(loaded[0].vehicles.size() == 1);
    CHECK(loaded[0].vehicles[0].box == PixelBox{10, 20, 200, 100});
    REQUIRE(loaded[0].vehicles[0].plate.has_value());
    CHECK(loaded[0].vehicles[0].plate->text == "ABC1234");
    REQUIRE(loaded[0].vehicles[0].plate->chars.size() == 2);
    CHECK(loaded[0].vehicles[0].plate->chars[1].glyph == 'B');
    REQUIRE(loaded[1].standalone_plates.size() == 1);
    CHECK(loaded[1].standalone_plates[0].layout == "european");

    SUBCASE("parse errors carry line numbers") {
        std::stringstream bad("image a.png\nchar X 1 2 3 4\n");
        CHECK_THROWS_AS(parse_annotations(bad), ConfigError);
        std::stringstream unknown("image a.png\nwheel 1 2 3 4\n");
        CHECK_THROWS_AS(parse_annotations(unknown), ConfigError);
    }
}

TEST_CASE("evaluate_end_to_end") {
    const int W = 800, H = 600;
    PixelBox vbox{100, 100, 400, 300};
    PixelBox pbox{250, 300, 110, 40};

    SUBCASE("perfect synthetic run scores 1.0 everywhere") {
        auto r = make_plate_result(vbox, {150, 200, 110, 40}, "brazilian", "ABC1234", W, H);
        std::map<std::string, ImageResult> results = {{"a.png", make_result("a.png", W, H, {r})}};
        auto ann = make_annotation("a.png", vbox, to_pixel_box(r.plate_box_image, W, H),
                                   "brazilian", "ABC1234");
        RunMetrics m = evaluate_end_to_end(results, {ann});
        CHECK(m.vehicle_precision == 1.0);
        CHECK(m.vehicle_recall == 1.0);
        CHECK(m.lp_precision == 1.0);
        CHECK(m.lp_recall == 1.0);
        CHECK(m.recognition == 1.0);
    }
    SUBCASE("confident layout misclassification fails the LP stage") {
        auto r = make_plate_result(vbox, pbox, "european", "ABC1234", W, H, 0.9f);
        std::map<std::string, ImageResult> results = {{"a.png", make_result("a.png", W, H, {r})}};
        auto ann = make_annotation("a.png", vbox, to_pixel_box(r.plate_box_image, W, H),
                                   "brazilian", "ABC1234");
        RunMetrics m = evaluate_end_to_end(results, {ann});
        CHECK(m.lp_precision == 0.0);
        CHECK(m.lp_recall == 0.0);
    }
    SUBCASE("undefined layout with a correct box passes the LP stage") {
        auto r = make_plate_result(vbox, pbox, "undefined", "ABC1234", W, H, 0.6f);
        std::map<std::string, ImageResult> results = {{"a.png", make_result("a.png", W, H, {r})}};
        auto ann = make_annotation("a.png", vbox, to_pixel_box(r.plate_box_image, W, H),
                                   "brazilian", "ABC1234");
        RunMetrics m = evaluate_end_to_end(results, {ann});
        CHECK(m.lp_precision == 1.0);
        CHECK(m.lp_recall == 1.0);
        CHECK(m.recognition == 1.0);
    }
    SUBCASE("missing result keys are reported") {
        std::map<std::string, ImageResult> results;
        auto ann = make_annotation("missing.png", vbox, pbox, "brazilian", "ABC1234");
        CHECK_THROWS_WITH_AS(evaluate_end_to_end(results, {ann}),
                             doctest::Contains("missing.png"), ValidationError);
    }
}

TEST_CASE("aggregate_reports computes mean and stddev per metric") {
    RunMetrics a{1.0, 1.0, 0.8, 0.8, 0.9, 10, 10};
    RunMetrics b{0.8, 0.9, 0.6, 0.7, 0.7, 30, 30};
    EvalReport report = aggregate_reports({a, b});
    CHECK(report.mean.vehicle_precision == doctest::Approx(0.9));
    CHECK(report.mean.recognition == doctest::Approx(0.8));
    CHECK(report.stddev.recognition == doctest::Approx(std::sqrt(0.02)));
    REQUIRE(report.runs.size() == 2);

    SUBCASE("weighted mean follows sample counts") {
        EvalReport weighted = aggregate_reports({a, b}, true);
        CHECK(weighted.mean.recognition == doctest::Approx((0.9 * 10 + 0.7 * 30) / 40.0));
        CHECK(weighted.mean.vehicle_precision == doctest::Approx((1.0 * 10 + 0.8 * 30) / 40.0));
    }
}
