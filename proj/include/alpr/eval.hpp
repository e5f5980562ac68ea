#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alpr/augment.hpp"
#include "alpr/image.hpp"
#include "alpr/pipeline.hpp"

namespace alpr {

struct PlateAnnotation {
    std::string layout;
    PixelBox box;  // image pixels
    std::string text;
    std::vector<CharAnnotation> chars;
};

struct VehicleAnnotation {
    std::string kind;  // car | motorcycle
    PixelBox box;
    std::optional<PlateAnnotation> plate;
};

// One record per image. Plate-only corpora (augmentation manifests) use
// standalone_plates with boxes in patch coordinates.
struct AnnotationRecord {
    std::string image_path;
    std::vector<VehicleAnnotation> vehicles;
    std::vector<PlateAnnotation> standalone_plates;
};

std::vector<AnnotationRecord> parse_annotations(std::istream& in);
std::vector<AnnotationRecord> load_annotations(const std::string& path);
void write_annotations(const std::vector<AnnotationRecord>& records, std::ostream& out);
void save_annotations(const std::vector<AnnotationRecord>& records, const std::string& path);

struct MatchCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

double precision(const MatchCounts& counts);
double recall(const MatchCounts& counts);

struct ScoredBox {
    PixelBox box;
    int cls = 0;
    float score = 0.0f;
};

struct TruthBox {
    PixelBox box;
    int cls = 0;
};

// Greedy matching in descending prediction score; a prediction is a true
// positive iff its IoU with some unmatched same-class ground truth exceeds
// the threshold. Each ground truth matches at most once.
MatchCounts match_detections(const std::vector<ScoredBox>& predictions,
                             const std::vector<TruthBox>& ground_truth,
                             double iou_threshold = 0.5);

double pixel_iou(const PixelBox& a, const PixelBox& b);

// Exact-string recognition rate; merge_1_I folds 'I' into '1' on both sides
// before comparing (Brazilian-dataset evaluation rule).
double recognition_rate(const std::vector<std::pair<std::string, std::string>>& results,
                        bool merge_1_I = false);

struct RunStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, n-1 denominator
};

RunStats aggregate_runs(const std::vector<double>& per_run_values);

enum class SplitKind { Ratio, Fixed };

struct SplitProtocol {
    SplitKind kind = SplitKind::Ratio;
    double train = 0.4;
    double validation = 0.2;
    double test = 0.4;
    std::vector<std::string> train_list;
    std::vector<std::string> validation_list;
    std::vector<std::string> test_list;
};

struct SplitResult {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

// Disjoint and exhaustive; deterministic under seed. Ratio protocols use
// largest-remainder rounding so sizes depend only on the ratios.
SplitResult split_dataset(const std::vector<std::string>& manifest, const SplitProtocol& protocol,
                          unsigned seed);

struct EvalOptions {
    bool merge_1_I = false;
    double iou_threshold = 0.5;
};

struct RunMetrics {
    double vehicle_precision = 0.0;
    double vehicle_recall = 0.0;
    double lp_precision = 0.0;
    double lp_recall = 0.0;
    double recognition = 0.0;
    // sample sizes, carried so dataset averages can optionally be weighted
    int vehicles_total = 0;
    int plates_total = 0;
};

// Scores one run against its annotations. LP-stage correctness is IoU above
// threshold AND (layout match OR predicted layout undefined); recognition is
// exact-text over all annotated plates.
RunMetrics evaluate_end_to_end(const std::map<std::string, ImageResult>& results,
                               const std::vector<AnnotationRecord>& annotations,
                               const EvalOptions& options = {});

struct EvalReport {
    std::vector<RunMetrics> runs;
    RunMetrics mean;
    RunMetrics stddev;
};

// Unweighted per-run mean by default; `weighted` weights vehicle metrics by
// vehicles_total and LP/recognition metrics by plates_total (stddev stays
// unweighted).
EvalReport aggregate_reports(const std::vector<RunMetrics>& runs, bool weighted = false);

}  // namespace alpr
