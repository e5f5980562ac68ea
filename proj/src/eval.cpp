#include "alpr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

std::string strip_comment(std::string line) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    return line;
}

PixelBox parse_box(std::istringstream& in, int line_number) {
    PixelBox box;
    if (!(in >> box.x >> box.y >> box.w >> box.h))
        throw ConfigError("expected box as x y w h", line_number);
    if (box.w <= 0 || box.h <= 0) throw ConfigError("box extent must be positive", line_number);
    return box;
}

std::string canonical_plate_text(std::string text, bool merge_1_I) {
    for (char& c : text) {
        if (c == 'O') c = '0';
        if (merge_1_I && c == 'I') c = '1';
    }
    return text;
}

// Fisher-Yates with a local generator; std::shuffle is not reproducible
// across standard libraries.
void deterministic_shuffle(std::vector<std::string>& items, unsigned seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(
            (static_cast<double>(rng() >> 11) * 0x1.0p-53) * i);
        std::swap(items[i - 1], items[std::min(j, i - 1)]);
    }
}

double stat_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

std::vector<AnnotationRecord> parse_annotations(std::istream& in) {
    std::vector<AnnotationRecord> records;
    std::string raw;
    int line_number = 0;
    PlateAnnotation* open_plate = nullptr;

    while (std::getline(in, raw)) {
        ++line_number;
        std::istringstream line(strip_comment(raw));
        std::string tag;
        if (!(line >> tag)) continue;

        if (tag == "image") {
            AnnotationRecord rec;
            if (!(line >> rec.image_path))
                throw ConfigError("image record is missing a path", line_number);
            records.push_back(std::move(rec));
            open_plate = nullptr;
        } else if (tag == "vehicle") {
            if (records.empty()) throw ConfigError("vehicle before any image record", line_number);
            VehicleAnnotation v;
            if (!(line >> v.kind)) throw ConfigError("vehicle is missing its class", line_number);
            v.box = parse_box(line, line_number);
            records.back().vehicles.push_back(std::move(v));
            open_plate = nullptr;
        } else if (tag == "plate") {
            if (records.empty()) throw ConfigError("plate before any image record", line_number);
            PlateAnnotation p;
            if (!(line >> p.layout)) throw ConfigError("plate is missing its layout", line_number);
            p.box = parse_box(line, line_number);
            if (!(line >> p.text)) p.text.clear();
            if (records.back().vehicles.empty()) {
                records.back().standalone_plates.push_back(std::move(p));
                open_plate = &records.back().standalone_plates.back();
            } else {
                records.back().vehicles.back().plate = std::move(p);
                open_plate = &*records.back().vehicles.back().plate;
            }
        } else if (tag == "char") {
            if (!open_plate) throw ConfigError("char outside a plate record", line_number);
            CharAnnotation c;
            std::string glyph;
            if (!(line >> glyph) || glyph.size() != 1)
                throw ConfigError("char needs a single glyph", line_number);
            c.glyph = glyph[0];
            c.box = parse_box(line, line_number);
            open_plate->chars.push_back(c);
        } else {
            throw ConfigError("unknown annotation tag \"" + tag + "\"", line_number);
        }
    }
    return records;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotations file: " + path);
    return parse_annotations(in);
}

void write_annotations(const std::vector<AnnotationRecord>& records, std::ostream& out) {
    auto write_plate = [&out](const PlateAnnotation& p) {
        out << "  plate " << p.layout << " " << p.box.x << " " << p.box.y << " " << p.box.w << " "
            << p.box.h;
        if (!p.text.empty()) out << " " << p.text;
        out << "\n";
        for (const auto& c : p.chars)
            out << "    char " << c.glyph << " " << c.box.x << " " << c.box.y << " " << c.box.w
                << " " << c.box.h << "\n";
    };
    for (const auto& rec : records) {
        out << "image " << rec.image_path << "\n";
        for (const auto& v : rec.vehicles) {
            out << "  vehicle " << v.kind << " " << v.box.x << " " << v.box.y << " " << v.box.w
                << " " << v.box.h << "\n";
            if (v.plate) write_plate(*v.plate);
        }
        for (const auto& p : rec.standalone_plates) write_plate(p);
    }
}

void save_annotations(const std::vector<AnnotationRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write annotations file: " + path);
    write_annotations(records, out);
}

double precision(const MatchCounts& counts) {
    return stat_or_zero(counts.tp, counts.tp + counts.fp);
}

double recall(const MatchCounts& counts) {
    return stat_or_zero(counts.tp, counts.tp + counts.fn);
}

double pixel_iou(const PixelBox& a, const PixelBox& b) {
    const double ix0 = std::max(a.x, b.x);
    const double iy0 = std::max(a.y, b.y);
    const double ix1 = std::min(a.x + a.w, b.x + b.w);
    const double iy1 = std::min(a.y + a.h, b.y + b.h);
    if (ix1 <= ix0 || iy1 <= iy0) return 0.0;
    const double inter = (ix1 - ix0) * (iy1 - iy0);
    const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

MatchCounts match_detections(const std::vector<ScoredBox>& predictions,
                             const std::vector<TruthBox>& ground_truth, double iou_threshold) {
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (predictions[a].score != predictions[b].score)
            return predictions[a].score > predictions[b].score;
        return a < b;
    });

    std::vector<bool> matched(ground_truth.size(), false);
    MatchCounts counts;
    for (std::size_t idx : order) {
        const ScoredBox& p = predictions[idx];
        double best_iou = iou_threshold;  // strict: must exceed
        int best = -1;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            if (matched[g] || ground_truth[g].cls != p.cls) continue;
            double v = pixel_iou(p.box, ground_truth[g].box);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0) {
            matched[best] = true;
            ++counts.tp;
        } else {
            ++counts.fp;
        }
    }
    counts.fn = static_cast<int>(ground_truth.size()) - counts.tp;
    return counts;
}

double recognition_rate(const std::vector<std::pair<std::string, std::string>>& results,
                        bool merge_1_I) {
    if (results.empty()) throw ValidationError("recognition rate over an empty result list");
    int correct = 0;
    for (const auto& [predicted, truth] : results)
        if (canonical_plate_text(predicted, merge_1_I) == canonical_plate_text(truth, merge_1_I))
            ++correct;
    return static_cast<double>(correct) / results.size();
}

RunStats aggregate_runs(const std::vector<double>& per_run_values) {
    if (per_run_values.empty()) throw ValidationError("cannot aggregate zero runs");
    RunStats stats;
    stats.mean = std::accumulate(per_run_values.begin(), per_run_values.end(), 0.0) /
                 per_run_values.size();
    if (per_run_values.size() > 1) {
        double ss = 0.0;
        for (double v : per_run_values) ss += (v - stats.mean) * (v - stats.mean);
        stats.stddev = std::sqrt(ss / (per_run_values.size() - 1));
    }
    return stats;
}

SplitResult split_dataset(const std::vector<std::string>& manifest, const SplitProtocol& protocol,
                          unsigned seed) {
    if (manifest.empty()) throw ValidationError("cannot split an empty manifest");

    if (protocol.kind == SplitKind::Fixed) {
        std::set<std::string> known(manifest.begin(), manifest.end());
        SplitResult result{protocol.train_list, protocol.validation_list, protocol.test_list};
        for (const auto* list : {&result.train, &result.validation, &result.test})
            for (const auto& item : *list)
                if (!known.count(item))
                    throw ValidationError("fixed split references missing image: " + item);
        return result;
    }

    const double sum = protocol.train + protocol.validation + protocol.test;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("split ratios must sum to 1");

    std::vector<std::string> pool = manifest;
    deterministic_shuffle(pool, seed);

    // largest-remainder apportionment keeps the partition exhaustive
    const std::size_t n = pool.size();
    double shares[3] = {protocol.train * n, protocol.validation * n, protocol.test * n};
    std::size_t sizes[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        sizes[i] = static_cast<std::size_t>(shares[i]);
        assigned += sizes[i];
    }
    while (assigned < n) {
        int best = 0;
        double best_frac = -1.0;
        for (int i = 0; i < 3; ++i) {
            double frac = shares[i] - static_cast<double>(sizes[i]);
            if (frac > best_frac) {
                best_frac = frac;
                best = i;
            }
        }
        ++sizes[best];
        ++assigned;
    }

    SplitResult result;
    auto it = pool.begin();
    result.train.assign(it, it + sizes[0]);
    it += sizes[0];
    result.validation.assign(it, it + sizes[1]);
    it += sizes[1];
    result.test.assign(it, it + sizes[2]);
    return result;
}

RunMetrics evaluate_end_to_end(const std::map<std::string, ImageResult>& results,
                               const std::vector<AnnotationRecord>& annotations,
                               const EvalOptions& options) {
    std::vector<std::string> missing;
    for (const auto& rec : annotations)
        if (!results.count(rec.image_path)) missing.push_back(rec.image_path);
    if (!missing.empty()) {
        std::string msg = "results missing for annotated images:";
        for (const auto& m : missing) msg += " " + m;
        throw ValidationError(msg);
    }

    MatchCounts vehicle_counts;
    int lp_tp = 0, lp_fp = 0, lp_fn = 0;
    int plates_total = 0, plates_correct = 0;

    for (const auto& rec : annotations) {
        const ImageResult& res = results.at(rec.image_path);

        // vehicle stage (class-aware: car vs motorcycle)
        std::vector<ScoredBox> vehicle_preds;
        for (const auto& r : res.results)
            vehicle_preds.push_back({to_pixel_box(r.vehicle.box, res.width, res.height),
                                     r.vehicle.kind == VehicleKind::Motorcycle ? 1 : 0,
                                     r.vehicle.score});
        std::vector<TruthBox> vehicle_truth;
        for (const auto& v : rec.vehicles)
            vehicle_truth.push_back({v.box, v.kind == "motorcycle" ? 1 : 0});
        MatchCounts vc = match_detections(vehicle_preds, vehicle_truth, options.iou_threshold);
        vehicle_counts.tp += vc.tp;
        vehicle_counts.fp += vc.fp;
        vehicle_counts.fn += vc.fn;

        // LP stage: box must match; layout must match unless predicted
        // undefined, which is assessed on the box alone
        struct GtPlate {
            const PlateAnnotation* plate;
            bool matched = false;
        };
        std::vector<GtPlate> gt_plates;
        for (const auto& v : rec.vehicles)
            if (v.plate) gt_plates.push_back({&*v.plate});
        plates_total += static_cast<int>(gt_plates.size());

        std::vector<const PlateResult*> plate_preds;
        for (const auto& r : res.results)
            if (r.plate) plate_preds.push_back(&r);
        std::sort(plate_preds.begin(), plate_preds.end(),
                  [](const PlateResult* a, const PlateResult* b) {
                      return a->plate->score > b->plate->score;
                  });

        for (const PlateResult* pred : plate_preds) {
            PixelBox pred_box = to_pixel_box(pred->plate_box_image, res.width, res.height);
            double best_iou = options.iou_threshold;
            GtPlate* best = nullptr;
            for (auto& gt : gt_plates) {
                if (gt.matched) continue;
                double v = pixel_iou(pred_box, gt.plate->box);
                if (v > best_iou) {
                    best_iou = v;
                    best = &gt;
                }
            }
            bool layout_ok = best && (pred->plate->layout == "undefined" ||
                                      pred->plate->layout == best->plate->layout);
            if (best && layout_ok) {
                best->matched = true;
                ++lp_tp;
                if (canonical_plate_text(pred->text, options.merge_1_I) ==
                    canonical_plate_text(best->plate->text, options.merge_1_I))
                    ++plates_correct;
            } else {
                ++lp_fp;
            }
        }
        for (const auto& gt : gt_plates)
            if (!gt.matched) ++lp_fn;
    }

    RunMetrics metrics;
    metrics.vehicle_precision = precision(vehicle_counts);
    metrics.vehicle_recall = recall(vehicle_counts);
    metrics.lp_precision = stat_or_zero(lp_tp, lp_tp + lp_fp);
    metrics.lp_recall = stat_or_zero(lp_tp, lp_tp + lp_fn);
    metrics.recognition = stat_or_zero(plates_correct, plates_total);
    metrics.vehicles_total = vehicle_counts.tp + vehicle_counts.fn;
    metrics.plates_total = plates_total;
    return metrics;
}

EvalReport aggregate_reports(const std::vector<RunMetrics>& runs, bool weighted) {
    if (runs.empty()) throw ValidationError("cannot aggregate zero runs");
    EvalReport report;
    report.runs = runs;

    const std::pair<double RunMetrics::*, int RunMetrics::*> fields[] = {
        {&RunMetrics::vehicle_precision, &RunMetrics::vehicles_total},
        {&RunMetrics::vehicle_recall, &RunMetrics::vehicles_total},
        {&RunMetrics::lp_precision, &RunMetrics::plates_total},
        {&RunMetrics::lp_recall, &RunMetrics::plates_total},
        {&RunMetrics::recognition, &RunMetrics::plates_total}};
    for (auto [field, count_field] : fields) {
        std::vector<double> values;
        values.reserve(runs.size());
        for (const auto& r : runs) values.push_back(r.*field);
        RunStats s = aggregate_runs(values);
        report.stddev.*field = s.stddev;
        if (weighted) {
            double num = 0.0, den = 0.0;
            for (const auto& r : runs) {
                num += r.*field * (r.*count_field);
                den += r.*count_field;
            }
            report.mean.*field = den > 0.0 ? num / den : s.mean;
        } else {
            report.mean.*field = s.mean;
        }
    }
    for (const auto& r : runs) {
        report.mean.vehicles_total += r.vehicles_total;
        report.mean.plates_total += r.plates_total;
    }
    return report;
}

}  // namespace alpr
