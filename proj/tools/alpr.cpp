#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "alpr/augment.hpp"
#include "alpr/errors.hpp"
#include "alpr/eval.hpp"
#include "alpr/inference.hpp"
#include "alpr/layout.hpp"
#include "alpr/model.hpp"
#include "alpr/pipeline.hpp"
#include "alpr/results_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitModelError = 3;
constexpr int kExitIoError = 4;
constexpr int kExitValidationError = 5;

struct ModelPaths {
    std::string vehicle_cfg, vehicle_weights;
    std::string lp_cfg, lp_weights;
    std::string cr_cfg, cr_weights;
};

std::string default_model_path(const char* name) {
    const char* dir = std::getenv("ALPR_MODEL_DIR");
    if (!dir) return "";
    return (fs::path(dir) / name).string();
}

void add_model_options(CLI::App* cmd, ModelPaths& paths) {
    paths.vehicle_cfg = default_model_path("vehicle.cfg");
    paths.vehicle_weights = default_model_path("vehicle.weights");
    paths.lp_cfg = default_model_path("lp.cfg");
    paths.lp_weights = default_model_path("lp.weights");
    paths.cr_cfg = default_model_path("crnet.cfg");
    paths.cr_weights = default_model_path("crnet.weights");
    cmd->add_option("--vehicle-cfg", paths.vehicle_cfg, "vehicle detector config");
    cmd->add_option("--vehicle-weights", paths.vehicle_weights, "vehicle detector weights");
    cmd->add_option("--lp-cfg", paths.lp_cfg, "LP detector config");
    cmd->add_option("--lp-weights", paths.lp_weights, "LP detector weights");
    cmd->add_option("--cr-cfg", paths.cr_cfg, "character recognizer config");
    cmd->add_option("--cr-weights", paths.cr_weights, "character recognizer weights");
}

alpr::PipelineModels load_models(const ModelPaths& paths) {
    alpr::PipelineModels models;
    models.vehicle =
        alpr::load_weights_file(alpr::parse_config_file(paths.vehicle_cfg), paths.vehicle_weights);
    models.lp = alpr::load_weights_file(alpr::parse_config_file(paths.lp_cfg), paths.lp_weights);
    models.crnet =
        alpr::load_weights_file(alpr::parse_config_file(paths.cr_cfg), paths.cr_weights);
    return models;
}

struct ThresholdFlags {
    double vehicle = 0.25;
    double layout = 0.75;
    double char_thresh = -1.0;     // <0: keep rule-set values
    double char_thresh_eu = -1.0;
    double nms_iou = 0.25;
    std::string rules_path;
};

void add_threshold_options(CLI::App* cmd, ThresholdFlags& flags) {
    cmd->add_option("--vehicle-thresh", flags.vehicle, "vehicle confidence threshold");
    cmd->add_option("--layout-thresh", flags.layout, "layout confidence threshold");
    cmd->add_option("--char-thresh", flags.char_thresh,
                    "character confidence threshold (non-European layouts)");
    cmd->add_option("--char-thresh-eu", flags.char_thresh_eu,
                    "character confidence threshold for the European layout");
    cmd->add_option("--nms-iou", flags.nms_iou, "NMS IoU threshold");
    cmd->add_option("--rules", flags.rules_path, "layout rules file");
}

alpr::PipelineConfig make_pipeline_config(const ThresholdFlags& flags) {
    alpr::PipelineConfig config;
    config.vehicle_threshold = static_cast<float>(flags.vehicle);
    config.layout_threshold = static_cast<float>(flags.layout);
    config.nms_iou = flags.nms_iou;
    if (!flags.rules_path.empty()) config.rules = alpr::load_rulesets(flags.rules_path);
    for (auto& [name, rules] : config.rules) {
        if (name == "european") {
            if (flags.char_thresh_eu >= 0.0)
                rules.char_conf_threshold = static_cast<float>(flags.char_thresh_eu);
        } else if (flags.char_thresh >= 0.0) {
            rules.char_conf_threshold = static_cast<float>(flags.char_thresh);
        }
    }
    return config;
}

std::vector<std::string> collect_images(const std::string& input) {
    if (fs::is_directory(input)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(input)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".rgb")
                files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
        return files;
    }
    return {input};
}

void draw_overlay(alpr::Image& image, const std::vector<alpr::PlateResult>& results) {
    for (const auto& r : results) {
        alpr::draw_box(image, alpr::to_pixel_box(r.vehicle.box, image.width, image.height),
                       64, 160, 255);
        if (!r.plate) continue;
        alpr::PixelBox lp = alpr::to_pixel_box(r.plate_box_image, image.width, image.height);
        alpr::draw_box(image, lp, 255, 80, 80);
        for (const auto& c : r.characters) {
            alpr::PixelBox cb = alpr::to_pixel_box(c.box, lp.w, lp.h);
            cb.x += lp.x;
            cb.y += lp.y;
            alpr::draw_box(image, cb, 80, 255, 80, 1);
        }
    }
}

// ---------------------------------------------------------------------------
// inspect

int cmd_inspect(const std::string& config_path) {
    alpr::NetworkModel model = alpr::parse_config_file(config_path);
    alpr::BflopReport bflops = alpr::compute_bflops(model);

    std::cout << "input " << model.input_width << " x " << model.input_height << " x "
              << model.input_channels << "\n";
    std::cout << std::left << std::setw(4) << "#" << std::setw(14) << "layer" << std::setw(9)
              << "filters" << std::setw(10) << "size" << std::setw(20) << "input" << std::setw(20)
              << "output" << "bflop\n";
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const alpr::LayerSpec& l = model.layers[i];
        alpr::Shape in = model.input_shape_of(static_cast<int>(i));
        alpr::Shape out = model.shape_trace[i];
        std::ostringstream size_col, in_col, out_col;
        if (l.kind == alpr::LayerKind::Conv || l.kind == alpr::LayerKind::MaxPool)
            size_col << l.size << "x" << l.size << "/" << l.stride;
        else if (l.kind == alpr::LayerKind::Reorg)
            size_col << "/" << l.stride;
        else if (l.kind == alpr::LayerKind::Route) {
            for (std::size_t s = 0; s < l.route_sources.size(); ++s)
                size_col << (s ? "," : "[") << l.route_sources[s];
            size_col << "]";
        }
        in_col << in.w << "x" << in.h << "x" << in.c;
        out_col << out.w << "x" << out.h << "x" << out.c;
        std::cout << std::left << std::setw(4) << i << std::setw(14) << layer_kind_name(l.kind)
                  << std::setw(9) << (l.kind == alpr::LayerKind::Conv ? std::to_string(l.filters) : "")
                  << std::setw(10) << size_col.str() << std::setw(20) << in_col.str()
                  << std::setw(20) << out_col.str() << std::fixed << std::setprecision(3)
                  << bflops.per_layer[i] << "\n";
    }
    std::cout << "total " << std::fixed << std::setprecision(2) << bflops.total << " BFLOPs\n";
    return 0;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const std::string& input, const ModelPaths& paths, const ThresholdFlags& flags,
            const std::string& out_path, const std::string& timing_path,
            const std::string& overlay_dir, int workers) {
    alpr::PipelineModels models = load_models(paths);
    alpr::PipelineConfig config = make_pipeline_config(flags);
    std::vector<std::string> images = collect_images(input);
    if (images.empty()) throw alpr::IoError("no images found under " + input);
    if (!overlay_dir.empty()) fs::create_directories(overlay_dir);

    std::vector<alpr::ImageResult> records(images.size());
    std::vector<std::string> errors(images.size());

    workers = std::max(1, workers);
    std::size_t next_index = 0;
    std::mutex mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mutex);
                if (next_index >= images.size()) return;
                i = next_index++;
            }
            try {
                alpr::Image image = alpr::load_image(images[i]);
                alpr::PipelineOutput out = alpr::run_pipeline(image, models, config);
                records[i] = {images[i], image.width, image.height, std::move(out.results),
                              out.timings};
                if (!overlay_dir.empty()) {
                    draw_overlay(image, records[i].results);
                    fs::path name = fs::path(images[i]).filename();
                    if (name.extension() == ".rgb") name.replace_extension(".png");
                    alpr::save_image(image, (fs::path(overlay_dir) / name).string());
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < images.size(); ++i)
        if (!errors[i].empty())
            throw alpr::IoError("failed on " + images[i] + ": " + errors[i]);

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        out_file.open(out_path);
        if (!out_file) throw alpr::IoError("cannot write results file: " + out_path);
        out = &out_file;
    }
    // records are written in input order; timings go to the sidecar so the
    // results file is identical across repeated runs
    for (const auto& rec : records) alpr::write_result_record(*out, rec);

    if (!timing_path.empty()) {
        std::ofstream timing(timing_path);
        if (!timing) throw alpr::IoError("cannot write timing file: " + timing_path);
        for (const auto& rec : records) {
            json j = {{"image", rec.image_path},
                      {"vehicle_ms", rec.timings.vehicle_ms},
                      {"lp_ms", rec.timings.lp_ms},
                      {"recognition_ms", rec.timings.recognition_ms},
                      {"total_ms", rec.timings.total_ms},
                      {"vehicles", rec.timings.vehicles}};
            timing << j.dump() << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

void print_metrics_line(const std::string& label, const alpr::RunMetrics& m,
                        const alpr::RunMetrics* stddev = nullptr) {
    auto cell = [&](double mean, double sd) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << mean;
        if (stddev) s << " +/- " << std::setprecision(4) << sd;
        return s.str();
    };
    std::cout << std::left << std::setw(10) << label << " vehicle P/R " << std::setw(24)
              << cell(m.vehicle_precision, stddev ? stddev->vehicle_precision : 0) << " LP P/R "
              << std::setw(24) << cell(m.lp_precision, stddev ? stddev->lp_precision : 0)
              << " recognition " << cell(m.recognition, stddev ? stddev->recognition : 0) << "\n";
}

alpr::RunMetrics eval_one_run(const std::string& results_path, const std::string& annotations_path,
                              const alpr::EvalOptions& options) {
    std::map<std::string, alpr::ImageResult> by_image;
    for (auto& rec : alpr::load_results(results_path)) by_image[rec.image_path] = std::move(rec);
    return alpr::evaluate_end_to_end(by_image, alpr::load_annotations(annotations_path), options);
}

int cmd_eval(const std::string& results_path, const std::string& annotations_path,
             const std::string& runs_manifest, bool merge_1_I, bool weighted,
             const std::string& out_path) {
    alpr::EvalOptions options;
    options.merge_1_I = merge_1_I;

    std::vector<alpr::RunMetrics> runs;
    if (!runs_manifest.empty()) {
        std::ifstream manifest(runs_manifest);
        if (!manifest) throw alpr::IoError("cannot open runs manifest: " + runs_manifest);
        std::string line;
        while (std::getline(manifest, line)) {
            std::istringstream fields(line);
            std::string run_results, run_annotations;
            if (!(fields >> run_results)) continue;
            if (!(fields >> run_annotations)) run_annotations = annotations_path;
            runs.push_back(eval_one_run(run_results, run_annotations, options));
        }
        if (runs.empty()) throw alpr::ValidationError("runs manifest lists no runs");
    } else {
        runs.push_back(eval_one_run(results_path, annotations_path, options));
    }

    alpr::EvalReport report = alpr::aggregate_reports(runs, weighted);
    for (std::size_t i = 0; i < report.runs.size(); ++i)
        print_metrics_line("run " + std::to_string(i + 1), report.runs[i]);
    print_metrics_line("mean", report.mean, &report.stddev);

    if (!out_path.empty()) {
        json j;
        auto metrics_json = [](const alpr::RunMetrics& m) {
            return json{{"vehicle_precision", m.vehicle_precision},
                        {"vehicle_recall", m.vehicle_recall},
                        {"lp_precision", m.lp_precision},
                        {"lp_recall", m.lp_recall},
                        {"recognition", m.recognition}};
        };
        j["runs"] = json::array();
        for (const auto& r : report.runs) j["runs"].push_back(metrics_json(r));
        j["mean"] = metrics_json(report.mean);
        j["stddev"] = metrics_json(report.stddev);
        std::ofstream out(out_path);
        if (!out) throw alpr::IoError("cannot write report: " + out_path);
        out << j.dump(2) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct StageSample {
    double mean_ms = 0.0;
    double stddev_ms = 0.0;
};

template <typename Fn>
StageSample time_stage(Fn&& fn, int reps, int warmup) {
    for (int i = 0; i < warmup; ++i) fn();
    std::vector<double> samples;
    samples.reserve(reps);
    for (int i = 0; i < reps; ++i) {
        auto start = std::chrono::steady_clock::now();
        fn();
        samples.push_back(
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count());
    }
    alpr::RunStats stats = alpr::aggregate_runs(samples);
    return {stats.mean, stats.stddev};
}

int cmd_bench(const std::string& image_path, const ModelPaths& paths, const ThresholdFlags& flags,
              const std::vector<int>& sweep, int reps, int warmup) {
    alpr::PipelineModels models = load_models(paths);
    alpr::PipelineConfig config = make_pipeline_config(flags);
    alpr::Image image = alpr::load_image(image_path);

    // Representative stage inputs: the first detected vehicle when there is
    // one, otherwise the frame itself; LP patch from detection or a centered
    // crop at the canonical aspect ratio.
    alpr::Image vehicle_patch = image;
    auto vehicles = alpr::detect_vehicles(image, models.vehicle, config);
    if (!vehicles.empty()) {
        alpr::PixelBox box = alpr::clamp_to_image(
            alpr::to_pixel_box(vehicles.front().box, image.width, image.height), image.width,
            image.height);
        if (box.w > 0 && box.h > 0) vehicle_patch = alpr::crop_with_fill(image, box);
    }
    alpr::Image lp_patch;
    auto plate = alpr::detect_plate(vehicle_patch, models.lp, config);
    if (plate) {
        lp_patch = alpr::enlarge_patch(
            vehicle_patch, alpr::to_pixel_box(plate->box, vehicle_patch.width, vehicle_patch.height),
            config.enlarge_target_ratio, config.enlarge_band_low, config.enlarge_band_high);
    } else {
        int h = std::max(8, vehicle_patch.height / 4);
        int w = static_cast<int>(h * config.enlarge_target_ratio);
        lp_patch = alpr::crop_with_fill(vehicle_patch, {(vehicle_patch.width - w) / 2,
                                                        (vehicle_patch.height - h) / 2, w, h});
    }
    const alpr::LayoutRuleSet& rules = config.rules.at("undefined");

    StageSample vehicle_t = time_stage(
        [&] { alpr::detect_vehicles(image, models.vehicle, config); }, reps, warmup);
    StageSample lp_t = time_stage(
        [&] { alpr::detect_plate(vehicle_patch, models.lp, config); }, reps, warmup);
    StageSample rec_t = time_stage(
        [&] { alpr::recognize_plate(lp_patch, models.crnet, rules, alpr::VehicleKind::Car,
                                    config.nms_iou); },
        reps, warmup);

    auto fps = [](double ms) { return ms > 0.0 ? 1000.0 / ms : 0.0; };
    auto stem = [](const std::string& p) { return fs::path(p).stem().string(); };
    std::cout << std::left << std::setw(26) << "stage" << std::setw(16) << "model"
              << std::setw(14) << "time (ms)" << std::setw(14) << "stddev (ms)" << "fps\n";
    std::cout << std::fixed << std::setprecision(3);
    std::cout << std::left << std::setw(26) << "vehicle detection" << std::setw(16)
              << stem(paths.vehicle_cfg) << std::setw(14) << vehicle_t.mean_ms << std::setw(14)
              << vehicle_t.stddev_ms << std::setprecision(1) << fps(vehicle_t.mean_ms) << "\n"
              << std::setprecision(3);
    std::cout << std::left << std::setw(26) << "lp detection + layout" << std::setw(16)
              << stem(paths.lp_cfg) << std::setw(14) << lp_t.mean_ms << std::setw(14)
              << lp_t.stddev_ms << std::setprecision(1) << fps(lp_t.mean_ms) << "\n"
              << std::setprecision(3);
    std::cout << std::left << std::setw(26) << "lp recognition" << std::setw(16)
              << stem(paths.cr_cfg) << std::setw(14) << rec_t.mean_ms << std::setw(14)
              << rec_t.stddev_ms << std::setprecision(1) << fps(rec_t.mean_ms) << "\n"
              << std::setprecision(3);
    double end_to_end = vehicle_t.mean_ms + lp_t.mean_ms + rec_t.mean_ms;
    std::cout << std::left << std::setw(26) << "end-to-end" << std::setw(16) << "-"
              << std::setw(14) << end_to_end << std::setw(14) << "-" << std::setprecision(1)
              << fps(end_to_end) << "\n\n" << std::setprecision(3);

    std::cout << std::left << std::setw(12) << "vehicles" << std::setw(14) << "time (ms)"
              << "fps\n";
    for (int n : sweep) {
        double total = vehicle_t.mean_ms + n * (lp_t.mean_ms + rec_t.mean_ms);
        std::cout << std::left << std::setw(12) << n << std::setw(14) << total
                  << std::setprecision(1) << fps(total) << "\n" << std::setprecision(3);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// augment

alpr::AnnotatedPlate load_plate(const alpr::AnnotationRecord& rec, const fs::path& base) {
    const alpr::PlateAnnotation* plate = nullptr;
    if (!rec.standalone_plates.empty()) plate = &rec.standalone_plates.front();
    else if (!rec.vehicles.empty() && rec.vehicles.front().plate)
        plate = &*rec.vehicles.front().plate;
    if (!plate)
        throw alpr::ValidationError("manifest record has no plate entry: " + rec.image_path);

    alpr::AnnotatedPlate out;
    fs::path image_path = rec.image_path;
    if (image_path.is_relative()) image_path = base / image_path;
    alpr::Image raster = alpr::load_image(image_path.string());
    out.layout = plate->layout;

    alpr::PixelBox box = alpr::clamp_to_image(plate->box, raster.width, raster.height);
    if (box.w <= 0 || box.h <= 0)
        throw alpr::ValidationError("plate box empty after clamping: " + rec.image_path);
    // records may annotate the plate inside a larger frame; crop to the patch
    out.raster = (box == alpr::PixelBox{0, 0, raster.width, raster.height})
                     ? std::move(raster)
                     : alpr::crop_with_fill(raster, box);
    for (auto c : plate->chars) {
        c.box.x -= box.x;
        c.box.y -= box.y;
        c.box = alpr::clamp_to_image(c.box, out.raster.width, out.raster.height);
        if (c.box.w > 0 && c.box.h > 0) out.chars.push_back(c);
    }
    return out;
}

int cmd_augment(const std::string& manifest_path, const std::string& mode, int count,
                std::uint64_t seed, const std::string& out_dir) {
    auto records = alpr::load_annotations(manifest_path);
    if (records.empty()) throw alpr::ValidationError("manifest lists no plates");
    fs::path base = fs::path(manifest_path).parent_path();
    fs::create_directories(out_dir);

    std::vector<alpr::AnnotatedPlate> corpus;
    corpus.reserve(records.size());
    for (const auto& rec : records) corpus.push_back(load_plate(rec, base));

    std::optional<alpr::CharacterPermuter> permuter;
    if (mode == "permute") permuter.emplace(corpus);

    std::vector<alpr::AnnotationRecord> out_records;
    auto emit = [&](const alpr::AnnotatedPlate& plate, const std::string& name) {
        std::string file = name + ".png";
        alpr::save_image(plate.raster, (fs::path(out_dir) / file).string());
        alpr::AnnotationRecord rec;
        rec.image_path = file;
        alpr::PlateAnnotation p;
        p.layout = plate.layout;
        p.box = {0, 0, plate.raster.width, plate.raster.height};
        for (const auto& c : plate.chars) {
            p.text += c.glyph;
            p.chars.push_back(c);
        }
        rec.standalone_plates.push_back(std::move(p));
        out_records.push_back(std::move(rec));
    };

    int variants = mode == "negative" ? 1 : std::max(1, count);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (int v = 0; v < variants; ++v) {
            std::uint64_t item_seed = seed + i * 1000003ull + v;
            std::string name = "aug_" + mode + "_" + std::to_string(i) + "_" + std::to_string(v);
            if (mode == "negative") emit(alpr::negative_image(corpus[i]), name);
            else if (mode == "permute") emit(permuter->permute(corpus[i], item_seed), name);
            else if (mode == "jitter") emit(alpr::jitter(corpus[i], item_seed), name);
            else if (mode == "rescale") emit(alpr::rescale_margin(corpus[i], item_seed), name);
            else throw alpr::ValidationError("unknown augmentation mode: " + mode);
        }
    }

    alpr::save_annotations(out_records, (fs::path(out_dir) / "manifest.txt").string());
    std::cout << "wrote " << out_records.size() << " plates to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layout-aware license plate recognition toolkit"};
    app.require_subcommand(1);

    // inspect
    std::string inspect_config;
    CLI::App* inspect = app.add_subcommand("inspect", "print layer shapes and BFLOP counts");
    inspect->add_option("config", inspect_config, "network config file")->required();

    // run
    std::string run_input, run_out, run_timing, run_overlay;
    int run_workers = 1;
    ModelPaths run_models;
    ThresholdFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "detect and recognize plates");
    run->add_option("input", run_input, "image file or directory")->required();
    add_model_options(run, run_models);
    add_threshold_options(run, run_flags);
    run->add_option("--out", run_out, "results file (JSON lines); stdout when absent");
    run->add_option("--timing-out", run_timing, "per-image stage timings sidecar");
    run->add_option("--overlay", run_overlay, "directory for overlay renderings");
    run->add_option("--workers", run_workers, "concurrent images");

    // eval
    std::string eval_results, eval_annotations, eval_runs, eval_out;
    bool eval_merge = false, eval_weighted = false;
    CLI::App* eval = app.add_subcommand("eval", "score results against annotations");
    eval->add_option("--results", eval_results, "results file from `run`");
    eval->add_option("--annotations", eval_annotations, "ground-truth annotations");
    eval->add_option("--runs", eval_runs, "manifest: one `results [annotations]` line per run");
    eval->add_flag("--merge-1i", eval_merge, "score '1' and 'I' as a single class");
    eval->add_flag("--weighted", eval_weighted, "weight the mean by per-run sample counts");
    eval->add_option("--out", eval_out, "write the report as JSON");

    // bench
    std::string bench_image;
    std::vector<int> bench_sweep = {1, 2, 3, 4, 5};
    int bench_reps = 10, bench_warmup = 2;
    ModelPaths bench_models;
    ThresholdFlags bench_flags;
    CLI::App* bench = app.add_subcommand("bench", "per-stage timing table");
    bench->add_option("image", bench_image, "benchmark image")->required();
    add_model_options(bench, bench_models);
    add_threshold_options(bench, bench_flags);
    bench->add_option("--sweep", bench_sweep, "vehicle counts for the sweep table");
    bench->add_option("--reps", bench_reps, "timed repetitions per stage");
    bench->add_option("--warmup", bench_warmup, "untimed warmup repetitions");

    // augment
    std::string aug_manifest, aug_mode, aug_out = "augmented";
    int aug_count = 1;
    std::uint64_t aug_seed = 1;
    CLI::App* augment = app.add_subcommand("augment", "generate corpus variants");
    augment->add_option("--manifest", aug_manifest, "plate corpus manifest")->required();
    augment->add_option("--mode", aug_mode, "permute | negative | jitter | rescale")->required();
    augment->add_option("--count", aug_count, "variants per plate");
    augment->add_option("--seed", aug_seed, "rng seed");
    augment->add_option("--out", aug_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (inspect->parsed()) return cmd_inspect(inspect_config);
        if (run->parsed())
            return cmd_run(run_input, run_models, run_flags, run_out, run_timing, run_overlay,
                           run_workers);
        if (eval->parsed()) {
            if (eval_runs.empty() && (eval_results.empty() || eval_annotations.empty()))
                throw alpr::ValidationError("eval needs --results and --annotations, or --runs");
            return cmd_eval(eval_results, eval_annotations, eval_runs, eval_merge, eval_weighted,
                            eval_out);
        }
        if (bench->parsed())
            return cmd_bench(bench_image, bench_models, bench_flags, bench_sweep, bench_reps,
                             bench_warmup);
        if (augment->parsed())
            return cmd_augment(aug_manifest, aug_mode, aug_count, aug_seed, aug_out);
    } catch (const alpr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const alpr::WeightsError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModelError;
    } catch (const alpr::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const alpr::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidationError;
    }
    return 0;
}
