#include "alpr/results_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

using nlohmann::json;

json box_to_json(const BoundingBox& b) { return json::array({b.cx, b.cy, b.w, b.h}); }

BoundingBox box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw IoError("malformed box in results record");
    return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>(), j[3].get<float>()};
}

}  // namespace

std::string result_record_json(const ImageResult& record, bool include_timings) {
    json j;
    j["image"] = record.image_path;
    j["width"] = record.width;
    j["height"] = record.height;
    j["status"] = record.results.empty() ? "negative" : "ok";

    json vehicles = json::array();
    for (const auto& r : record.results) {
        json v;
        v["kind"] = vehicle_kind_name(r.vehicle.kind);
        v["score"] = r.vehicle.score;
        v["box"] = box_to_json(r.vehicle.box);
        if (r.plate) {
            json p;
            p["layout"] = r.plate->layout;
            p["score"] = r.plate->score;
            p["box"] = box_to_json(r.plate->box);
            p["box_image"] = box_to_json(r.plate_box_image);
            p["text"] = r.text;
            json chars = json::array();
            for (const auto& c : r.characters) {
                json cj;
                cj["glyph"] = std::string(1, c.glyph);
                cj["score"] = c.score;
                cj["box"] = box_to_json(c.box);
                chars.push_back(cj);
            }
            p["chars"] = chars;
            v["plate"] = p;
        }
        vehicles.push_back(v);
    }
    j["vehicles"] = vehicles;

    if (include_timings) {
        j["timings_ms"] = {{"vehicle", record.timings.vehicle_ms},
                           {"lp", record.timings.lp_ms},
                           {"recognition", record.timings.recognition_ms},
                           {"total", record.timings.total_ms}};
    }
    return j.dump();
}

void write_result_record(std::ostream& out, const ImageResult& record, bool include_timings) {
    out << result_record_json(record, include_timings) << "\n";
}

std::vector<ImageResult> read_results(std::istream& in) {
    std::vector<ImageResult> records;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IoError("results line " + std::to_string(line_number) + ": " + e.what());
        }

        ImageResult rec;
        rec.image_path = j.at("image").get<std::string>();
        rec.width = j.at("width").get<int>();
        rec.height = j.at("height").get<int>();
        for (const auto& v : j.at("vehicles")) {
            PlateResult r;
            r.vehicle.kind = v.at("kind").get<std::string>() == "motorcycle"
                                 ? VehicleKind::Motorcycle
                                 : VehicleKind::Car;
            r.vehicle.score = v.at("score").get<float>();
            r.vehicle.box = box_from_json(v.at("box"));
            if (v.contains("plate")) {
                const auto& p = v.at("plate");
                PlateDetection plate;
                plate.layout = p.at("layout").get<std::string>();
                plate.score = p.at("score").get<float>();
                plate.box = box_from_json(p.at("box"));
                r.plate = plate;
                r.plate_box_image = box_from_json(p.at("box_image"));
                r.text = p.at("text").get<std::string>();
                for (const auto& cj : p.at("chars")) {
                    CharDetection c;
                    std::string glyph = cj.at("glyph").get<std::string>();
                    c.glyph = glyph.empty() ? '?' : glyph[0];
                    c.score = cj.at("score").get<float>();
                    c.box = box_from_json(cj.at("box"));
                    r.characters.push_back(c);
                }
            }
            rec.results.push_back(std::move(r));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ImageResult> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file: " + path);
    return read_results(in);
}

}  // namespace alpr
