#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "alpr/pipeline.hpp"

namespace alpr {

// Line-delimited JSON, one record per image. Timings are serialized only
// when include_timings is set; the default payload is deterministic for
// identical inputs and models.
void write_result_record(std::ostream& out, const ImageResult& record,
                         bool include_timings = false);
std::string result_record_json(const ImageResult& record, bool include_timings = false);

std::vector<ImageResult> read_results(std::istream& in);
std::vector<ImageResult> load_results(const std::string& path);

}  // namespace alpr
