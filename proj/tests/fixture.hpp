#pragma once

#include <array>
#include <string>
#include <vector>

#include "alpr/image.hpp"
#include "alpr/model.hpp"

// Deterministic end-to-end fixture: a rendered 128x64 scene plus three tiny
// hand-built single-conv networks whose weights respond to color beacons
// painted into the scene:
//   - pure red marks the vehicle center (one car, box 61x41 at (33,11))
//   - pure green marks the LP center (brazilian, box 33x11 at (43,26))
//   - blue-family pixels (r, g, 255) encode the seven characters "ABC1234"
//     by their (r, g) components, decoded with nearest-centroid class logits
namespace fixture {

struct EndToEnd {
    alpr::Image scene;
    alpr::NetworkModel vehicle;
    alpr::NetworkModel lp;
    alpr::NetworkModel crnet;
    std::string plate_text = "ABC1234";
    alpr::PixelBox vehicle_box{33, 11, 61, 41};
    alpr::PixelBox plate_box{43, 26, 33, 11};
};

EndToEnd make_end_to_end();

// Writes scene.rgb plus {vehicle,lp,crnet}.{cfg,weights} into dir.
void write_files(const EndToEnd& fx, const std::string& dir);

// Single 1x1-conv + region network with explicit weights; kernel is
// filters x 3 values in filter-major order.
alpr::NetworkModel make_tiny_head(int width, int height, int classes, int num_anchors,
                                  const std::vector<std::array<float, 2>>& anchors,
                                  const std::vector<float>& kernel,
                                  const std::vector<float>& biases);

}  // namespace fixture
