#pragma once

#include <vector>

#include "alpr/image.hpp"
#include "alpr/model.hpp"
#include "alpr/tensor.hpp"

namespace alpr {

// Full forward pass; returns one output tensor per layer, following
// model.shape_trace. Pure in (model, input); safe to call concurrently
// against one shared model.
std::vector<Tensor> forward(const NetworkModel& model, const Tensor& input);

// RGB raster -> float tensor in [0,1], bilinear-resized to the target dims
// (plain resize, no letterboxing).
Tensor preprocess(const Image& image, int target_w, int target_h);

}  // namespace alpr
