#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "alpr/errors.hpp"

namespace alpr {

enum class LayerKind { Conv, MaxPool, Route, Reorg, Region };
enum class Activation { Leaky, Linear };

const char* layer_kind_name(LayerKind kind);

struct LayerSpec {
    LayerKind kind = LayerKind::Conv;

    // conv
    int filters = 0;
    int size = 0;  // kernel for conv, window for maxpool
    int stride = 1;
    bool pad = false;
    bool batch_normalize = false;
    Activation activation = Activation::Leaky;

    // route: absolute source layer indices, in listed order
    std::vector<int> route_sources;

    // region
    std::vector<std::array<float, 2>> anchors;  // (w, h) in grid cells
    int num_anchors = 0;
    int classes = 0;
};

struct Shape {
    int w = 0;
    int h = 0;
    int c = 0;
    bool operator==(const Shape&) const = default;
};

// Parameter block for one convolutional layer, in weight-file order.
struct ConvWeights {
    std::vector<float> biases;
    std::vector<float> bn_scales;
    std::vector<float> bn_means;
    std::vector<float> bn_vars;
    std::vector<float> kernel;  // (filter, channel, row, col)
};

// Immutable after parsing/loading; safe to share across threads read-only.
struct NetworkModel {
    int input_width = 0;
    int input_height = 0;
    int input_channels = 0;
    std::vector<LayerSpec> layers;
    std::vector<Shape> shape_trace;     // output shape per layer
    std::vector<ConvWeights> weights;   // parallel to layers, empty for non-conv
    bool has_weights = false;

    Shape input_shape_of(int layer_index) const;
    // Index of the terminal region layer, or -1 when the network has none.
    int region_layer_index() const;
};

NetworkModel parse_config(const std::string& text);
NetworkModel parse_config_file(const std::string& path);

// Canonical text that parse_config maps back to an identical layer list.
std::string serialize_config(const NetworkModel& model);

// Little-endian binary: int32 major/minor/revision, uint64 images-seen,
// then per conv layer: biases, (scales, means, vars when BN), kernel.
NetworkModel load_weights(NetworkModel model, std::istream& in);
NetworkModel load_weights_file(NetworkModel model, const std::string& path);
void write_weights(const NetworkModel& model, std::ostream& out);
void write_weights_file(const NetworkModel& model, const std::string& path);

struct BflopReport {
    std::vector<double> per_layer;
    double total = 0.0;
};

BflopReport compute_bflops(const NetworkModel& model);

}  // namespace alpr
