#include "alpr/model.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace alpr {

namespace {

struct CfgLine {
    std::string key;
    std::string value;
    int line_number = 0;
};

struct CfgSection {
    std::string kind;
    int line_number = 0;
    std::map<std::string, CfgLine> entries;

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    const CfgLine* find(const std::string& key) const {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }

    int get_int(const std::string& key, int fallback) const {
        const CfgLine* l = find(key);
        if (!l) return fallback;
        try {
            std::size_t pos = 0;
            int v = std::stoi(l->value, &pos);
            if (pos != l->value.size()) throw std::invalid_argument(l->value);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("expected integer for key \"" + key + "\", got \"" + l->value + "\"",
                              l->line_number);
        }
    }

    int require_int(const std::string& key) const {
        if (!has(key)) {
            throw ConfigError("[" + kind + "] section is missing required key \"" + key + "\"",
                              line_number);
        }
        return get_int(key, 0);
    }
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<CfgSection> tokenize(const std::string& text) {
    std::vector<CfgSection> sections;
    std::istringstream in(text);
    std::string raw;
    int line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        std::string line = raw;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_number);
            CfgSection s;
            s.kind = trim(line.substr(1, line.size() - 2));
            s.line_number = line_number;
            sections.push_back(std::move(s));
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got \"" + line + "\"", line_number);
        if (sections.empty()) throw ConfigError("key=value before any section header", line_number);
        CfgLine l;
        l.key = trim(line.substr(0, eq));
        l.value = trim(line.substr(eq + 1));
        l.line_number = line_number;
        sections.back().entries[l.key] = l;
    }
    return sections;
}

std::vector<float> parse_float_list(const CfgLine& l) {
    std::vector<float> out;
    std::string item;
    std::istringstream in(l.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stof(item));
        } catch (const std::exception&) {
            throw ConfigError("expected number in list for key \"" + l.key + "\", got \"" + item + "\"",
                              l.line_number);
        }
    }
    return out;
}

std::vector<int> parse_int_list(const CfgLine& l) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(l.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("expected integer in list for key \"" + l.key + "\", got \"" + item + "\"",
                              l.line_number);
        }
    }
    return out;
}

Shape output_shape(const LayerSpec& layer, const Shape& in,
                   const std::vector<Shape>& trace, int line_number) {
    switch (layer.kind) {
        case LayerKind::Conv: {
            int pad_px = layer.pad ? layer.size / 2 : 0;
            int ow = (in.w + 2 * pad_px - layer.size) / layer.stride + 1;
            int oh = (in.h + 2 * pad_px - layer.size) / layer.stride + 1;
            if (ow <= 0 || oh <= 0)
                throw ConfigError("convolution produces non-positive output dimension", line_number);
            return {ow, oh, layer.filters};
        }
        case LayerKind::MaxPool: {
            // Right/bottom padding of (size - 1): output is ceil(in / stride).
            int ow = (in.w - 1) / layer.stride + 1;
            int oh = (in.h - 1) / layer.stride + 1;
            return {ow, oh, in.c};
        }
        case LayerKind::Route: {
            Shape out{0, 0, 0};
            for (int src : layer.route_sources) {
                const Shape& s = trace[src];
                if (out.c == 0) {
                    out = s;
                } else {
                    if (s.w != out.w || s.h != out.h)
                        throw ConfigError("route sources have mismatched spatial dimensions", line_number);
                    out.c += s.c;
                }
            }
            return out;
        }
        case LayerKind::Reorg: {
            int s = layer.stride;
            if (in.w % s != 0 || in.h % s != 0)
                throw ConfigError("reorg stride does not divide input dimensions", line_number);
            return {in.w / s, in.h / s, in.c * s * s};
        }
        case LayerKind::Region:
            return in;
    }
    throw ConfigError("unreachable layer kind", line_number);
}

void read_exact(std::istream& in, void* dst, std::size_t bytes) {
    in.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes)
        throw WeightsError("weight stream truncated");
}

void read_floats(std::istream& in, std::vector<float>& dst, std::size_t count) {
    dst.resize(count);
    if (count > 0) read_exact(in, dst.data(), count * sizeof(float));
}

void write_floats(std::ostream& out, const std::vector<float>& src) {
    out.write(reinterpret_cast<const char*>(src.data()),
              static_cast<std::streamsize>(src.size() * sizeof(float)));
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Conv: return "convolutional";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::Route: return "route";
        case LayerKind::Reorg: return "reorg";
        case LayerKind::Region: return "region";
    }
    return "?";
}

Shape NetworkModel::input_shape_of(int layer_index) const {
    if (layer_index == 0) return {input_width, input_height, input_channels};
    return shape_trace[layer_index - 1];
}

int NetworkModel::region_layer_index() const {
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].kind == LayerKind::Region) return static_cast<int>(i);
    return -1;
}

NetworkModel parse_config(const std::string& text) {
    auto sections = tokenize(text);
    if (sections.empty()) throw ConfigError("configuration has no sections");
    if (sections.front().kind != "net")
        throw ConfigError("first section must be [net]", sections.front().line_number);

    NetworkModel model;
    const CfgSection& net = sections.front();
    model.input_width = net.require_int("width");
    model.input_height = net.require_int("height");
    model.input_channels = net.require_int("channels");
    if (model.input_width <= 0 || model.input_height <= 0 || model.input_channels <= 0)
        throw ConfigError("non-positive network input dimension", net.line_number);

    for (std::size_t si = 1; si < sections.size(); ++si) {
        const CfgSection& sec = sections[si];
        int index = static_cast<int>(model.layers.size());
        LayerSpec layer;

        if (sec.kind == "convolutional") {
            layer.kind = LayerKind::Conv;
            layer.filters = sec.require_int("filters");
            layer.size = sec.require_int("size");
            layer.stride = sec.get_int("stride", 1);
            layer.pad = sec.get_int("pad", 0) != 0;
            layer.batch_normalize = sec.get_int("batch_normalize", 0) != 0;
            if (layer.filters < 1) throw ConfigError("filters must be >= 1", sec.line_number);
            if (layer.size != 1 && layer.size != 3)
                throw ConfigError("convolution kernel must be 1 or 3", sec.line_number);
            if (layer.stride < 1) throw ConfigError("stride must be >= 1", sec.line_number);
            if (const CfgLine* act = sec.find("activation")) {
                if (act->value == "leaky") layer.activation = Activation::Leaky;
                else if (act->value == "linear") layer.activation = Activation::Linear;
                else throw ConfigError("unknown activation \"" + act->value + "\"", act->line_number);
            }
        } else if (sec.kind == "maxpool") {
            layer.kind = LayerKind::MaxPool;
            layer.size = sec.require_int("size");
            layer.stride = sec.get_int("stride", layer.size);
            if (layer.size < 1 || layer.stride < 1)
                throw ConfigError("maxpool size/stride must be >= 1", sec.line_number);
        } else if (sec.kind == "route") {
            layer.kind = LayerKind::Route;
            const CfgLine* l = sec.find("layers");
            if (!l) throw ConfigError("[route] section is missing key \"layers\"", sec.line_number);
            for (int src : parse_int_list(*l)) {
                int abs = src < 0 ? index + src : src;
                if (abs < 0 || abs >= index)
                    throw ConfigError("route to nonexistent layer " + std::to_string(src), l->line_number);
                layer.route_sources.push_back(abs);
            }
            if (layer.route_sources.empty())
                throw ConfigError("[route] lists no source layers", l->line_number);
        } else if (sec.kind == "reorg") {
            layer.kind = LayerKind::Reorg;
            layer.stride = sec.require_int("stride");
            if (layer.stride < 1) throw ConfigError("reorg stride must be >= 1", sec.line_number);
        } else if (sec.kind == "region") {
            layer.kind = LayerKind::Region;
            layer.num_anchors = sec.require_int("num");
            layer.classes = sec.require_int("classes");
            if (layer.num_anchors < 1 || layer.classes < 1)
                throw ConfigError("region num/classes must be >= 1", sec.line_number);
            const CfgLine* a = sec.find("anchors");
            if (!a) throw ConfigError("[region] section is missing key \"anchors\"", sec.line_number);
            auto values = parse_float_list(*a);
            if (static_cast<int>(values.size()) != 2 * layer.num_anchors)
                throw ConfigError("expected " + std::to_string(2 * layer.num_anchors) +
                                  " anchor values, got " + std::to_string(values.size()), a->line_number);
            for (std::size_t i = 0; i + 1 < values.size(); i += 2)
                layer.anchors.push_back({values[i], values[i + 1]});
        } else {
            throw ConfigError("unknown section kind [" + sec.kind + "]", sec.line_number);
        }

        Shape in = model.layers.empty()
                       ? Shape{model.input_width, model.input_height, model.input_channels}
                       : model.shape_trace.back();

        if (layer.kind == LayerKind::Region) {
            int expected = (layer.classes + 5) * layer.num_anchors;
            if (in.c != expected)
                throw ConfigError("layer feeding region has " + std::to_string(in.c) +
                                  " channels, expected (classes+5)*num = " + std::to_string(expected),
                                  sec.line_number);
            if (si + 1 != sections.size())
                throw ConfigError("region layer must be terminal", sec.line_number);
        }

        model.shape_trace.push_back(output_shape(layer, in, model.shape_trace, sec.line_number));
        model.layers.push_back(std::move(layer));
    }

    model.weights.resize(model.layers.size());
    return model;
}

NetworkModel parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const NetworkModel& model) {
    std::ostringstream out;
    out << "[net]\n"
        << "width=" << model.input_width << "\n"
        << "height=" << model.input_height << "\n"
        << "channels=" << model.input_channels << "\n";
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& l = model.layers[i];
        out << "\n[" << layer_kind_name(l.kind) << "]\n";
        switch (l.kind) {
            case LayerKind::Conv:
                if (l.batch_normalize) out << "batch_normalize=1\n";
                out << "filters=" << l.filters << "\n"
                    << "size=" << l.size << "\n"
                    << "stride=" << l.stride << "\n"
                    << "pad=" << (l.pad ? 1 : 0) << "\n"
                    << "activation=" << (l.activation == Activation::Leaky ? "leaky" : "linear") << "\n";
                break;
            case LayerKind::MaxPool:
                out << "size=" << l.size << "\n"
                    << "stride=" << l.stride << "\n";
                break;
            case LayerKind::Route: {
                out << "layers=";
                for (std::size_t s = 0; s < l.route_sources.size(); ++s)
                    out << (s ? "," : "") << l.route_sources[s];
                out << "\n";
                break;
            }
            case LayerKind::Reorg:
                out << "stride=" << l.stride << "\n";
                break;
            case LayerKind::Region: {
                out << "anchors=";
                for (std::size_t a = 0; a < l.anchors.size(); ++a) {
                    if (a) out << ", ";
                    out << l.anchors[a][0] << "," << l.anchors[a][1];
                }
                out << "\n"
                    << "num=" << l.num_anchors << "\n"
                    << "classes=" << l.classes << "\n";
                break;
            }
        }
    }
    return out.str();
}

NetworkModel load_weights(NetworkModel model, std::istream& in) {
    std::int32_t major = 0, minor = 0, revision = 0;
    std::uint64_t seen = 0;
    read_exact(in, &major, sizeof(major));
    read_exact(in, &minor, sizeof(minor));
    read_exact(in, &revision, sizeof(revision));
    if (major * 10 + minor < 2)
        throw WeightsError("unsupported weight file version " + std::to_string(major) + "." +
                           std::to_string(minor));
    read_exact(in, &seen, sizeof(seen));

    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& l = model.layers[i];
        if (l.kind != LayerKind::Conv) continue;
        Shape in_shape = model.input_shape_of(static_cast<int>(i));
        ConvWeights& w = model.weights[i];
        std::size_t n = static_cast<std::size_t>(l.filters);
        read_floats(in, w.biases, n);
        if (l.batch_normalize) {
            read_floats(in, w.bn_scales, n);
            read_floats(in, w.bn_means, n);
            read_floats(in, w.bn_vars, n);
        }
        read_floats(in, w.kernel, n * in_shape.c * l.size * l.size);
    }

    if (in.peek() != std::char_traits<char>::eof())
        throw WeightsError("trailing bytes after final parameter block");
    model.has_weights = true;
    return model;
}

NetworkModel load_weights_file(NetworkModel model, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weights file: " + path);
    return load_weights(std::move(model), in);
}

void write_weights(const NetworkModel& model, std::ostream& out) {
    if (!model.has_weights) throw WeightsError("model has no weights to write");
    std::int32_t major = 0, minor = 2, revision = 0;
    std::uint64_t seen = 0;
    out.write(reinterpret_cast<const char*>(&major), sizeof(major));
    out.write(reinterpret_cast<const char*>(&minor), sizeof(minor));
    out.write(reinterpret_cast<const char*>(&revision), sizeof(revision));
    out.write(reinterpret_cast<const char*>(&seen), sizeof(seen));
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (model.layers[i].kind != LayerKind::Conv) continue;
        const ConvWeights& w = model.weights[i];
        write_floats(out, w.biases);
        if (model.layers[i].batch_normalize) {
            write_floats(out, w.bn_scales);
            write_floats(out, w.bn_means);
            write_floats(out, w.bn_vars);
        }
        write_floats(out, w.kernel);
    }
}

void write_weights_file(const NetworkModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open weights file for writing: " + path);
    write_weights(model, out);
}

BflopReport compute_bflops(const NetworkModel& model) {
    BflopReport report;
    report.per_layer.reserve(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& l = model.layers[i];
        const Shape out = model.shape_trace[i];
        double flops = 0.0;
        if (l.kind == LayerKind::Conv) {
            Shape in = model.input_shape_of(static_cast<int>(i));
            // multiply + add = 2 FLOPs per MAC
            flops = 2.0 * l.size * l.size * in.c * l.filters * out.w * out.h;
        } else if (l.kind == LayerKind::MaxPool) {
            flops = static_cast<double>(out.c) * l.size * l.size * out.w * out.h;
        }
        report.per_layer.push_back(flops / 1e9);
        report.total += flops / 1e9;
    }
    return report;
}

}  // namespace alpr
