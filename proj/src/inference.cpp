#include "alpr/inference.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

void im2col(const Tensor& in, int kernel, int stride, int pad_px, int out_w, int out_h,
            std::vector<float>& cols) {
    const int rows = in.channels * kernel * kernel;
    cols.assign(static_cast<std::size_t>(rows) * out_w * out_h, 0.0f);
    std::size_t r = 0;
    for (int c = 0; c < in.channels; ++c) {
        for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx, ++r) {
                float* dst = cols.data() + r * out_w * out_h;
                for (int oy = 0; oy < out_h; ++oy) {
                    int iy = oy * stride + ky - pad_px;
                    if (iy < 0 || iy >= in.height) {
                        dst += out_w;
                        continue;
                    }
                    const float* src = in.data.data() + in.index(c, iy, 0);
                    for (int ox = 0; ox < out_w; ++ox) {
                        int ix = ox * stride + kx - pad_px;
                        *dst++ = (ix >= 0 && ix < in.width) ? src[ix] : 0.0f;
                    }
                }
            }
        }
    }
}

// C[M x N] = A[M x K] * B[K x N]; each output row is accumulated in fixed
// k order, so results are independent of any outer-loop scheduling.
void gemm(int m, int n, int k, const float* a, const float* b, float* c) {
    std::fill(c, c + static_cast<std::size_t>(m) * n, 0.0f);
    for (int i = 0; i < m; ++i) {
        const float* arow = a + static_cast<std::size_t>(i) * k;
        float* crow = c + static_cast<std::size_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            const float av = arow[kk];
            if (av == 0.0f) continue;
            const float* brow = b + static_cast<std::size_t>(kk) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

Tensor forward_conv(const LayerSpec& layer, const ConvWeights& w, const Tensor& in,
                    const Shape& out_shape, std::vector<float>& scratch) {
    Tensor out(out_shape.w, out_shape.h, out_shape.c);
    const int n = out_shape.w * out_shape.h;
    const int k = in.channels * layer.size * layer.size;
    const int pad_px = layer.pad ? layer.size / 2 : 0;

    const float* cols = nullptr;
    if (layer.size == 1 && layer.stride == 1 && pad_px == 0) {
        cols = in.data.data();  // 1x1/1: the input already is the column matrix
    } else {
        im2col(in, layer.size, layer.stride, pad_px, out_shape.w, out_shape.h, scratch);
        cols = scratch.data();
    }
    gemm(layer.filters, n, k, w.kernel.data(), cols, out.data.data());

    constexpr float bn_epsilon = 1e-6f;
    for (int f = 0; f < layer.filters; ++f) {
        float scale = 1.0f, shift = w.biases[f];
        if (layer.batch_normalize) {
            float inv = 1.0f / std::sqrt(w.bn_vars[f] + bn_epsilon);
            scale = w.bn_scales[f] * inv;
            shift = w.biases[f] - w.bn_scales[f] * w.bn_means[f] * inv;
        }
        float* row = out.data.data() + static_cast<std::size_t>(f) * n;
        if (layer.activation == Activation::Leaky) {
            for (int j = 0; j < n; ++j) {
                float v = row[j] * scale + shift;
                row[j] = v > 0.0f ? v : 0.1f * v;
            }
        } else {
            for (int j = 0; j < n; ++j) row[j] = row[j] * scale + shift;
        }
    }
    return out;
}

Tensor forward_maxpool(const LayerSpec& layer, const Tensor& in, const Shape& out_shape) {
    Tensor out(out_shape.w, out_shape.h, out_shape.c);
    // Window origin offset per the (size-1) padding convention; 0 for size 2,
    // so the window extends right/bottom past the input with a -inf sentinel.
    const int offset = -(layer.size - 1) / 2;
    for (int c = 0; c < in.channels; ++c) {
        for (int oy = 0; oy < out_shape.h; ++oy) {
            for (int ox = 0; ox < out_shape.w; ++ox) {
                float best = -std::numeric_limits<float>::infinity();
                for (int ky = 0; ky < layer.size; ++ky) {
                    int iy = oy * layer.stride + ky + offset;
                    if (iy < 0 || iy >= in.height) continue;
                    for (int kx = 0; kx < layer.size; ++kx) {
                        int ix = ox * layer.stride + kx + offset;
                        if (ix < 0 || ix >= in.width) continue;
                        best = std::max(best, in.at(c, iy, ix));
                    }
                }
                out.at(c, oy, ox) = best;
            }
        }
    }
    return out;
}

Tensor forward_route(const LayerSpec& layer, const std::vector<Tensor>& outputs,
                     const Shape& out_shape) {
    Tensor out(out_shape.w, out_shape.h, out_shape.c);
    std::size_t offset = 0;
    for (int src : layer.route_sources) {
        const Tensor& t = outputs[src];
        std::copy(t.data.begin(), t.data.end(), out.data.begin() + offset);
        offset += t.data.size();
    }
    return out;
}

// Space-to-depth: output channel k = offset * in_c + c reads the input at
// (x*s + offset%s, y*s + offset/s, c).
Tensor forward_reorg(const LayerSpec& layer, const Tensor& in, const Shape& out_shape) {
    Tensor out(out_shape.w, out_shape.h, out_shape.c);
    const int s = layer.stride;
    for (int k = 0; k < out_shape.c; ++k) {
        const int c = k % in.channels;
        const int offset = k / in.channels;
        const int dx = offset % s;
        const int dy = offset / s;
        for (int y = 0; y < out_shape.h; ++y)
            for (int x = 0; x < out_shape.w; ++x)
                out.at(k, y, x) = in.at(c, y * s + dy, x * s + dx);
    }
    return out;
}

}  // namespace

std::vector<Tensor> forward(const NetworkModel& model, const Tensor& input) {
    if (!model.has_weights) throw ValidationError("model has no weights loaded");
    if (input.width != model.input_width || input.height != model.input_height ||
        input.channels != model.input_channels)
        throw ValidationError("input tensor dimensions do not match network input");

    std::vector<Tensor> outputs;
    outputs.reserve(model.layers.size());
    std::vector<float> scratch;

    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& layer = model.layers[i];
        const Shape& out_shape = model.shape_trace[i];
        const Tensor& in = i == 0 ? input : outputs[i - 1];
        switch (layer.kind) {
            case LayerKind::Conv:
                outputs.push_back(forward_conv(layer, model.weights[i], in, out_shape, scratch));
                break;
            case LayerKind::MaxPool:
                outputs.push_back(forward_maxpool(layer, in, out_shape));
                break;
            case LayerKind::Route:
                outputs.push_back(forward_route(layer, outputs, out_shape));
                break;
            case LayerKind::Reorg:
                outputs.push_back(forward_reorg(layer, in, out_shape));
                break;
            case LayerKind::Region:
                outputs.push_back(in);  // raw head; decode applies the activations
                break;
        }
#ifndef NDEBUG
        for (float v : outputs.back().data) assert(std::isfinite(v));
#endif
    }
    return outputs;
}

Tensor preprocess(const Image& image, int target_w, int target_h) {
    if (image.empty()) throw ValidationError("cannot preprocess empty image");
    if (target_w <= 0 || target_h <= 0) throw ValidationError("non-positive target dimensions");

    Tensor out(target_w, target_h, 3);
    if (image.width == target_w && image.height == target_h) {
        for (int y = 0; y < target_h; ++y)
            for (int x = 0; x < target_w; ++x) {
                auto p = image.get(x, y);
                for (int c = 0; c < 3; ++c) out.at(c, y, x) = p[c] / 255.0f;
            }
        return out;
    }

    const double sx = static_cast<double>(image.width) / target_w;
    const double sy = static_cast<double>(image.height) / target_h;
    for (int y = 0; y < target_h; ++y) {
        double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height - 1));
        int y0 = static_cast<int>(fy);
        int y1 = std::min(y0 + 1, image.height - 1);
        double wy = fy - y0;
        for (int x = 0; x < target_w; ++x) {
            double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width - 1));
            int x0 = static_cast<int>(fx);
            int x1 = std::min(x0 + 1, image.width - 1);
            double wx = fx - x0;
            auto p00 = image.get(x0, y0);
            auto p10 = image.get(x1, y0);
            auto p01 = image.get(x0, y1);
            auto p11 = image.get(x1, y1);
            for (int c = 0; c < 3; ++c) {
                double v = (1 - wy) * ((1 - wx) * p00[c] + wx * p10[c]) +
                           wy * ((1 - wx) * p01[c] + wx * p11[c]);
                out.at(c, y, x) = static_cast<float>(v / 255.0);
            }
        }
    }
    return out;
}

}  // namespace alpr
