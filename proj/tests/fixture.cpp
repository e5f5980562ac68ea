#include "fixture.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "alpr/layout.hpp"

namespace fixture {

namespace {

// (r, g) centroid for an alphabet class, in u8 channel units
void class_color(int class_id, int& r, int& g) {
    r = 5 * (class_id % 6);
    g = 5 * (class_id / 6);
}

std::string head_config(int width, int height, int filters, int classes, int num,
                        const std::vector<std::array<float, 2>>& anchors) {
    std::ostringstream cfg;
    cfg << "[net]\nwidth=" << width << "\nheight=" << height << "\nchannels=3\n\n"
        << "[convolutional]\nfilters=" << filters
        << "\nsize=1\nstride=1\npad=1\nactivation=linear\n\n"
        << "[region]\nanchors=";
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (i) cfg << ", ";
        cfg << anchors[i][0] << "," << anchors[i][1];
    }
    cfg << "\nnum=" << num << "\nclasses=" << classes << "\n";
    return cfg.str();
}

}  // namespace

alpr::NetworkModel make_tiny_head(int width, int height, int classes, int num_anchors,
                                  const std::vector<std::array<float, 2>>& anchors,
                                  const std::vector<float>& kernel,
                                  const std::vector<float>& biases) {
    const int filters = (classes + 5) * num_anchors;
    alpr::NetworkModel model =
        alpr::parse_config(head_config(width, height, filters, classes, num_anchors, anchors));
    model.weights[0].biases = biases;
    model.weights[0].kernel = kernel;
    model.has_weights = true;
    return model;
}

EndToEnd make_end_to_end() {
    EndToEnd fx;

    // --- scene -------------------------------------------------------------
    alpr::Image img(128, 64, 255);
    // vehicle body
    for (int y = 11; y < 52; ++y)
        for (int x = 33; x < 94; ++x) img.set(x, y, 200, 200, 200);
    // plate with a dark border
    for (int y = 26; y < 37; ++y)
        for (int x = 43; x < 76; ++x) {
            bool border = y == 26 || y == 36 || x == 43 || x == 75;
            if (border) img.set(x, y, 40, 40, 40);
            else img.set(x, y, 235, 235, 235);
        }
    // character strokes: dark 3x9 blocks, one per slot
    const int char_cols[7] = {3, 7, 11, 15, 19, 23, 27};
    for (int col : char_cols)
        for (int y = 1; y < 10; ++y)
            for (int x = col - 1; x <= col + 1; ++x) img.set(43 + x, 26 + y, 30, 30, 30);
    // beacons: vehicle (red), plate (green), characters (blue family)
    img.set(63, 31, 255, 0, 0);
    img.set(59, 31, 0, 255, 0);
    for (int i = 0; i < 7; ++i) {
        int cls = alpr::class_from_glyph(fx.plate_text[i]);
        int r = 0, g = 0;
        class_color(cls, r, g);
        img.set(43 + char_cols[i], 31, static_cast<std::uint8_t>(r),
                static_cast<std::uint8_t>(g), 255);
    }
    fx.scene = std::move(img);

    // --- vehicle head: fires on pure red, class car ------------------------
    {
        std::vector<float> kernel(7 * 3, 0.0f);
        std::vector<float> biases(7, 0.0f);
        kernel[4 * 3 + 0] = 40.0f;   // objectness: R - G - B
        kernel[4 * 3 + 1] = -40.0f;
        kernel[4 * 3 + 2] = -40.0f;
        biases[4] = -20.0f;
        kernel[5 * 3 + 0] = 10.0f;   // car logit
        kernel[5 * 3 + 1] = -10.0f;
        kernel[5 * 3 + 2] = -10.0f;
        biases[5] = -5.0f;
        biases[6] = -5.0f;           // motorcycle logit
        fx.vehicle = make_tiny_head(128, 64, 2, 1, {{61.0f, 41.0f}}, kernel, biases);
    }

    // --- LP head: fires on green (strongly) and cyan (weakly) --------------
    {
        std::vector<float> kernel(10 * 3, 0.0f);
        std::vector<float> biases(10, 0.0f);
        kernel[4 * 3 + 0] = -40.0f;  // objectness: sigma(20) on green, 0.5 on cyan
        kernel[4 * 3 + 1] = 40.0f;
        kernel[4 * 3 + 2] = -20.0f;
        biases[4] = -20.0f;
        for (int c = 0; c < 5; ++c) biases[5 + c] = -5.0f;
        kernel[6 * 3 + 0] = -10.0f;  // brazilian logit rides the green beacon
        kernel[6 * 3 + 1] = 10.0f;
        kernel[6 * 3 + 2] = -10.0f;
        kernel[8 * 3 + 0] = -10.0f;  // european logit rides cyan instead
        kernel[8 * 3 + 1] = -10.0f;
        kernel[8 * 3 + 2] = 20.0f;
        fx.lp = make_tiny_head(61, 41, 5, 1, {{33.0f, 11.0f}}, kernel, biases);
    }

    // --- CR head: fires on (r, g, 255), nearest-centroid class logits ------
    {
        const int classes = alpr::kAlphabetSize;
        const int filters = classes + 5;
        std::vector<float> kernel(filters * 3, 0.0f);
        std::vector<float> biases(filters, 0.0f);
        kernel[4 * 3 + 0] = -50.0f;  // objectness: B - R - G
        kernel[4 * 3 + 1] = -50.0f;
        kernel[4 * 3 + 2] = 50.0f;
        biases[4] = -20.0f;
        const float strength = 60000.0f;
        for (int c = 0; c < classes; ++c) {
            int r8 = 0, g8 = 0;
            class_color(c, r8, g8);
            float r = r8 / 255.0f, g = g8 / 255.0f;
            kernel[(5 + c) * 3 + 0] = strength * r;
            kernel[(5 + c) * 3 + 1] = strength * g;
            biases[5 + c] = -strength * (r * r + g * g) / 2.0f;
        }
        fx.crnet = make_tiny_head(33, 11, classes, 1, {{3.0f, 9.0f}}, kernel, biases);
    }

    return fx;
}

void write_files(const EndToEnd& fx, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    alpr::save_image(fx.scene, (fs::path(dir) / "scene.rgb").string());

    auto write_model = [&](const alpr::NetworkModel& model, const std::string& stem) {
        std::ofstream cfg((fs::path(dir) / (stem + ".cfg")).string());
        cfg << alpr::serialize_config(model);
        alpr::write_weights_file(model, (fs::path(dir) / (stem + ".weights")).string());
    };
    write_model(fx.vehicle, "vehicle");
    write_model(fx.lp, "lp");
    write_model(fx.crnet, "crnet");
}

}  // namespace fixture
