// Generates a small synthetic dataset plus a matching fixture archive so the
// CLI can be exercised without any model runtime:
//
//   corrseg_demo_data <output-dir>
//
// Writes images/, labels/, dataset.json, config.json and fixture/ under the
// output directory. See the README for the CLI invocations this enables.

#include <cstdio>
#include <fstream>

#include "testutil.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <output-dir>\n", argv[0]);
        return 2;
    }
    const std::string out = argv[1];

    corrseg::PipelineConfig cfg;
    cfg.patch_size = 16;
    cfg.resize_short = 0;  // demo images are already window-sized
    cfg.window = 96;
    cfg.stride = 96;
    cfg.points = 8;
    cfg.nc = false;
    cfg.templates = {"a photo of a {}."};

    std::vector<testutil::SceneSpec> specs;
    for (int i = 0; i < 3; ++i) {
        testutil::SceneSpec spec;
        spec.grid_rows = 6;
        spec.grid_cols = 6;
        spec.num_classes = 3;
        spec.feat_dim = 8;
        spec.dino_dim = 8;
        spec.seed = 42 + i;
        spec.color_salt = static_cast<uint8_t>(23 * (i + 1));
        spec.v_noise = 0.5f;
        spec.dino_noise = 0.1f;
        spec.gt_patch = testutil::band_layout(6, 6, 3);
        if (i == 1) std::reverse(spec.gt_patch.begin(), spec.gt_patch.end());
        if (i == 2)
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) spec.gt_patch[r * 6 + c] = r / 2;
        for (int b = 0; b < 3; ++b) {
            std::vector<uint8_t> pm(36, 0);
            bool any = false;
            for (int p = 0; p < 36; ++p)
                if (spec.gt_patch[p] == b) pm[p] = any = true;
            if (any) spec.proposals.push_back({pm, 0.9f, 0.9f});
        }
        specs.push_back(spec);
    }

    namespace fs = std::filesystem;
    fs::remove_all(out);
    fs::create_directories(out + "/images");
    fs::create_directories(out + "/labels");
    {
        corrseg::ArchiveWriter w(out + "/fixture");
        std::vector<std::vector<std::string>> variants = {{"sky"}, {"grass"}, {"water"}};
        testutil::record_class_embeddings(w, variants, cfg.effective_templates(), 8);
        for (size_t i = 0; i < specs.size(); ++i) {
            const auto scene = testutil::build_scene(specs[i]);
            testutil::record_scene(w, scene, specs[i], cfg);
            const std::string stem = "scene" + std::to_string(i);
            corrseg::save_rgb_png(out + "/images/" + stem + ".png", scene.image);
            corrseg::save_label_png(out + "/labels/" + stem + ".png", scene.gt);
        }
        w.finalize();
    }

    std::ofstream ds(out + "/dataset.json");
    ds << R"({
  "name": "demo",
  "root": ".",
  "classes": ["sky", "grass", "water"],
  "ignore_value": 255,
  "resize_short": 0
}
)";
    std::ofstream cf(out + "/config.json");
    cf << R"({
  "provider": "fixture:)" << out << R"(/fixture",
  "patch_size": 16,
  "resize_short": 0,
  "window": 96,
  "stride": 96,
  "points": 8,
  "nc": false,
  "templates": ["a photo of a {}."],
  "classes": ["sky", "grass", "water"]
}
)";
    std::printf("demo data written to %s\n", out.c_str());
    std::printf("  dataset config: %s/dataset.json\n", out.c_str());
    std::printf("  pipeline config: %s/config.json\n", out.c_str());
    return 0;
}
