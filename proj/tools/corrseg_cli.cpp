// Command-line front end for the corrseg shared library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corrseg.h"

using json = nlohmann::ordered_json;

namespace {

struct PipelineFlags {
    std::string config_file;
    std::string provider;
    std::string clip;
    int patch_size = 0;
    std::string similarity;
    std::string mask_source;
    double pred_iou_thresh = 0.0;
    double stability_thresh = 0.0;
    int points = 0;
    bool multimask = true;
    double eps = 0.0;
    int samples = 0;
    double tau = 0.0;
    int window = 0;
    int stride = 0;
    int resize_short = 0;
    bool no_sr = false, no_vr = false, no_mc = false, no_nc = false;
    std::string classes;       // comma list or @file
    std::string plural_map;    // JSON file: {"name": ["variant", ...], ...}
    std::string background;    // JSON file: {"name": ..., "subclasses": [...]}
    std::string templates;     // JSON file: ["a photo of a {}.", ...]

    CLI::Option* multimask_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file (flags override its values)");
        cmd->add_option("--provider", provider, "live | fixture:<path>");
        cmd->add_option("--clip", clip, "backbone size: b16, l14 or h14");
        cmd->add_option("--patch-size", patch_size, "override the backbone patch size");
        cmd->add_option("--similarity", similarity,
                        "clip_qq | clip_kk | clip_vv | clip_qkqk | dino_qk | ones");
        cmd->add_option("--mask-source", mask_source, "sam | groundtruth | none");
        cmd->add_option("--pred-iou-thresh", pred_iou_thresh, "mask confidence threshold");
        cmd->add_option("--stability-thresh", stability_thresh, "mask stability threshold");
        cmd->add_option("--points", points, "prompt grid side (points x points)");
        multimask_opt = cmd->add_flag("--multimask,!--no-multimask", multimask,
                                      "three proposals per prompt point");
        cmd->add_option("--eps", eps, "region-merge neighborhood radius");
        cmd->add_option("--samples", samples, "region-merge min samples (0 disables merging)");
        cmd->add_option("--tau", tau, "attention temperature");
        cmd->add_option("--window", window, "slide window size in pixels");
        cmd->add_option("--stride", stride, "slide stride in pixels");
        cmd->add_option("--resize-short", resize_short, "resize shorter image side (0 = off)");
        cmd->add_flag("--no-sr", no_sr, "disable scope reconstruction");
        cmd->add_flag("--no-vr", no_vr, "disable value reconstruction");
        cmd->add_flag("--no-mc", no_mc, "disable segmentation map correction");
        cmd->add_flag("--no-nc", no_nc, "disable class name correction");
        cmd->add_option("--classes", classes, "comma-separated class names, or @file.json");
        cmd->add_option("--plural-map", plural_map, "JSON file with per-class plural forms");
        cmd->add_option("--background", background,
                        "JSON file with background subclasses (enables background handling)");
        cmd->add_option("--templates", templates, "JSON file with prompt templates");
    }

    json load_json_file(const std::string& path) const {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot open file: " + path);
        json j;
        f >> j;
        return j;
    }

    json build_config(const CLI::App* cmd) const {
        json cfg = json::object();
        if (!config_file.empty()) cfg = load_json_file(config_file);

        auto passed = [&](const std::string& name) { return cmd->count(name) > 0; };
        if (passed("--provider")) cfg["provider"] = provider;
        if (passed("--clip")) cfg["clip"] = clip;
        if (passed("--patch-size")) cfg["patch_size"] = patch_size;
        if (passed("--similarity")) cfg["similarity"] = similarity;
        if (passed("--mask-source")) cfg["mask_source"] = mask_source;
        if (passed("--pred-iou-thresh")) cfg["pred_iou_thresh"] = pred_iou_thresh;
        if (passed("--stability-thresh")) cfg["stability_thresh"] = stability_thresh;
        if (passed("--points")) cfg["points"] = points;
        if (multimask_opt != nullptr && multimask_opt->count() > 0) cfg["multimask"] = multimask;
        if (passed("--eps")) cfg["eps"] = eps;
        if (passed("--samples")) cfg["samples"] = samples;
        if (passed("--tau")) cfg["tau"] = tau;
        if (passed("--window")) cfg["window"] = window;
        if (passed("--stride")) cfg["stride"] = stride;
        if (passed("--resize-short")) cfg["resize_short"] = resize_short;
        if (no_sr) cfg["sr"] = false;
        if (no_vr) cfg["vr"] = false;
        if (no_mc) cfg["mc"] = false;
        if (no_nc) cfg["nc"] = false;
        if (passed("--classes")) {
            if (!classes.empty() && classes[0] == '@') {
                cfg["classes"] = load_json_file(classes.substr(1));
            } else {
                std::vector<std::string> names;
                std::stringstream ss(classes);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) names.push_back(item);
                cfg["classes"] = names;
            }
        }
        if (passed("--plural-map")) cfg["plural_map"] = load_json_file(plural_map);
        if (passed("--templates")) cfg["templates"] = load_json_file(templates);
        if (passed("--background")) {
            json b = load_json_file(background);
            b["enabled"] = b.value("enabled", true);
            cfg["background"] = b;
        }
        return cfg;
    }
};

struct ContextHandle {
    corrseg_context* ctx = nullptr;
    ~ContextHandle() { corrseg_context_destroy(ctx); }
};

int fail(const char* what, corrseg_status status, const corrseg_context* ctx) {
    std::cerr << what << " failed (" << corrseg_status_name(status)
              << "): " << corrseg_last_error(ctx) << "\n";
    return 1;
}

corrseg_context* create_context(const json& cfg) {
    char err[1024] = {0};
    corrseg_context* ctx = corrseg_context_create(cfg.dump().c_str(), err, sizeof(err));
    if (ctx == nullptr) std::cerr << "invalid configuration: " << err << "\n";
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corrseg: training-free open-vocabulary semantic segmentation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", corrseg_version());

    // segment
    auto* seg = app.add_subcommand("segment", "segment one image and write label + overlay PNGs");
    PipelineFlags seg_flags;
    std::string seg_image, seg_out;
    seg->add_option("--image", seg_image, "input image path")->required();
    seg->add_option("--out", seg_out, "output prefix (<out>.labels.png, <out>.overlay.png)")
        ->required();
    seg_flags.attach(seg);

    // eval
    auto* ev = app.add_subcommand("eval", "run a benchmark or ablation over a dataset");
    PipelineFlags ev_flags;
    std::string ev_dataset, ev_ablate, ev_out = "report";
    int ev_limit = -1;
    ev->add_option("--dataset", ev_dataset, "dataset config JSON file")->required();
    ev->add_option("--limit", ev_limit, "evaluate only the first N samples (-1 = all)");
    ev->add_option("--ablate", ev_ablate, "cumulative component ablation, e.g. sr,vr,mc,nc");
    ev->add_option("--out", ev_out, "report file prefix");
    ev_flags.attach(ev);

    // extract
    auto* ex = app.add_subcommand("extract", "record provider responses into a fixture archive");
    PipelineFlags ex_flags;
    std::string ex_image, ex_out;
    bool ex_force = false;
    ex->add_option("--image", ex_image, "input image path")->required();
    ex->add_option("--out", ex_out, "archive output directory")->required();
    ex->add_flag("--force", ex_force, "overwrite a non-empty output directory");
    ex_flags.attach(ex);

    CLI11_PARSE(app, argc, argv);

    try {
        if (seg->parsed()) {
            ContextHandle h;
            h.ctx = create_context(seg_flags.build_config(seg));
            if (h.ctx == nullptr) return 1;
            char* report = nullptr;
            const corrseg_status rc =
                corrseg_segment(h.ctx, seg_image.c_str(), seg_out.c_str(), &report);
            if (rc != CORRSEG_OK) return fail("segment", rc, h.ctx);
            const json r = json::parse(report);
            corrseg_string_free(report);
            std::cout << "wrote " << seg_out << ".labels.png and " << seg_out << ".overlay.png\n";
            std::cout << "per-class pixel share:\n";
            for (const auto& [name, share] : r["pixel_share"].items())
                std::printf("  %-24s %.4f\n", name.c_str(), share.get<double>());
            return 0;
        }

        if (ev->parsed()) {
            ContextHandle h;
            h.ctx = create_context(ev_flags.build_config(ev));
            if (h.ctx == nullptr) return 1;
            char* report = nullptr;
            const corrseg_status rc =
                corrseg_evaluate(h.ctx, ev_dataset.c_str(), ev_limit,
                                 ev_ablate.empty() ? nullptr : ev_ablate.c_str(), ev_out.c_str(),
                                 &report);
            if (rc != CORRSEG_OK) return fail("eval", rc, h.ctx);
            const json r = json::parse(report);
            corrseg_string_free(report);
            if (r.contains("rows")) {
                for (size_t i = 0; i < r["rows"].size(); ++i)
                    std::printf("row %zu: mIoU %.4f\n", i, r["rows"][i]["miou"].get<double>());
            } else {
                std::printf("mIoU %.4f over %d images\n", r["miou"].get<double>(),
                            r["images_evaluated"].get<int>());
            }
            std::cout << "wrote " << ev_out << ".report.json and " << ev_out << ".report.txt\n";
            return 0;
        }

        if (ex->parsed()) {
            ContextHandle h;
            h.ctx = create_context(ex_flags.build_config(ex));
            if (h.ctx == nullptr) return 1;
            const corrseg_status rc =
                corrseg_extract(h.ctx, ex_image.c_str(), ex_out.c_str(), ex_force ? 1 : 0);
            if (rc != CORRSEG_OK) return fail("extract", rc, h.ctx);
            std::cout << "wrote fixture archive to " << ex_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
