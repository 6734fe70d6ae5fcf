#include "corrseg/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "corrseg/prompt_templates.hpp"

using json = nlohmann::ordered_json;

namespace corrseg {

int patch_size_for_arch(const std::string& arch) {
    if (arch == "b16") return 16;
    if (arch == "l14" || arch == "h14") return 14;
    throw std::invalid_argument("unknown clip arch '" + arch + "' (expected b16, l14 or h14)");
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    require(j.is_object(), "config must be a JSON object");

    static const std::set<std::string> known = {
        "provider", "clip", "patch_size", "heads", "resize_short", "window", "stride", "similarity",
        "tau", "mask_source", "pred_iou_thresh", "stability_thresh", "points", "multimask",
        "eps", "samples", "sr", "vr", "mc", "nc", "classes", "templates", "plural_map",
        "background"};
    for (const auto& [key, value] : j.items())
        require(known.count(key) > 0, "unknown config key '" + key + "'");

    PipelineConfig c;
    if (j.contains("clip")) c.clip_arch = j["clip"].get<std::string>();
    c.patch_size = j.contains("patch_size") ? j["patch_size"].get<int>()
                                            : patch_size_for_arch(c.clip_arch);
    if (j.contains("provider")) c.provider = j["provider"].get<std::string>();
    if (j.contains("heads")) c.heads = j["heads"].get<int>();
    if (j.contains("resize_short")) c.resize_short = j["resize_short"].get<int>();
    if (j.contains("window")) c.window = j["window"].get<int>();
    if (j.contains("stride")) c.stride = j["stride"].get<int>();
    if (j.contains("similarity")) c.similarity = j["similarity"].get<std::string>();
    if (j.contains("tau")) c.tau = j["tau"].get<float>();
    if (j.contains("mask_source")) c.mask_source = j["mask_source"].get<std::string>();
    if (j.contains("pred_iou_thresh")) c.pred_iou_thresh = j["pred_iou_thresh"].get<float>();
    if (j.contains("stability_thresh")) c.stability_thresh = j["stability_thresh"].get<float>();
    if (j.contains("points")) c.points = j["points"].get<int>();
    if (j.contains("multimask")) c.multimask = j["multimask"].get<bool>();
    if (j.contains("eps")) c.eps = j["eps"].get<float>();
    if (j.contains("samples")) c.samples = j["samples"].get<int>();
    if (j.contains("sr")) c.sr = j["sr"].get<bool>();
    if (j.contains("vr")) c.vr = j["vr"].get<bool>();
    if (j.contains("mc")) c.mc = j["mc"].get<bool>();
    if (j.contains("nc")) c.nc = j["nc"].get<bool>();
    if (j.contains("classes")) c.classes = j["classes"].get<std::vector<std::string>>();
    if (j.contains("templates")) c.templates = j["templates"].get<std::vector<std::string>>();
    if (j.contains("plural_map"))
        c.plural_map = j["plural_map"].get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("background")) {
        const auto& b = j["background"];
        if (b.contains("enabled")) c.background_enabled = b["enabled"].get<bool>();
        if (b.contains("name")) c.background_name = b["name"].get<std::string>();
        if (b.contains("subclasses"))
            c.background_subclasses = b["subclasses"].get<std::vector<std::string>>();
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

namespace {
// floats echo as short decimals, not double-promoted artifacts
double echo6(float v) { return std::round(static_cast<double>(v) * 1e6) / 1e6; }
}  // namespace

std::string PipelineConfig::to_json() const {
    json j;
    j["provider"] = provider;
    j["clip"] = clip_arch;
    j["patch_size"] = patch_size;
    j["heads"] = heads;
    j["resize_short"] = resize_short;
    j["window"] = window;
    j["stride"] = stride;
    j["similarity"] = std::string(to_string(effective_similarity()));
    j["tau"] = echo6(tau);
    j["mask_source"] = mask_source;
    j["pred_iou_thresh"] = echo6(pred_iou_thresh);
    j["stability_thresh"] = echo6(stability_thresh);
    j["points"] = points;
    j["multimask"] = multimask;
    j["eps"] = echo6(eps);
    j["samples"] = samples;
    j["sr"] = sr;
    j["vr"] = vr;
    j["mc"] = mc;
    j["nc"] = nc;
    j["classes"] = classes;
    j["templates"] = effective_templates();
    j["plural_map"] = plural_map;
    j["background"] = {{"enabled", background_enabled},
                       {"name", background_name},
                       {"subclasses", background_subclasses}};
    return j.dump(2);
}

SimilaritySource PipelineConfig::effective_similarity() const {
    if (!similarity.empty()) return similarity_source_from_string(similarity);
    return vr ? SimilaritySource::dino_qk : SimilaritySource::clip_qq;
}

std::vector<std::string> PipelineConfig::effective_templates() const {
    return templates.empty() ? default_prompt_template_list() : templates;
}

void PipelineConfig::validate() const {
    patch_size_for_arch(clip_arch);
    require(patch_size >= 1, "config: patch_size must be >= 1");
    require(heads == 1, "config: only single-head attention is supported (heads must be 1)");
    require(window >= 1, "config: window must be >= 1");
    require(stride >= 1 && stride <= window, "config: stride must be in [1, window]");
    require(window % patch_size == 0, "config: window must be a multiple of patch_size");
    require(resize_short >= 0, "config: resize_short must be >= 0");
    require(tau > 0.0f, "config: tau must be > 0");
    require(pred_iou_thresh >= 0.0f && pred_iou_thresh <= 1.0f,
            "config: pred_iou_thresh outside [0,1]");
    require(stability_thresh >= 0.0f && stability_thresh <= 1.0f,
            "config: stability_thresh outside [0,1]");
    require(points >= 1, "config: points must be >= 1");
    require(eps >= 0.0f, "config: eps must be >= 0");
    require(samples >= 0, "config: samples must be >= 0");
    require(mask_source == "sam" || mask_source == "groundtruth" || mask_source == "none",
            "config: mask_source must be sam, groundtruth or none");
    require(provider == "live" || provider.rfind("fixture:", 0) == 0,
            "config: provider must be 'live' or 'fixture:<path>'");
    if (!similarity.empty()) similarity_source_from_string(similarity);
}

}  // namespace corrseg
