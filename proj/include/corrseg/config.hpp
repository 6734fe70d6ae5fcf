#pragma once

#include <map>
#include <string>
#include <vector>

#include "corrseg/correlation.hpp"

namespace corrseg {

/// Full pipeline configuration. Defaults follow the reference settings:
/// thresholds 0.7, a 32x32 prompt grid with multimask output, DBSCAN
/// eps 0.2 / samples 1, temperature 0.25, and 336-px sliding windows with
/// 112-px stride.
struct PipelineConfig {
    std::string provider = "live";  // "live" or "fixture:<path>"
    std::string clip_arch = "b16";  // b16 | l14 | h14
    int patch_size = 16;
    int heads = 1;  // attention runs single-head throughout; kept as an explicit knob

    int resize_short = 336;  // 0 disables resizing
    int window = 336;
    int stride = 112;

    std::string similarity;  // empty: dino_qk when vr is on, else clip_qq
    float tau = 0.25f;

    std::string mask_source = "sam";  // sam | groundtruth | none
    float pred_iou_thresh = 0.7f;
    float stability_thresh = 0.7f;
    int points = 32;
    bool multimask = true;

    float eps = 0.2f;
    int samples = 1;

    bool sr = true;
    bool vr = true;
    bool mc = true;
    bool nc = true;

    std::vector<std::string> classes;
    std::vector<std::string> templates;  // empty: the default 80-template set
    std::map<std::string, std::vector<std::string>> plural_map;
    bool background_enabled = false;
    std::string background_name = "background";
    std::vector<std::string> background_subclasses;

    /// Parses a JSON object; unknown keys are rejected so typos fail loudly.
    static PipelineConfig from_json_text(const std::string& text);
    static PipelineConfig from_json_file(const std::string& path);

    /// Canonical JSON echo of the effective configuration.
    std::string to_json() const;

    SimilaritySource effective_similarity() const;
    bool scope_enabled() const { return sr && mask_source != "none"; }
    bool masks_needed() const { return (sr || mc) && mask_source != "none"; }
    std::vector<std::string> effective_templates() const;

    void validate() const;
};

int patch_size_for_arch(const std::string& arch);

}  // namespace corrseg
