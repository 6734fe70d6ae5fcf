#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corrseg/config.hpp"
#include "corrseg/pipeline.hpp"

namespace corrseg {

/// Per-class intersection/union pixel counts, mergeable across images.
struct ConfusionAccumulator {
    std::vector<int64_t> intersection;
    std::vector<int64_t> union_count;
    std::vector<uint8_t> seen;  // class appeared in pred or gt

    explicit ConfusionAccumulator(int num_classes);
    int num_classes() const { return static_cast<int>(intersection.size()); }
    void merge(const ConfusionAccumulator& other);
};

/// Accumulates one prediction/ground-truth pair. Pixels whose ground truth
/// equals the ignore value are skipped entirely.
void update(ConfusionAccumulator& acc, const LabelImage& pred, const LabelImage& gt);

/// Mean IoU over classes with non-zero union. Errors when nothing was seen.
double miou(const ConfusionAccumulator& acc);

/// Per-class IoU; classes with zero union come back empty.
std::vector<std::optional<double>> per_class_iou(const ConfusionAccumulator& acc);

// ---------------------------------------------------------------------------

/// Dataset layout: directory pairs of images and 8-bit label maps plus a
/// class list, described by a JSON config file.
struct DatasetConfig {
    std::string name;
    std::string root;
    std::string images_dir = "images";
    std::string labels_dir = "labels";
    std::string image_suffix = ".png";
    std::string label_suffix = ".png";
    std::vector<std::string> classes;
    int32_t ignore_value = 255;
    int resize_short = 0;  // overrides the pipeline value when > 0
    bool background_enabled = false;
    std::string background_name = "background";
    std::vector<std::string> background_subclasses;

    static DatasetConfig from_json_file(const std::string& path);
    void validate() const;

    std::string images_path() const;
    std::string labels_path() const;
};

struct BenchmarkReport {
    std::string dataset;
    std::string config_json;  // effective pipeline config echo
    std::vector<std::string> class_names;
    std::vector<std::optional<double>> class_iou;
    double mean_iou = 0.0;
    int images_evaluated = 0;
    std::vector<std::string> skipped;  // "<sample>: <reason>"
    double wall_time_ms = 0.0;

    /// Deterministic apart from wall_time_ms; pass include_timing=false for a
    /// byte-reproducible document.
    std::string to_json(bool include_timing = true) const;
    std::string to_text_table() const;
};

/// Runs the full pipeline over a dataset and accumulates mIoU. A negative
/// sample_limit evaluates everything; unreadable samples are skipped and
/// recorded in the report.
BenchmarkReport run_benchmark(const DatasetConfig& dataset, const PipelineConfig& pipeline,
                              int sample_limit = -1);

/// Cumulative component ablation: one baseline row with every listed
/// component off, then one row per component enabled on top of the previous.
std::vector<BenchmarkReport> run_ablation(const DatasetConfig& dataset,
                                          const PipelineConfig& pipeline,
                                          const std::vector<std::string>& components,
                                          int sample_limit = -1);

/// Applies a component toggle ("sr", "vr", "mc", "nc") to a config.
void set_component(PipelineConfig& cfg, const std::string& component, bool enabled);

}  // namespace corrseg
