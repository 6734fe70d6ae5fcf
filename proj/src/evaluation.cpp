#include "corrseg/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "corrseg/image_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace corrseg {

ConfusionAccumulator::ConfusionAccumulator(int num_classes)
    : intersection(num_classes, 0), union_count(num_classes, 0), seen(num_classes, 0) {
    require(num_classes >= 1, "ConfusionAccumulator: need at least one class");
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
    require(num_classes() == other.num_classes(), "ConfusionAccumulator: class count mismatch");
    for (int k = 0; k < num_classes(); ++k) {
        intersection[k] += other.intersection[k];
        union_count[k] += other.union_count[k];
        seen[k] |= other.seen[k];
    }
}

void update(ConfusionAccumulator& acc, const LabelImage& pred, const LabelImage& gt) {
    require(pred.h == gt.h && pred.w == gt.w, "update: pred and gt shapes differ");
    const int k = acc.num_classes();
    for (size_t i = 0; i < gt.data.size(); ++i) {
        const int32_t g = gt.data[i];
        if (g == gt.ignore_value) continue;
        const int32_t p = pred.data[i];
        require(g >= 0 && g < k, "update: ground-truth label " + std::to_string(g) +
                                     " outside [0," + std::to_string(k) + ")");
        require(p >= 0 && p < k, "update: predicted label " + std::to_string(p) +
                                     " outside [0," + std::to_string(k) + ")");
        acc.seen[g] = 1;
        acc.seen[p] = 1;
        if (p == g) {
            ++acc.intersection[p];
            ++acc.union_count[p];
        } else {
            ++acc.union_count[p];
            ++acc.union_count[g];
        }
    }
}

double miou(const ConfusionAccumulator& acc) {
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k < acc.num_classes(); ++k) {
        if (acc.union_count[k] == 0) continue;
        sum += static_cast<double>(acc.intersection[k]) / static_cast<double>(acc.union_count[k]);
        ++n;
    }
    if (n == 0) throw std::runtime_error("miou: empty evaluation, no class was ever seen");
    return sum / n;
}

std::vector<std::optional<double>> per_class_iou(const ConfusionAccumulator& acc) {
    std::vector<std::optional<double>> out(acc.num_classes());
    for (int k = 0; k < acc.num_classes(); ++k)
        if (acc.union_count[k] > 0)
            out[k] = static_cast<double>(acc.intersection[k]) /
                     static_cast<double>(acc.union_count[k]);
    return out;
}

// ---------------------------------------------------------------------------

DatasetConfig DatasetConfig::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dataset config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("dataset config is not valid JSON: " + std::string(e.what()));
    }

    DatasetConfig d;
    d.name = j.value("name", fs::path(path).stem().string());
    d.root = j.value("root", std::string());
    if (!d.root.empty() && fs::path(d.root).is_relative())
        d.root = (fs::path(path).parent_path() / d.root).string();
    d.images_dir = j.value("images_dir", d.images_dir);
    d.labels_dir = j.value("labels_dir", d.labels_dir);
    d.image_suffix = j.value("image_suffix", d.image_suffix);
    d.label_suffix = j.value("label_suffix", d.label_suffix);
    d.ignore_value = j.value("ignore_value", d.ignore_value);
    d.resize_short = j.value("resize_short", d.resize_short);
    if (j.contains("classes")) d.classes = j["classes"].get<std::vector<std::string>>();
    if (j.contains("classes_file")) {
        fs::path cf = j["classes_file"].get<std::string>();
        if (cf.is_relative()) cf = fs::path(path).parent_path() / cf;
        std::ifstream cfs(cf);
        if (!cfs) throw std::runtime_error("cannot open classes_file: " + cf.string());
        json cj;
        cfs >> cj;
        d.classes = cj.get<std::vector<std::string>>();
    }
    if (j.contains("background")) {
        const auto& b = j["background"];
        d.background_enabled = b.value("enabled", false);
        d.background_name = b.value("name", d.background_name);
        if (b.contains("subclasses"))
            d.background_subclasses = b["subclasses"].get<std::vector<std::string>>();
    }
    d.validate();
    return d;
}

void DatasetConfig::validate() const {
    require(!root.empty(), "dataset config: 'root' is required");
    require(!classes.empty(), "dataset config: class list is required");
}

std::string DatasetConfig::images_path() const { return (fs::path(root) / images_dir).string(); }
std::string DatasetConfig::labels_path() const { return (fs::path(root) / labels_dir).string(); }

// ---------------------------------------------------------------------------

std::string BenchmarkReport::to_json(bool include_timing) const {
    json j;
    j["dataset"] = dataset;
    j["images_evaluated"] = images_evaluated;
    j["skipped"] = skipped;
    json classes = json::array();
    for (size_t i = 0; i < class_names.size(); ++i) {
        json c;
        c["name"] = class_names[i];
        if (class_iou[i])
            c["iou"] = *class_iou[i];
        else
            c["iou"] = nullptr;
        classes.push_back(c);
    }
    j["per_class"] = classes;
    j["miou"] = mean_iou;
    j["config"] = json::parse(config_json);
    j["wall_time_ms"] = include_timing ? wall_time_ms : 0.0;
    return j.dump(2);
}

std::string BenchmarkReport::to_text_table() const {
    std::ostringstream os;
    os << "dataset: " << dataset << "  (" << images_evaluated << " images, " << skipped.size()
       << " skipped)\n";
    size_t width = 5;
    for (const auto& n : class_names) width = std::max(width, n.size());
    os << std::string(width + 2, '-') << "--------\n";
    for (size_t i = 0; i < class_names.size(); ++i) {
        os << class_names[i] << std::string(width + 2 - class_names[i].size(), ' ');
        if (class_iou[i]) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.4f", *class_iou[i]);
            os << buf << "\n";
        } else {
            os << "-\n";
        }
    }
    os << std::string(width + 2, '-') << "--------\n";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.4f", mean_iou);
    os << "mIoU" << std::string(width - 2, ' ') << buf << "\n";
    return os.str();
}

namespace {

std::vector<std::string> list_samples(const DatasetConfig& d) {
    std::vector<std::string> stems;
    if (!fs::is_directory(d.images_path()))
        throw std::runtime_error("dataset images directory not found: " + d.images_path());
    for (const auto& entry : fs::directory_iterator(d.images_path())) {
        if (!entry.is_regular_file()) continue;
        const std::string fname = entry.path().filename().string();
        if (fname.size() <= d.image_suffix.size()) continue;
        if (fname.compare(fname.size() - d.image_suffix.size(), d.image_suffix.size(),
                          d.image_suffix) != 0)
            continue;
        stems.push_back(fname.substr(0, fname.size() - d.image_suffix.size()));
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

PipelineConfig apply_dataset(const DatasetConfig& d, const PipelineConfig& base) {
    PipelineConfig cfg = base;
    cfg.classes = d.classes;
    if (d.resize_short > 0) cfg.resize_short = d.resize_short;
    cfg.background_enabled = d.background_enabled;
    cfg.background_name = d.background_name;
    cfg.background_subclasses = d.background_subclasses;
    return cfg;
}

}  // namespace

BenchmarkReport run_benchmark(const DatasetConfig& dataset, const PipelineConfig& pipeline,
                              int sample_limit) {
    const auto t0 = std::chrono::steady_clock::now();
    dataset.validate();
    std::vector<std::string> stems = list_samples(dataset);
    if (sample_limit >= 0 && static_cast<size_t>(sample_limit) < stems.size())
        stems.resize(sample_limit);

    const PipelineConfig cfg = apply_dataset(dataset, pipeline);
    const PipelineContext ctx = PipelineContext::create(cfg);

    ConfusionAccumulator acc(static_cast<int>(dataset.classes.size()));
    BenchmarkReport report;
    report.dataset = dataset.name;
    report.config_json = cfg.to_json();
    report.class_names = dataset.classes;

    for (const auto& stem : stems) {
        const std::string img_path =
            (fs::path(dataset.images_path()) / (stem + dataset.image_suffix)).string();
        const std::string lbl_path =
            (fs::path(dataset.labels_path()) / (stem + dataset.label_suffix)).string();
        try {
            const ImageU8 image = load_image(img_path);
            LabelImage gt = load_label_map(lbl_path, dataset.ignore_value);
            const auto out = ctx.segment(image, &gt);
            if (gt.h != out.map.h || gt.w != out.map.w)
                gt = resize_nearest(gt, out.map.h, out.map.w);
            update(acc, out.map.to_label_image(), gt);
            ++report.images_evaluated;
        } catch (const std::exception& e) {
            report.skipped.push_back(stem + ": " + e.what());
        }
    }

    report.class_iou = per_class_iou(acc);
    report.mean_iou = miou(acc);  // throws on an empty evaluation
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void set_component(PipelineConfig& cfg, const std::string& component, bool enabled) {
    if (component == "sr")
        cfg.sr = enabled;
    else if (component == "vr")
        cfg.vr = enabled;
    else if (component == "mc")
        cfg.mc = enabled;
    else if (component == "nc")
        cfg.nc = enabled;
    else
        throw std::invalid_argument("unknown component '" + component +
                                    "' (expected sr, vr, mc or nc)");
}

std::vector<BenchmarkReport> run_ablation(const DatasetConfig& dataset,
                                          const PipelineConfig& pipeline,
                                          const std::vector<std::string>& components,
                                          int sample_limit) {
    require(!components.empty(), "run_ablation: empty component list");

    PipelineConfig cfg = pipeline;
    for (const auto& c : components) set_component(cfg, c, false);

    std::vector<BenchmarkReport> rows;
    rows.push_back(run_benchmark(dataset, cfg, sample_limit));
    for (const auto& c : components) {
        set_component(cfg, c, true);
        rows.push_back(run_benchmark(dataset, cfg, sample_limit));
    }
    return rows;
}

}  // namespace corrseg
