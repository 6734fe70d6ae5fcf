#pragma once

#include <utility>

#include "corrseg/config.hpp"
#include "corrseg/correlation.hpp"
#include "corrseg/masks.hpp"
#include "corrseg/providers.hpp"

namespace corrseg {

/// Per-pixel class indices plus the per-pixel logit tensor they were derived
/// from. Logits are stored pixel-major: row p of `logits` holds the K class
/// scores of pixel p.
struct SegmentationMap {
    int h = 0;
    int w = 0;
    int k = 0;
    std::vector<int32_t> labels;  // h*w
    MatF logits;                  // (h*w) x k
    int32_t ignore_value = 255;

    LabelImage to_label_image() const;
};

struct WindowPlan {
    int window = 0;
    int stride = 0;
    std::vector<std::pair<int, int>> placements;  // (top, left)

    Rect rect(size_t i) const {
        return Rect{placements[i].first, placements[i].second, window, window};
    }
};

/// Tiles (image_h x image_w) with window/stride placements; the last row and
/// column are clamped so windows stay in bounds. Images smaller than the
/// window get a single placement at the origin (callers pad).
WindowPlan plan_windows(int image_h, int image_w, int window, int stride);

/// F_img = proj(attn . V): applies the reconstructed attention to the value
/// grid and projects into text space.
FeatureGrid patch_features(const MatF& attn, const FeatureGrid& values, const LinearMap& proj);

/// Cosine logits of every patch against every class embedding (N x K).
/// Feature rows are L2-normalized; zero rows yield all-zero logits.
MatF classify(const FeatureGrid& f_img, const ClassEmbeddingTable& table);

/// One region per label value present in the map (ignored pixels stay
/// unsegmented). Regions are ordered by ascending label and flagged merged.
RegionMaskSet regions_from_labels(const LabelImage& labels);

int32_t argmax_lowest(const MatF& logits, Eigen::Index row);

struct SlideResult {
    SegmentationMap map;         // aligned to `resized`, labels pre-correction
    RegionMaskSet merged_masks;  // global merged pixel masks (empty set when masks are off)
    ImageU8 resized;
    WindowPlan plan;
};

/// Full-image inference: resize, generate region masks once, merge them with
/// features pooled across all windows, then run the per-window reconstruction
/// pipeline and mean-fuse the upsampled window logits.
SlideResult slide_inference(const ImageU8& image, const ProviderSet& providers,
                            const ClassEmbeddingTable& table, const PipelineConfig& cfg,
                            const LabelImage* groundtruth = nullptr);

}  // namespace corrseg
