#pragma once

#include <memory>

#include "corrseg/config.hpp"
#include "corrseg/correction.hpp"
#include "corrseg/providers.hpp"
#include "corrseg/segmentation.hpp"

namespace corrseg {

/// Wires configuration to providers, class expansion and text embeddings.
/// Read-only after creation; one context can segment many images.
class PipelineContext {
public:
    /// Resolves the provider from cfg ("fixture:<path>" loads an archive;
    /// "live" is rejected with instructions, since no model runtime is
    /// bundled) and embeds the configured classes.
    static PipelineContext create(const PipelineConfig& cfg);

    /// Same, but with explicitly supplied providers (used for recording).
    static PipelineContext create_with_providers(const PipelineConfig& cfg,
                                                 const ProviderSet& providers);

    struct Output {
        SegmentationMap map;  // labels folded back to the original class space
        RegionMaskSet merged_masks;
        ImageU8 resized;
        WindowPlan plan;
    };

    /// Full single-image pipeline: slide inference, then mode correction
    /// (when enabled), then label folding.
    Output segment(const ImageU8& image, const LabelImage* groundtruth = nullptr) const;

    const PipelineConfig& config() const { return cfg_; }
    const ProviderSet& providers() const { return providers_; }
    const ClassExpansion& expansion() const { return expansion_; }
    const ClassEmbeddingTable& table() const { return table_; }

private:
    PipelineContext() = default;

    PipelineConfig cfg_;
    ProviderSet providers_;
    ClassExpansion expansion_;
    ClassEmbeddingTable table_;
};

}  // namespace corrseg
