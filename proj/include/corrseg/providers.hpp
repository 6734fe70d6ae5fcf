#pragma once

#include <memory>
#include <string>
#include <vector>

#include "corrseg/archive.hpp"
#include "corrseg/common.hpp"
#include "corrseg/feature_grid.hpp"

namespace corrseg {

/// One candidate region mask from the class-agnostic mask generator.
struct RawMaskProposal {
    Mask2D mask;
    float predicted_iou = 0.0f;
    float stability_score = 0.0f;

    void validate() const;
};

/// Final-layer pre-attention features of the image backbone, plus the
/// projection that maps attention output into the text embedding space.
struct VisualFeatures {
    FeatureGrid q;
    FeatureGrid k;
    FeatureGrid v;
    LinearMap proj;
};

// Provider contracts. The fixture implementations below and any live model
// wrapper must be interchangeable: the downstream pipeline sees only these
// interfaces. Providers are read-only after construction.

class VisualBackend {
public:
    virtual ~VisualBackend() = default;
    virtual int patch_size() const = 0;
    /// Pre-attention q/k/v of the final block, class token excluded, plus the
    /// output projection. Residual and feed-forward of the last block are not
    /// part of the contract and are never applied.
    virtual VisualFeatures extract(const ImageU8& image) = 0;
};

class SelfSupBackend {
public:
    virtual ~SelfSupBackend() = default;
    /// Elementwise sum of the final layer's query and key grids, at the
    /// backbone's native patch resolution (no interpolation here).
    virtual FeatureGrid extract_qk(const ImageU8& image) = 0;
};

class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual VecF embed(const std::string& prompt) = 0;
};

class MaskGenerator {
public:
    virtual ~MaskGenerator() = default;
    virtual std::vector<RawMaskProposal> generate(const ImageU8& image, int grid_points,
                                                  bool multimask) = 0;
};

struct ProviderSet {
    std::shared_ptr<VisualBackend> visual;
    std::shared_ptr<SelfSupBackend> selfsup;
    std::shared_ptr<TextBackend> text;
    std::shared_ptr<MaskGenerator> masks;
};

// ---------------------------------------------------------------------------
// Operations (contract wrappers around the backends)
// ---------------------------------------------------------------------------

/// Extracts q/k/v grids for `image` and validates the contract. When
/// `expected_patch > 0` the backend's patch size must match it.
VisualFeatures extract_clip_visual(VisualBackend& backend, const ImageU8& image,
                                   int expected_patch = 0);

/// Extracts the summed query+key grid and bilinearly interpolates it to
/// (target_rows, target_cols). Pass 0,0 to require the native shape.
FeatureGrid extract_dino_qk(SelfSupBackend& backend, const ImageU8& image,
                            int target_rows, int target_cols);

struct ClassSpec {
    std::string name;                    // canonical
    std::vector<std::string> variants;   // includes canonical
};

/// Embeds every (template x variant) prompt per class, mean-pools, then
/// L2-normalizes once. Templates contain a single "{}" placeholder.
ClassEmbeddingTable embed_classes(TextBackend& backend, const std::vector<ClassSpec>& classes,
                                  const std::vector<std::string>& templates);

std::string render_prompt(const std::string& tmpl, const std::string& name);

std::vector<RawMaskProposal> generate_mask_proposals(MaskGenerator& gen, const ImageU8& image,
                                                     int grid_points, bool multimask);

// ---------------------------------------------------------------------------
// Fixture archive keys
// ---------------------------------------------------------------------------

// Provider requests are keyed by content: the fixture provider looks tensors
// up under a hash of the request bytes, so replay only succeeds when the
// pipeline asks for exactly the pixels that were recorded.
namespace fixture_keys {
std::string clip(const ImageU8& image);
std::string dino(const ImageU8& image);
std::string sam(const ImageU8& image, int grid_points, bool multimask);
std::string text(const std::string& prompt);
}  // namespace fixture_keys

// ---------------------------------------------------------------------------
// File-backed fixture providers
// ---------------------------------------------------------------------------

class FixtureVisualBackend : public VisualBackend {
public:
    explicit FixtureVisualBackend(std::shared_ptr<ArchiveReader> archive);
    int patch_size() const override { return patch_size_; }
    VisualFeatures extract(const ImageU8& image) override;

private:
    std::shared_ptr<ArchiveReader> archive_;
    int patch_size_;
};

class FixtureSelfSupBackend : public SelfSupBackend {
public:
    explicit FixtureSelfSupBackend(std::shared_ptr<ArchiveReader> archive) : archive_(std::move(archive)) {}
    FeatureGrid extract_qk(const ImageU8& image) override;

private:
    std::shared_ptr<ArchiveReader> archive_;
};

class FixtureTextBackend : public TextBackend {
public:
    explicit FixtureTextBackend(std::shared_ptr<ArchiveReader> archive) : archive_(std::move(archive)) {}
    VecF embed(const std::string& prompt) override;

private:
    std::shared_ptr<ArchiveReader> archive_;
};

class FixtureMaskGenerator : public MaskGenerator {
public:
    explicit FixtureMaskGenerator(std::shared_ptr<ArchiveReader> archive) : archive_(std::move(archive)) {}
    std::vector<RawMaskProposal> generate(const ImageU8& image, int grid_points,
                                          bool multimask) override;

private:
    std::shared_ptr<ArchiveReader> archive_;
};

/// Builds the full provider set from a fixture archive directory.
ProviderSet make_fixture_providers(const std::string& archive_dir);

// ---------------------------------------------------------------------------
// Recording providers
// ---------------------------------------------------------------------------

// Wraps another provider set and stores every response in an archive under
// the request key, producing a fixture that replays the wrapped providers.
ProviderSet make_recording_providers(const ProviderSet& inner,
                                     std::shared_ptr<ArchiveWriter> writer);

// Serialization helpers shared by the recorder and by synthetic fixture
// builders in the tests.
void record_clip_response(ArchiveWriter& w, const std::string& key, const VisualFeatures& f);
void record_dino_response(ArchiveWriter& w, const std::string& key, const FeatureGrid& g);
void record_sam_response(ArchiveWriter& w, const std::string& key,
                         const std::vector<RawMaskProposal>& proposals);
void record_text_response(ArchiveWriter& w, const std::string& key, const VecF& emb);

}  // namespace corrseg
