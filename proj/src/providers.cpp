#include "corrseg/providers.hpp"

#include <algorithm>
#include <cstring>

namespace corrseg {

void RawMaskProposal::validate() const {
    require(mask.h > 0 && mask.w > 0, "RawMaskProposal: empty mask dimensions");
    require(!mask.empty_mask(), "RawMaskProposal: mask has no set pixels");
    require(predicted_iou >= 0.0f && predicted_iou <= 1.0f,
            "RawMaskProposal: predicted_iou outside [0,1]");
    require(stability_score >= 0.0f && stability_score <= 1.0f,
            "RawMaskProposal: stability_score outside [0,1]");
}

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

VisualFeatures extract_clip_visual(VisualBackend& backend, const ImageU8& image,
                                   int expected_patch) {
    const int p = backend.patch_size();
    if (expected_patch > 0 && p != expected_patch)
        throw std::invalid_argument(
            "backbone patch size " + std::to_string(p) + " does not match configured patch size " +
            std::to_string(expected_patch) + " (config key 'patch_size')");
    require(image.h >= p && image.w >= p, "image smaller than one patch");
    require(image.h % p == 0 && image.w % p == 0,
            "image dimensions must be divisible by the patch size");

    VisualFeatures f = backend.extract(image);
    const int rows = image.h / p;
    const int cols = image.w / p;
    for (const FeatureGrid* g : {&f.q, &f.k, &f.v}) {
        require(g->rows == rows && g->cols == cols,
                "visual backend returned a grid of unexpected shape");
        g->validate();
    }
    require(f.proj.in_dim() == f.v.dim, "projection input dim does not match value features");
    return f;
}

FeatureGrid extract_dino_qk(SelfSupBackend& backend, const ImageU8& image, int target_rows,
                            int target_cols) {
    FeatureGrid g = backend.extract_qk(image);
    g.validate();
    if (g.rows == target_rows && g.cols == target_cols) return g;
    if (target_rows <= 0 || target_cols <= 0)
        throw std::invalid_argument(
            "self-supervised grid shape differs from the backbone grid and no target shape is set");
    FeatureGrid out(bilinear_resize_grid(g.data, g.rows, g.cols, target_rows, target_cols),
                    target_rows, target_cols, SourceTag::dino_qk);
    return out;
}

std::string render_prompt(const std::string& tmpl, const std::string& name) {
    const auto pos = tmpl.find("{}");
    require(pos != std::string::npos, "prompt template lacks a '{}' placeholder: " + tmpl);
    require(tmpl.find("{}", pos + 2) == std::string::npos,
            "prompt template has multiple placeholders: " + tmpl);
    return tmpl.substr(0, pos) + name + tmpl.substr(pos + 2);
}

ClassEmbeddingTable embed_classes(TextBackend& backend, const std::vector<ClassSpec>& classes,
                                  const std::vector<std::string>& templates) {
    require(!classes.empty(), "embed_classes: class list is empty");
    require(!templates.empty(), "embed_classes: need at least one prompt template");
    for (const auto& t : templates) render_prompt(t, "x");  // validates placeholders

    ClassEmbeddingTable table;
    table.class_names.reserve(classes.size());
    table.name_variants.reserve(classes.size());

    int dim = -1;
    std::vector<VecF> rows;
    for (const auto& cls : classes) {
        require(!cls.variants.empty(), "embed_classes: empty variant list for class '" + cls.name + "'");
        VecF acc;
        int n = 0;
        for (const auto& tmpl : templates) {
            for (const auto& variant : cls.variants) {
                VecF e = backend.embed(render_prompt(tmpl, variant));
                if (dim < 0) dim = static_cast<int>(e.size());
                require(static_cast<int>(e.size()) == dim,
                        "embed_classes: text embedding dim changed between prompts");
                if (n == 0)
                    acc = e;
                else
                    acc += e;
                ++n;
            }
        }
        acc /= static_cast<float>(n);
        const float norm = acc.norm();
        require(norm > 0.0f, "embed_classes: pooled embedding for '" + cls.name + "' has zero norm");
        rows.push_back(acc / norm);
        table.class_names.push_back(cls.name);
        table.name_variants.push_back(cls.variants);
    }

    table.embeddings.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (size_t i = 0; i < rows.size(); ++i) table.embeddings.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    table.validate();
    return table;
}

std::vector<RawMaskProposal> generate_mask_proposals(MaskGenerator& gen, const ImageU8& image,
                                                     int grid_points, bool multimask) {
    require(grid_points >= 1, "generate_mask_proposals: grid_points must be >= 1");
    std::vector<RawMaskProposal> out = gen.generate(image, grid_points, multimask);
    for (const auto& p : out) {
        p.validate();
        require(p.mask.h == image.h && p.mask.w == image.w,
                "mask proposal dimensions do not match the image");
    }
    return out;
}

// ---------------------------------------------------------------------------
// fixture keys
// ---------------------------------------------------------------------------

namespace fixture_keys {

static uint64_t hash_image(const char* tag, const ImageU8& img, uint64_t h0) {
    uint64_t h = fnv1a64(tag, std::strlen(tag), h0);
    const int32_t dims[3] = {img.h, img.w, img.channels};
    h = fnv1a64(dims, sizeof(dims), h);
    return fnv1a64(img.data.data(), img.data.size(), h);
}

std::string clip(const ImageU8& image) { return "clip_" + hex16(hash_image("clip", image, 0xcbf29ce484222325ull)); }

std::string dino(const ImageU8& image) { return "dino_" + hex16(hash_image("dino", image, 0xcbf29ce484222325ull)); }

std::string sam(const ImageU8& image, int grid_points, bool multimask) {
    uint64_t h = hash_image("sam", image, 0xcbf29ce484222325ull);
    const int32_t params[2] = {grid_points, multimask ? 1 : 0};
    h = fnv1a64(params, sizeof(params), h);
    return "sam_" + hex16(h);
}

std::string text(const std::string& prompt) {
    return "txt_" + hex16(fnv1a64(prompt.data(), prompt.size(), fnv1a64("txt", 3)));
}

}  // namespace fixture_keys

// ---------------------------------------------------------------------------
// fixture providers
// ---------------------------------------------------------------------------

static std::runtime_error provider_missing(const std::string& what, const std::string& key,
                                           const std::string& dir) {
    return std::runtime_error("provider missing: no stored " + what + " response for request " +
                              key + " in fixture archive " + dir +
                              " (config key 'provider')");
}

FixtureVisualBackend::FixtureVisualBackend(std::shared_ptr<ArchiveReader> archive)
    : archive_(std::move(archive)) {
    auto p = archive_->meta_num("patch_size");
    if (!p)
        throw std::runtime_error("fixture archive " + archive_->dir() +
                                 " lacks meta entry 'patch_size'");
    patch_size_ = static_cast<int>(*p);
}

static std::pair<int, int> read_grid_shape(const ArchiveReader& a, const std::string& key) {
    MatF g = a.read_f32(key + "/grid");
    if (g.size() != 2) throw std::runtime_error("tensor '" + key + "/grid' must hold [rows, cols]");
    return {static_cast<int>(g(0, 0)), static_cast<int>(g(1, 0))};
}

VisualFeatures FixtureVisualBackend::extract(const ImageU8& image) {
    const std::string key = fixture_keys::clip(image);
    if (!archive_->has(key + "/v")) throw provider_missing("clip", key, archive_->dir());
    auto [rows, cols] = read_grid_shape(*archive_, key);

    VisualFeatures f;
    f.q = FeatureGrid(archive_->read_f32(key + "/q"), rows, cols, SourceTag::clip_q);
    f.k = FeatureGrid(archive_->read_f32(key + "/k"), rows, cols, SourceTag::clip_k);
    f.v = FeatureGrid(archive_->read_f32(key + "/v"), rows, cols, SourceTag::clip_v);
    f.proj.weight = archive_->read_f32(key + "/proj_w");
    if (archive_->has(key + "/proj_b")) {
        MatF b = archive_->read_f32(key + "/proj_b");
        f.proj.bias = b.reshaped();
        f.proj.has_bias = true;
    }
    return f;
}

FeatureGrid FixtureSelfSupBackend::extract_qk(const ImageU8& image) {
    const std::string key = fixture_keys::dino(image);
    if (!archive_->has(key + "/qk")) throw provider_missing("dino", key, archive_->dir());
    auto [rows, cols] = read_grid_shape(*archive_, key);
    return FeatureGrid(archive_->read_f32(key + "/qk"), rows, cols, SourceTag::dino_qk);
}

VecF FixtureTextBackend::embed(const std::string& prompt) {
    const std::string key = fixture_keys::text(prompt);
    if (!archive_->has(key + "/emb")) throw provider_missing("text", key, archive_->dir());
    return archive_->read_f32(key + "/emb").reshaped();
}

std::vector<RawMaskProposal> FixtureMaskGenerator::generate(const ImageU8& image, int grid_points,
                                                            bool multimask) {
    const std::string key = fixture_keys::sam(image, grid_points, multimask);
    if (!archive_->has(key + "/count")) throw provider_missing("mask", key, archive_->dir());
    const int count = static_cast<int>(archive_->read_f32_scalar(key + "/count"));

    std::vector<RawMaskProposal> out;
    out.reserve(count);
    if (count == 0) return out;
    MatF iou = archive_->read_f32(key + "/iou");
    MatF stability = archive_->read_f32(key + "/stability");
    for (int i = 0; i < count; ++i) {
        RawMaskProposal p;
        p.mask = archive_->read_mask(key + "/mask" + std::to_string(i));
        p.predicted_iou = iou(i, 0);
        p.stability_score = stability(i, 0);
        out.push_back(std::move(p));
    }
    return out;
}

ProviderSet make_fixture_providers(const std::string& archive_dir) {
    auto reader = std::make_shared<ArchiveReader>(archive_dir);
    ProviderSet set;
    set.visual = std::make_shared<FixtureVisualBackend>(reader);
    set.selfsup = std::make_shared<FixtureSelfSupBackend>(reader);
    set.text = std::make_shared<FixtureTextBackend>(reader);
    set.masks = std::make_shared<FixtureMaskGenerator>(reader);
    return set;
}

// ---------------------------------------------------------------------------
// recording providers
// ---------------------------------------------------------------------------

void record_clip_response(ArchiveWriter& w, const std::string& key, const VisualFeatures& f) {
    const float grid[2] = {static_cast<float>(f.q.rows), static_cast<float>(f.q.cols)};
    w.put_f32(key + "/grid", grid, {2});
    w.put_f32(key + "/q", f.q.data);
    w.put_f32(key + "/k", f.k.data);
    w.put_f32(key + "/v", f.v.data);
    w.put_f32(key + "/proj_w", f.proj.weight);
    if (f.proj.has_bias) w.put_f32(key + "/proj_b", f.proj.bias.data(), {f.proj.bias.size()});
}

void record_dino_response(ArchiveWriter& w, const std::string& key, const FeatureGrid& g) {
    const float grid[2] = {static_cast<float>(g.rows), static_cast<float>(g.cols)};
    w.put_f32(key + "/grid", grid, {2});
    w.put_f32(key + "/qk", g.data);
}

void record_sam_response(ArchiveWriter& w, const std::string& key,
                         const std::vector<RawMaskProposal>& proposals) {
    w.put_f32_scalar(key + "/count", static_cast<float>(proposals.size()));
    if (proposals.empty()) return;
    std::vector<float> iou, stability;
    for (size_t i = 0; i < proposals.size(); ++i) {
        w.put_u8(key + "/mask" + std::to_string(i), proposals[i].mask);
        iou.push_back(proposals[i].predicted_iou);
        stability.push_back(proposals[i].stability_score);
    }
    w.put_f32(key + "/iou", iou.data(), {static_cast<int64_t>(iou.size())});
    w.put_f32(key + "/stability", stability.data(), {static_cast<int64_t>(stability.size())});
}

void record_text_response(ArchiveWriter& w, const std::string& key, const VecF& emb) {
    w.put_f32(key + "/emb", emb.data(), {emb.size()});
}

namespace {

class RecordingVisual : public VisualBackend {
public:
    RecordingVisual(std::shared_ptr<VisualBackend> inner, std::shared_ptr<ArchiveWriter> w)
        : inner_(std::move(inner)), writer_(std::move(w)) {
        writer_->set_meta("patch_size", static_cast<double>(inner_->patch_size()));
    }
    int patch_size() const override { return inner_->patch_size(); }
    VisualFeatures extract(const ImageU8& image) override {
        VisualFeatures f = inner_->extract(image);
        record_clip_response(*writer_, fixture_keys::clip(image), f);
        return f;
    }

private:
    std::shared_ptr<VisualBackend> inner_;
    std::shared_ptr<ArchiveWriter> writer_;
};

class RecordingSelfSup : public SelfSupBackend {
public:
    RecordingSelfSup(std::shared_ptr<SelfSupBackend> inner, std::shared_ptr<ArchiveWriter> w)
        : inner_(std::move(inner)), writer_(std::move(w)) {}
    FeatureGrid extract_qk(const ImageU8& image) override {
        FeatureGrid g = inner_->extract_qk(image);
        record_dino_response(*writer_, fixture_keys::dino(image), g);
        return g;
    }

private:
    std::shared_ptr<SelfSupBackend> inner_;
    std::shared_ptr<ArchiveWriter> writer_;
};

class RecordingText : public TextBackend {
public:
    RecordingText(std::shared_ptr<TextBackend> inner, std::shared_ptr<ArchiveWriter> w)
        : inner_(std::move(inner)), writer_(std::move(w)) {}
    VecF embed(const std::string& prompt) override {
        VecF e = inner_->embed(prompt);
        record_text_response(*writer_, fixture_keys::text(prompt), e);
        return e;
    }

private:
    std::shared_ptr<TextBackend> inner_;
    std::shared_ptr<ArchiveWriter> writer_;
};

class RecordingMasks : public MaskGenerator {
public:
    RecordingMasks(std::shared_ptr<MaskGenerator> inner, std::shared_ptr<ArchiveWriter> w)
        : inner_(std::move(inner)), writer_(std::move(w)) {}
    std::vector<RawMaskProposal> generate(const ImageU8& image, int grid_points,
                                          bool multimask) override {
        auto proposals = inner_->generate(image, grid_points, multimask);
        record_sam_response(*writer_, fixture_keys::sam(image, grid_points, multimask), proposals);
        return proposals;
    }

private:
    std::shared_ptr<MaskGenerator> inner_;
    std::shared_ptr<ArchiveWriter> writer_;
};

}  // namespace

ProviderSet make_recording_providers(const ProviderSet& inner,
                                     std::shared_ptr<ArchiveWriter> writer) {
    ProviderSet set;
    set.visual = std::make_shared<RecordingVisual>(inner.visual, writer);
    set.selfsup = std::make_shared<RecordingSelfSup>(inner.selfsup, writer);
    set.text = std::make_shared<RecordingText>(inner.text, writer);
    set.masks = std::make_shared<RecordingMasks>(inner.masks, writer);
    return set;
}

}  // namespace corrseg
