#include "corrseg/segmentation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "corrseg/image_io.hpp"

namespace corrseg {

LabelImage SegmentationMap::to_label_image() const {
    LabelImage out(h, w);
    out.ignore_value = ignore_value;
    out.data = labels;
    return out;
}

WindowPlan plan_windows(int image_h, int image_w, int window, int stride) {
    require(image_h >= 1 && image_w >= 1, "plan_windows: empty image");
    require(window >= 1, "plan_windows: window must be >= 1");
    require(stride >= 1 && stride <= window, "plan_windows: stride must be in [1, window]");

    auto offsets = [&](int extent) {
        std::vector<int> out;
        if (extent <= window) {
            out.push_back(0);
            return out;
        }
        const int span = extent - window;
        const int steps = (span + stride - 1) / stride;  // ceil
        for (int i = 0; i <= steps; ++i) out.push_back(std::min(i * stride, span));
        return out;
    };

    WindowPlan plan;
    plan.window = window;
    plan.stride = stride;
    for (int top : offsets(image_h))
        for (int left : offsets(image_w)) plan.placements.emplace_back(top, left);
    return plan;
}

FeatureGrid patch_features(const MatF& attn, const FeatureGrid& values, const LinearMap& proj) {
    const int n = values.patch_count();
    require(attn.rows() == n && attn.cols() == n,
            "patch_features: attention shape does not match the value grid");
    for (Eigen::Index i = 0; i < attn.rows(); ++i)
        require(std::abs(attn.row(i).sum() - 1.0f) <= 1e-4f,
                "patch_features: attention row " + std::to_string(i) + " is not stochastic");
    MatF mixed = attn * values.data;
    return FeatureGrid(proj.apply(mixed), values.rows, values.cols, values.source_tag);
}

MatF classify(const FeatureGrid& f_img, const ClassEmbeddingTable& table) {
    require(f_img.dim == table.dim_text(),
            "classify: projected feature dim does not match the text embedding dim");
    MatF normed = f_img.data;
    for (Eigen::Index i = 0; i < normed.rows(); ++i) {
        const float norm = normed.row(i).norm();
        if (norm > 0.0f) normed.row(i) /= norm;
    }
    return normed * table.embeddings.transpose();
}

int32_t argmax_lowest(const MatF& logits, Eigen::Index row) {
    int32_t best = 0;
    float best_v = logits(row, 0);
    for (Eigen::Index k = 1; k < logits.cols(); ++k) {
        if (logits(row, k) > best_v) {
            best_v = logits(row, k);
            best = static_cast<int32_t>(k);
        }
    }
    return best;
}

RegionMaskSet regions_from_labels(const LabelImage& labels) {
    RegionMaskSet set;
    set.pixel_h = labels.h;
    set.pixel_w = labels.w;
    set.unsegmented_pixel = Mask2D(labels.h, labels.w, 0);
    set.merged = true;  // label classes are already semantic groups

    std::set<int32_t> values;
    for (int32_t v : labels.data)
        if (v != labels.ignore_value) values.insert(v);

    std::map<int32_t, int> index_of;
    for (int32_t v : values) {
        index_of[v] = set.region_count();
        set.region_ids.push_back(set.region_count());
        set.pixel_masks.emplace_back(labels.h, labels.w, 0);
    }
    for (size_t i = 0; i < labels.data.size(); ++i) {
        const int32_t v = labels.data[i];
        if (v == labels.ignore_value)
            set.unsegmented_pixel.data[i] = 1;
        else
            set.pixel_masks[index_of[v]].data[i] = 1;
    }
    return set;
}

namespace {

struct WindowGrids {
    VisualFeatures vis;
    FeatureGrid sim_grid;  // grid backing S (unset for `ones`)
    bool has_sim_grid = false;
};

WindowGrids window_grids(const ImageU8& win_img, const ProviderSet& providers,
                         const PipelineConfig& cfg, int wrows, int wcols) {
    WindowGrids g;
    g.vis = extract_clip_visual(*providers.visual, win_img, cfg.patch_size);
    switch (cfg.effective_similarity()) {
        case SimilaritySource::clip_qq:
            g.sim_grid = g.vis.q;
            g.has_sim_grid = true;
            break;
        case SimilaritySource::clip_kk:
            g.sim_grid = g.vis.k;
            g.has_sim_grid = true;
            break;
        case SimilaritySource::clip_vv:
            g.sim_grid = g.vis.v;
            g.has_sim_grid = true;
            break;
        case SimilaritySource::clip_qkqk:
            g.sim_grid = FeatureGrid(g.vis.q.data + g.vis.k.data, wrows, wcols, SourceTag::clip_q);
            g.has_sim_grid = true;
            break;
        case SimilaritySource::dino_qk:
            g.sim_grid = extract_dino_qk(*providers.selfsup, win_img, wrows, wcols);
            g.has_sim_grid = true;
            break;
        case SimilaritySource::ones:
            g.has_sim_grid = false;
            break;
    }
    return g;
}

// Pooling source for region features: the similarity grid when it exists,
// otherwise the value grid.
const FeatureGrid& pooling_grid(const WindowGrids& g) {
    return g.has_sim_grid ? g.sim_grid : g.vis.v;
}

RegionMaskSet build_global_masks(const ImageU8& resized, const ProviderSet& providers,
                                 const PipelineConfig& cfg, const LabelImage* groundtruth) {
    if (cfg.mask_source == "groundtruth") {
        if (groundtruth == nullptr)
            throw std::invalid_argument(
                "mask_source 'groundtruth' needs a ground-truth label map (eval only)");
        LabelImage gt = resize_nearest(*groundtruth, resized.h, resized.w);
        return regions_from_labels(gt);
    }
    auto proposals =
        generate_mask_proposals(*providers.masks, resized, cfg.points, cfg.multimask);
    return threshold_and_flatten(proposals, cfg.pred_iou_thresh, cfg.stability_thresh, resized.h,
                                 resized.w);
}

// Region features pooled across every window a region shows up in, then one
// global DBSCAN merge. Regions that never cover a patch in any window are
// folded into the unsegmented area.
RegionMaskSet merge_globally(const RegionMaskSet& global, const ImageU8& resized,
                             const WindowPlan& plan, const ProviderSet& providers,
                             const PipelineConfig& cfg, int wrows, int wcols) {
    const int z = global.region_count();
    std::vector<Eigen::RowVectorXf> sums(z);
    std::vector<int> counts(z, 0);

    for (size_t i = 0; i < plan.placements.size(); ++i) {
        const Rect rect = plan.rect(i);
        const ImageU8 win_img = crop_window(resized, rect);
        const WindowGrids grids = window_grids(win_img, providers, cfg, wrows, wcols);
        RegionMaskSet wset = rasterize_to_patches(crop_mask_set(global, rect), wrows, wcols,
                                                  cfg.patch_size);
        if (wset.region_count() == 0) continue;
        const RegionFeatureTable table = region_features(wset, pooling_grid(grids));
        for (int r = 0; r < wset.region_count(); ++r) {
            int patches = 0;
            for (uint8_t v : wset.patch_masks[r]) patches += (v != 0);
            const int gid = wset.region_ids[r];
            if (counts[gid] == 0)
                sums[gid] = table.features.row(r) * static_cast<float>(patches);
            else
                sums[gid] += table.features.row(r) * static_cast<float>(patches);
            counts[gid] += patches;
        }
    }

    // keep regions that were seen by at least one window
    RegionMaskSet filtered;
    filtered.pixel_h = global.pixel_h;
    filtered.pixel_w = global.pixel_w;
    filtered.unsegmented_pixel = global.unsegmented_pixel;
    std::vector<int> kept;
    for (int r = 0; r < z; ++r) {
        if (counts[r] == 0) {
            for (size_t i = 0; i < filtered.unsegmented_pixel.data.size(); ++i)
                filtered.unsegmented_pixel.data[i] |= global.pixel_masks[r].data[i];
            continue;
        }
        kept.push_back(r);
        filtered.region_ids.push_back(static_cast<int>(filtered.pixel_masks.size()));
        filtered.pixel_masks.push_back(global.pixel_masks[r]);
    }

    RegionFeatureTable table;
    table.region_ids = filtered.region_ids;
    if (!kept.empty()) {
        table.features.resize(static_cast<Eigen::Index>(kept.size()), sums[kept[0]].cols());
        for (size_t i = 0; i < kept.size(); ++i)
            table.features.row(static_cast<Eigen::Index>(i)) =
                sums[kept[i]] / static_cast<float>(counts[kept[i]]);
    }
    return merge_regions(filtered, table, cfg.eps, cfg.samples);
}

}  // namespace

SlideResult slide_inference(const ImageU8& image, const ProviderSet& providers,
                            const ClassEmbeddingTable& table, const PipelineConfig& cfg,
                            const LabelImage* groundtruth) {
    cfg.validate();
    require(image.h >= 1 && image.w >= 1 && image.channels == 3,
            "slide_inference: expected a non-empty RGB image");

    SlideResult result;
    result.resized = resize_shorter_side(image, cfg.resize_short);
    const ImageU8& resized = result.resized;
    result.plan = plan_windows(resized.h, resized.w, cfg.window, cfg.stride);

    const int wrows = cfg.window / cfg.patch_size;
    const int wcols = wrows;
    const int n = wrows * wcols;
    const int k = table.num_classes();

    // one mask-generator pass per image, merged once, shared by every window
    if (cfg.masks_needed()) {
        RegionMaskSet global = build_global_masks(resized, providers, cfg, groundtruth);
        if (cfg.mask_source == "groundtruth" || global.region_count() == 0) {
            global.merged = true;
            result.merged_masks = std::move(global);
        } else {
            result.merged_masks =
                merge_globally(global, resized, result.plan, providers, cfg, wrows, wcols);
        }
    } else {
        result.merged_masks.pixel_h = resized.h;
        result.merged_masks.pixel_w = resized.w;
        result.merged_masks.unsegmented_pixel = Mask2D(resized.h, resized.w, 1);
    }

    MatF accum = MatF::Zero(static_cast<Eigen::Index>(resized.h) * resized.w, k);
    std::vector<int> cover(static_cast<size_t>(resized.h) * resized.w, 0);

    const AttentionMode mode = cfg.vr ? AttentionMode::value_recon : AttentionMode::scope_only;
    for (size_t i = 0; i < result.plan.placements.size(); ++i) {
        const Rect rect = result.plan.rect(i);
        const ImageU8 win_img = crop_window(resized, rect);
        const WindowGrids grids = window_grids(win_img, providers, cfg, wrows, wcols);

        const SimilarityMatrix S =
            similarity(grids.has_sim_grid ? &grids.sim_grid : nullptr, cfg.effective_similarity(), n);

        InteractionMask imask;
        if (cfg.scope_enabled()) {
            RegionMaskSet wset = rasterize_to_patches(crop_mask_set(result.merged_masks, rect),
                                                      wrows, wcols, cfg.patch_size);
            imask = semantic_matrix(wset, S);
        } else {
            imask = InteractionMask::all_true(n);
        }

        const MatF attn = masked_attention(S, imask, mode, grids.vis.v.dim, cfg.tau);
        const FeatureGrid f_img = patch_features(attn, grids.vis.v, grids.vis.proj);
        const MatF logits = classify(f_img, table);
        const MatF up = bilinear_resize_grid(logits, wrows, wcols, cfg.window, cfg.window);

        for (int wr = 0; wr < cfg.window; ++wr) {
            const int ir = rect.top + wr;
            if (ir >= resized.h) break;  // padded rows carry no image content
            for (int wc = 0; wc < cfg.window; ++wc) {
                const int ic = rect.left + wc;
                if (ic >= resized.w) break;
                const size_t p = static_cast<size_t>(ir) * resized.w + ic;
                accum.row(static_cast<Eigen::Index>(p)) +=
                    up.row(static_cast<Eigen::Index>(wr) * cfg.window + wc);
                ++cover[p];
            }
        }
    }

    SegmentationMap& map = result.map;
    map.h = resized.h;
    map.w = resized.w;
    map.k = k;
    map.logits = std::move(accum);
    map.labels.resize(static_cast<size_t>(map.h) * map.w);
    for (Eigen::Index p = 0; p < map.logits.rows(); ++p) {
        require(cover[static_cast<size_t>(p)] > 0, "slide_inference: pixel not covered by any window");
        map.logits.row(p) /= static_cast<float>(cover[static_cast<size_t>(p)]);
        map.labels[static_cast<size_t>(p)] = argmax_lowest(map.logits, p);
    }
    return result;
}

}  // namespace corrseg
