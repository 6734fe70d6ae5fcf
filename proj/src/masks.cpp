#include "corrseg/masks.hpp"

#include <algorithm>
#include <numeric>

#include "corrseg/dbscan.hpp"

namespace corrseg {

void RegionMaskSet::validate() const {
    require(pixel_h > 0 && pixel_w > 0, "RegionMaskSet: empty pixel dimensions");
    require(region_ids.size() == pixel_masks.size(), "RegionMaskSet: region_ids size mismatch");
    require(unsegmented_pixel.h == pixel_h && unsegmented_pixel.w == pixel_w,
            "RegionMaskSet: unsegmented_pixel shape mismatch");

    std::vector<int> cover(static_cast<size_t>(pixel_h) * pixel_w, 0);
    for (const auto& m : pixel_masks) {
        require(m.h == pixel_h && m.w == pixel_w, "RegionMaskSet: pixel mask shape mismatch");
        require(!m.empty_mask(), "RegionMaskSet: empty pixel mask");
        for (size_t i = 0; i < m.data.size(); ++i) cover[i] += (m.data[i] != 0);
    }
    for (size_t i = 0; i < cover.size(); ++i) {
        cover[i] += (unsegmented_pixel.data[i] != 0);
        require(cover[i] == 1, "RegionMaskSet: pixel not covered exactly once");
    }

    if (!rasterized()) return;
    require(patch_masks.size() == pixel_masks.size(),
            "RegionMaskSet: patch mask count differs from pixel mask count");
    const int n = patch_count();
    require(static_cast<int>(unsegmented_patch.size()) == n,
            "RegionMaskSet: unsegmented_patch length mismatch");
    std::vector<int> pcover(n, 0);
    for (const auto& pm : patch_masks) {
        require(static_cast<int>(pm.size()) == n, "RegionMaskSet: patch mask length mismatch");
        int set_count = 0;
        for (int i = 0; i < n; ++i) {
            pcover[i] += (pm[i] != 0);
            set_count += (pm[i] != 0);
        }
        require(set_count > 0, "RegionMaskSet: empty patch mask");
    }
    for (int i = 0; i < n; ++i) {
        pcover[i] += (unsegmented_patch[i] != 0);
        require(pcover[i] == 1, "RegionMaskSet: patch not covered exactly once");
    }
}

void RegionFeatureTable::validate() const {
    require(static_cast<size_t>(features.rows()) == region_ids.size(),
            "RegionFeatureTable: row count does not match region_ids");
    check_finite(features, "RegionFeatureTable");
}

// ---------------------------------------------------------------------------

RegionMaskSet threshold_and_flatten(const std::vector<RawMaskProposal>& proposals,
                                    float pred_iou_thresh, float stability_thresh, int pixel_h,
                                    int pixel_w) {
    require(pred_iou_thresh >= 0.0f && pred_iou_thresh <= 1.0f,
            "threshold_and_flatten: pred_iou_thresh outside [0,1]");
    require(stability_thresh >= 0.0f && stability_thresh <= 1.0f,
            "threshold_and_flatten: stability_thresh outside [0,1]");
    require(pixel_h > 0 && pixel_w > 0, "threshold_and_flatten: image dimensions required");

    struct Cand {
        int idx;
        size_t area;
    };
    std::vector<Cand> order;
    for (int i = 0; i < static_cast<int>(proposals.size()); ++i) {
        const auto& p = proposals[i];
        require(p.mask.h == pixel_h && p.mask.w == pixel_w,
                "threshold_and_flatten: proposal mask shape mismatch");
        if (p.predicted_iou < pred_iou_thresh) continue;
        if (p.stability_score < stability_thresh) continue;
        order.push_back({i, p.mask.count()});
    }
    std::sort(order.begin(), order.end(), [&](const Cand& a, const Cand& b) {
        const auto& pa = proposals[a.idx];
        const auto& pb = proposals[b.idx];
        if (pa.predicted_iou != pb.predicted_iou) return pa.predicted_iou > pb.predicted_iou;
        if (pa.stability_score != pb.stability_score) return pa.stability_score > pb.stability_score;
        if (a.area != b.area) return a.area > b.area;
        return a.idx < b.idx;
    });

    // each pixel goes to the highest-priority surviving mask claiming it
    const size_t npx = static_cast<size_t>(pixel_h) * pixel_w;
    std::vector<int> owner(npx, -1);
    for (int pos = 0; pos < static_cast<int>(order.size()); ++pos) {
        const Mask2D& m = proposals[order[pos].idx].mask;
        for (size_t i = 0; i < npx; ++i)
            if (m.data[i] && owner[i] < 0) owner[i] = pos;
    }

    RegionMaskSet set;
    set.pixel_h = pixel_h;
    set.pixel_w = pixel_w;
    set.unsegmented_pixel = Mask2D(pixel_h, pixel_w, 0);

    std::vector<Mask2D> masks(order.size(), Mask2D(pixel_h, pixel_w, 0));
    std::vector<size_t> counts(order.size(), 0);
    for (size_t i = 0; i < npx; ++i) {
        if (owner[i] < 0) {
            set.unsegmented_pixel.data[i] = 1;
        } else {
            masks[owner[i]].data[i] = 1;
            ++counts[owner[i]];
        }
    }
    for (size_t pos = 0; pos < masks.size(); ++pos) {
        if (counts[pos] == 0) continue;  // fully shadowed by higher-priority masks
        set.region_ids.push_back(static_cast<int>(set.pixel_masks.size()));
        set.pixel_masks.push_back(std::move(masks[pos]));
    }
    return set;
}

RegionMaskSet rasterize_to_patches(const RegionMaskSet& set, int rows, int cols, int patch_px) {
    require(rows >= 1 && cols >= 1 && patch_px >= 1, "rasterize_to_patches: bad grid spec");
    require(rows * patch_px == set.pixel_h && cols * patch_px == set.pixel_w,
            "rasterize_to_patches: grid does not match pixel dimensions");

    const int z_in = set.region_count();
    // owner image: region index or -1 for unsegmented
    std::vector<int> owner(static_cast<size_t>(set.pixel_h) * set.pixel_w, -1);
    for (int r = 0; r < z_in; ++r)
        for (size_t i = 0; i < owner.size(); ++i)
            if (set.pixel_masks[r].data[i]) owner[i] = r;

    const int n = rows * cols;
    std::vector<int> patch_owner(n, -1);
    std::vector<int> counts(z_in + 1, 0);  // last slot counts unsegmented
    std::vector<int> touched;
    for (int pr = 0; pr < rows; ++pr) {
        for (int pc = 0; pc < cols; ++pc) {
            touched.clear();
            for (int dy = 0; dy < patch_px; ++dy) {
                const size_t base = static_cast<size_t>(pr * patch_px + dy) * set.pixel_w +
                                    static_cast<size_t>(pc) * patch_px;
                for (int dx = 0; dx < patch_px; ++dx) {
                    const int o = owner[base + dx];
                    const int slot = o < 0 ? z_in : o;
                    if (counts[slot] == 0) touched.push_back(slot);
                    ++counts[slot];
                }
            }
            // maximal coverage; region ties -> lower index; unsegmented wins
            // only with strictly more pixels than every region
            int best_region = -1, best_count = 0, unseg_count = 0;
            for (int slot : touched) {
                if (slot == z_in) {
                    unseg_count = counts[slot];
                } else if (counts[slot] > best_count ||
                           (counts[slot] == best_count && (best_region < 0 || slot < best_region))) {
                    best_count = counts[slot];
                    best_region = slot;
                }
                counts[slot] = 0;
            }
            patch_owner[pr * cols + pc] = (unseg_count > best_count) ? -1 : best_region;
        }
    }

    // drop regions that received no patch; their pixels become unsegmented
    std::vector<int> patch_total(z_in, 0);
    for (int p : patch_owner)
        if (p >= 0) ++patch_total[p];

    RegionMaskSet out;
    out.pixel_h = set.pixel_h;
    out.pixel_w = set.pixel_w;
    out.grid_rows = rows;
    out.grid_cols = cols;
    out.merged = set.merged;
    out.unsegmented_pixel = set.unsegmented_pixel;
    out.unsegmented_patch.assign(n, 0);

    std::vector<int> remap(z_in, -1);
    for (int r = 0; r < z_in; ++r) {
        if (patch_total[r] == 0) {
            for (size_t i = 0; i < out.unsegmented_pixel.data.size(); ++i)
                out.unsegmented_pixel.data[i] |= set.pixel_masks[r].data[i];
            continue;
        }
        remap[r] = static_cast<int>(out.pixel_masks.size());
        out.pixel_masks.push_back(set.pixel_masks[r]);
        out.region_ids.push_back(set.region_ids[r]);
        out.patch_masks.emplace_back(n, 0);
    }
    for (int p = 0; p < n; ++p) {
        const int o = patch_owner[p];
        if (o < 0 || remap[o] < 0)
            out.unsegmented_patch[p] = 1;
        else
            out.patch_masks[remap[o]][p] = 1;
    }
    return out;
}

RegionMaskSet crop_mask_set(const RegionMaskSet& set, const Rect& window) {
    require(window.height > 0 && window.width > 0, "crop_mask_set: empty window");
    RegionMaskSet out;
    out.pixel_h = window.height;
    out.pixel_w = window.width;
    out.merged = set.merged;
    out.unsegmented_pixel = Mask2D(window.height, window.width, 1);

    const int r0 = std::max(0, window.top);
    const int r1 = std::min(set.pixel_h, window.top + window.height);
    const int c0 = std::max(0, window.left);
    const int c1 = std::min(set.pixel_w, window.left + window.width);

    for (int z = 0; z < set.region_count(); ++z) {
        Mask2D cropped(window.height, window.width, 0);
        size_t cnt = 0;
        for (int r = r0; r < r1; ++r) {
            for (int c = c0; c < c1; ++c) {
                if (set.pixel_masks[z].at(r, c)) {
                    cropped.set(r - window.top, c - window.left, 1);
                    ++cnt;
                }
            }
        }
        if (cnt == 0) continue;
        for (size_t i = 0; i < cropped.data.size(); ++i)
            if (cropped.data[i]) out.unsegmented_pixel.data[i] = 0;
        out.pixel_masks.push_back(std::move(cropped));
        out.region_ids.push_back(set.region_ids[z]);
    }
    return out;
}

RegionFeatureTable region_features(const RegionMaskSet& set, const FeatureGrid& grid) {
    require(set.rasterized(), "region_features: mask set has no patch masks");
    require(grid.patch_count() == set.patch_count(),
            "region_features: feature grid does not match the patch grid");

    RegionFeatureTable table;
    table.features.resize(set.region_count(), grid.dim);
    table.region_ids = set.region_ids;
    for (int z = 0; z < set.region_count(); ++z) {
        Eigen::RowVectorXf acc = Eigen::RowVectorXf::Zero(grid.dim);
        int cnt = 0;
        const auto& pm = set.patch_masks[z];
        for (int p = 0; p < set.patch_count(); ++p) {
            if (!pm[p]) continue;
            acc += grid.data.row(p);
            ++cnt;
        }
        if (cnt == 0) throw std::logic_error("region_features: empty patch mask (invariant broken)");
        table.features.row(z) = acc / static_cast<float>(cnt);
    }
    return table;
}

RegionMaskSet merge_regions(const RegionMaskSet& set, const RegionFeatureTable& table, float eps,
                            int min_samples) {
    require(eps >= 0.0f, "merge_regions: eps must be >= 0");
    require(min_samples >= 0, "merge_regions: min_samples must be >= 0");

    RegionMaskSet out = set;
    out.merged = true;
    if (set.region_count() == 0) return out;
    if (min_samples == 0) return out;  // region merging disabled

    require(table.features.rows() == set.region_count(),
            "merge_regions: feature table does not match the mask set");

    const DbscanResult res = dbscan_cosine(table.features, eps, min_samples);
    // noise regions stay as singleton clusters
    std::vector<int> cluster_of(res.labels.size());
    int next = res.num_clusters;
    for (size_t i = 0; i < res.labels.size(); ++i)
        cluster_of[i] = res.labels[i] >= 0 ? res.labels[i] : next++;

    std::vector<std::vector<int>> members(next);
    for (size_t i = 0; i < cluster_of.size(); ++i) members[cluster_of[i]].push_back(static_cast<int>(i));
    // deterministic output order: by lowest member index
    std::sort(members.begin(), members.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });

    out.pixel_masks.clear();
    out.patch_masks.clear();
    out.region_ids.clear();
    const int n = set.rasterized() ? set.patch_count() : 0;
    for (const auto& group : members) {
        Mask2D px(set.pixel_h, set.pixel_w, 0);
        PatchMask pm(n, 0);
        for (int z : group) {
            for (size_t i = 0; i < px.data.size(); ++i) px.data[i] |= set.pixel_masks[z].data[i];
            if (set.rasterized())
                for (int p = 0; p < n; ++p) pm[p] |= set.patch_masks[z][p];
        }
        out.region_ids.push_back(static_cast<int>(out.pixel_masks.size()));
        out.pixel_masks.push_back(std::move(px));
        if (set.rasterized()) out.patch_masks.push_back(std::move(pm));
    }
    return out;
}

}  // namespace corrseg
