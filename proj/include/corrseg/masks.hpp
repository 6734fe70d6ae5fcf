#pragma once

#include <vector>

#include "corrseg/common.hpp"
#include "corrseg/feature_grid.hpp"
#include "corrseg/providers.hpp"

namespace corrseg {

using PatchMask = std::vector<uint8_t>;  // length rows*cols, values 0/1

/// Non-overlapping region masks plus the unsegmented remainder, at pixel
/// resolution and (once rasterized) at patch resolution. The pixel masks
/// partition the image together with unsegmented_pixel; likewise the patch
/// masks with unsegmented_patch.
struct RegionMaskSet {
    int pixel_h = 0;
    int pixel_w = 0;
    int grid_rows = 0;  // 0 until rasterized
    int grid_cols = 0;

    std::vector<Mask2D> pixel_masks;
    std::vector<PatchMask> patch_masks;
    std::vector<int> region_ids;  // provenance ids, stable through crop/rasterize
    Mask2D unsegmented_pixel;
    PatchMask unsegmented_patch;
    bool merged = false;

    int region_count() const { return static_cast<int>(pixel_masks.size()); }
    bool rasterized() const { return grid_rows > 0; }
    int patch_count() const { return grid_rows * grid_cols; }

    /// Checks disjointness and exact-coverage invariants at pixel level and,
    /// when rasterized, at patch level. Throws on violation.
    void validate() const;
};

/// Mask-average-pooled features of all segmented regions.
struct RegionFeatureTable {
    MatF features;                // (Z x dim)
    std::vector<int> region_ids;  // index into the producing RegionMaskSet

    void validate() const;
};

/// Discards proposals failing either threshold, then resolves overlaps:
/// survivors are ranked by predicted_iou (ties: stability, then area, then
/// input order) and each pixel goes to the highest-ranked mask claiming it.
/// Masks emptied by the overlap resolution are dropped.
RegionMaskSet threshold_and_flatten(const std::vector<RawMaskProposal>& proposals,
                                    float pred_iou_thresh, float stability_thresh,
                                    int pixel_h, int pixel_w);

/// Fills patch-level masks for a (rows x cols) grid of patch_px-sized cells.
/// Each patch goes to the region with maximal pixel coverage (a >50% majority
/// always wins); unsegmented claims a patch only on strictly larger coverage,
/// and region ties break toward the lower region index. Regions left with no
/// patch are dropped and their pixels reassigned to unsegmented.
RegionMaskSet rasterize_to_patches(const RegionMaskSet& set, int rows, int cols, int patch_px);

/// Restricts a pixel-level mask set to a window rectangle. Pixels of the
/// window outside the source image count as unsegmented. Regions without any
/// pixel in the window are dropped; region_ids keep their source values.
RegionMaskSet crop_mask_set(const RegionMaskSet& set, const Rect& window);

/// Mask average pooling: features[i] = mean of F_S rows under patch mask i.
RegionFeatureTable region_features(const RegionMaskSet& set, const FeatureGrid& grid);

/// Merges semantically similar regions by density clustering the region
/// features with cosine distance. min_samples == 0 disables merging entirely.
/// Regions classified as noise (min_samples > 1) stay unmerged singletons.
RegionMaskSet merge_regions(const RegionMaskSet& set, const RegionFeatureTable& table, float eps,
                            int min_samples);

}  // namespace corrseg
