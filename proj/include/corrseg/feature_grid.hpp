#pragma once

#include <string>

#include "corrseg/common.hpp"

namespace corrseg {

enum class SourceTag {
    clip_q,
    clip_k,
    clip_v,
    dino_q,
    dino_k,
    dino_qk,
};

const char* to_string(SourceTag tag);

/// A patch-indexed dense feature array with explicit grid geometry.
/// `data` holds rows*cols feature rows in row-major patch order.
struct FeatureGrid {
    MatF data;
    int rows = 0;
    int cols = 0;
    int dim = 0;
    SourceTag source_tag = SourceTag::clip_v;

    FeatureGrid() = default;
    FeatureGrid(MatF d, int r, int c, SourceTag tag);

    int patch_count() const { return rows * cols; }
    void validate() const;
};

/// Affine map applied to feature rows: y = x W + b. Providers expose the
/// output projection this way so fixtures can supply an arbitrary linear map
/// and archives can store it as plain matrices.
struct LinearMap {
    MatF weight;           // (in_dim x out_dim)
    VecF bias;             // (out_dim) or empty
    bool has_bias = false;

    static LinearMap identity(int dim);

    int in_dim() const { return static_cast<int>(weight.rows()); }
    int out_dim() const { return static_cast<int>(weight.cols()); }

    MatF apply(const MatF& x) const;
    FeatureGrid operator()(const FeatureGrid& g) const;
};

/// K unit-norm text embeddings with per-class name-variant metadata.
struct ClassEmbeddingTable {
    MatF embeddings;                                    // (K x dim_text), rows unit norm
    std::vector<std::string> class_names;               // K canonical names
    std::vector<std::vector<std::string>> name_variants;  // per class, includes canonical
    int background_index = -1;                          // <0 when absent
    std::vector<std::string> background_subclasses;

    int num_classes() const { return static_cast<int>(embeddings.rows()); }
    int dim_text() const { return static_cast<int>(embeddings.cols()); }
    void validate() const;
};

}  // namespace corrseg
