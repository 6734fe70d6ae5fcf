#pragma once

#include "corrseg/common.hpp"
#include "corrseg/feature_grid.hpp"
#include "corrseg/masks.hpp"

namespace corrseg {

enum class SimilaritySource {
    clip_qq,
    clip_kk,
    clip_vv,
    clip_qkqk,
    dino_qk,
    ones,
};

const char* to_string(SimilaritySource s);
SimilaritySource similarity_source_from_string(const std::string& s);

/// N x N inter-patch similarity. Feature sources produce pairwise cosine
/// similarity (rows L2-normalized before the Gram product); `ones` is the
/// uniform matrix used to study pure scope restriction.
struct SimilarityMatrix {
    MatF values;
    SimilaritySource source = SimilaritySource::ones;
    bool normalized = true;

    int size() const { return static_cast<int>(values.rows()); }
};

/// Boolean semantic matrix E and its additive attention bias A.
/// A(i,j) = 0 where E, -inf elsewhere. Diagonal is always true.
struct InteractionMask {
    int n = 0;
    std::vector<uint8_t> allowed;  // row-major N*N

    static InteractionMask all_true(int n);

    bool at(int i, int j) const { return allowed[static_cast<size_t>(i) * n + j] != 0; }
    void set(int i, int j, bool v) { allowed[static_cast<size_t>(i) * n + j] = v ? 1 : 0; }

    /// Materializes A with entries in {0, -inf}.
    MatF additive_bias() const;
};

/// Builds S from a feature grid (or nothing, for `ones`).
/// For clip_qkqk / dino_qk the caller passes the already-summed grid.
SimilarityMatrix similarity(const FeatureGrid* fs, SimilaritySource source, int n);

/// Semantic matrix from merged region masks: two patches interact when they
/// share a merged region, or when at least one is unsegmented and their
/// similarity exceeds the mean of S over all N^2 entries (strict). The
/// diagonal is forced true so every row of the masked softmax is defined.
InteractionMask semantic_matrix(const RegionMaskSet& set, const SimilarityMatrix& S);

enum class AttentionMode {
    scope_only,   // divides by sqrt(d)
    value_recon,  // divides by the temperature tau
};

/// Row-wise softmax of (S + A) / scale. Masked entries come out exactly 0;
/// every row sums to 1.
MatF masked_attention(const SimilarityMatrix& S, const InteractionMask& mask, AttentionMode mode,
                      int d, float tau);

}  // namespace corrseg
