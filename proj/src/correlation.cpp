#include "corrseg/correlation.hpp"

#include <cmath>
#include <limits>

namespace corrseg {

const char* to_string(SimilaritySource s) {
    switch (s) {
        case SimilaritySource::clip_qq: return "clip_qq";
        case SimilaritySource::clip_kk: return "clip_kk";
        case SimilaritySource::clip_vv: return "clip_vv";
        case SimilaritySource::clip_qkqk: return "clip_qkqk";
        case SimilaritySource::dino_qk: return "dino_qk";
        case SimilaritySource::ones: return "ones";
    }
    return "?";
}

SimilaritySource similarity_source_from_string(const std::string& s) {
    if (s == "clip_qq") return SimilaritySource::clip_qq;
    if (s == "clip_kk") return SimilaritySource::clip_kk;
    if (s == "clip_vv") return SimilaritySource::clip_vv;
    if (s == "clip_qkqk") return SimilaritySource::clip_qkqk;
    if (s == "dino_qk") return SimilaritySource::dino_qk;
    if (s == "ones") return SimilaritySource::ones;
    throw std::invalid_argument("unknown similarity source '" + s + "'");
}

InteractionMask InteractionMask::all_true(int n) {
    InteractionMask m;
    m.n = n;
    m.allowed.assign(static_cast<size_t>(n) * n, 1);
    return m;
}

MatF InteractionMask::additive_bias() const {
    MatF a(n, n);
    const float neg_inf = -std::numeric_limits<float>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = at(i, j) ? 0.0f : neg_inf;
    return a;
}

SimilarityMatrix similarity(const FeatureGrid* fs, SimilaritySource source, int n) {
    require(n >= 1, "similarity: N must be >= 1");
    SimilarityMatrix s;
    s.source = source;
    s.normalized = true;

    if (source == SimilaritySource::ones) {
        s.values = MatF::Ones(n, n);
        return s;
    }

    require(fs != nullptr, "similarity: feature grid required for source " +
                               std::string(to_string(source)));
    require(fs->patch_count() == n, "similarity: grid patch count does not match N");

    MatF normed = fs->data;
    for (Eigen::Index i = 0; i < normed.rows(); ++i) {
        const float norm = normed.row(i).norm();
        if (norm <= 0.0f)
            throw std::invalid_argument("similarity: feature row " + std::to_string(i) +
                                        " has zero norm and cannot be cosine-normalized");
        normed.row(i) /= norm;
    }
    s.values = normed * normed.transpose();
    return s;
}

InteractionMask semantic_matrix(const RegionMaskSet& set, const SimilarityMatrix& S) {
    require(set.rasterized(), "semantic_matrix: mask set has no patch masks");
    const int n = set.patch_count();
    require(S.size() == n, "semantic_matrix: S does not match the patch grid");

    // double accumulation keeps the strict S > mean comparison stable
    double mean_acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mean_acc += S.values(i, j);
    const double mean = mean_acc / (static_cast<double>(n) * n);

    // region index per patch (-1 for unsegmented)
    std::vector<int> region_of(n, -1);
    for (int z = 0; z < set.region_count(); ++z)
        for (int p = 0; p < n; ++p)
            if (set.patch_masks[z][p]) region_of[p] = z;

    InteractionMask mask;
    mask.n = n;
    mask.allowed.assign(static_cast<size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const bool unseg_pair = (region_of[i] < 0 || region_of[j] < 0) && S.values(i, j) > mean;
            const bool same_region = region_of[i] >= 0 && region_of[i] == region_of[j];
            if (unseg_pair || same_region) mask.set(i, j, true);
        }
        mask.set(i, i, true);
    }
    return mask;
}

MatF masked_attention(const SimilarityMatrix& S, const InteractionMask& mask, AttentionMode mode,
                      int d, float tau) {
    const int n = S.size();
    require(mask.n == n, "masked_attention: mask size does not match S");
    float scale = 1.0f;
    if (mode == AttentionMode::scope_only) {
        require(d >= 1, "masked_attention: d must be >= 1 for scope_only");
        scale = std::sqrt(static_cast<float>(d));
    } else {
        require(tau > 0.0f, "masked_attention: tau must be > 0 for value_recon");
        scale = tau;
    }

    MatF attn = MatF::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        float row_max = -std::numeric_limits<float>::infinity();
        for (int j = 0; j < n; ++j)
            if (mask.at(i, j)) row_max = std::max(row_max, S.values(i, j) / scale);
        if (!std::isfinite(row_max))
            throw std::logic_error("masked_attention: row " + std::to_string(i) +
                                   " has no allowed entries (invariant broken)");
        float denom = 0.0f;
        for (int j = 0; j < n; ++j) {
            if (!mask.at(i, j)) continue;  // stays exactly 0
            const float w = std::exp(S.values(i, j) / scale - row_max);
            attn(i, j) = w;
            denom += w;
        }
        attn.row(i) /= denom;
    }
    return attn;
}

}  // namespace corrseg
