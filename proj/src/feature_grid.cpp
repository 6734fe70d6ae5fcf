#include "corrseg/feature_grid.hpp"

namespace corrseg {

const char* to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::clip_q: return "clip_q";
        case SourceTag::clip_k: return "clip_k";
        case SourceTag::clip_v: return "clip_v";
        case SourceTag::dino_q: return "dino_q";
        case SourceTag::dino_k: return "dino_k";
        case SourceTag::dino_qk: return "dino_qk";
    }
    return "?";
}

FeatureGrid::FeatureGrid(MatF d, int r, int c, SourceTag tag)
    : data(std::move(d)), rows(r), cols(c), dim(static_cast<int>(data.cols())), source_tag(tag) {
    validate();
}

void FeatureGrid::validate() const {
    require(rows >= 1 && cols >= 1, "FeatureGrid: grid shape must be positive");
    require(data.rows() == static_cast<Eigen::Index>(rows) * cols,
            "FeatureGrid: data row count must equal rows*cols");
    require(data.cols() == dim, "FeatureGrid: dim field does not match data");
    check_finite(data, "FeatureGrid");
}

LinearMap LinearMap::identity(int dim) {
    LinearMap m;
    m.weight = MatF::Identity(dim, dim);
    m.has_bias = false;
    return m;
}

MatF LinearMap::apply(const MatF& x) const {
    require(x.cols() == weight.rows(), "LinearMap: input dim mismatch");
    MatF y = x * weight;
    if (has_bias) y.rowwise() += bias.transpose();
    return y;
}

FeatureGrid LinearMap::operator()(const FeatureGrid& g) const {
    return FeatureGrid(apply(g.data), g.rows, g.cols, g.source_tag);
}

void ClassEmbeddingTable::validate() const {
    const int k = num_classes();
    require(k >= 1, "ClassEmbeddingTable: need at least one class");
    require(static_cast<int>(class_names.size()) == k &&
                static_cast<int>(name_variants.size()) == k,
            "ClassEmbeddingTable: metadata size mismatch");
    check_finite(embeddings, "ClassEmbeddingTable");
    for (int i = 0; i < k; ++i) {
        const float n = embeddings.row(i).norm();
        require(std::abs(n - 1.0f) <= 1e-5f,
                "ClassEmbeddingTable: embedding row " + std::to_string(i) + " is not unit norm");
        require(!name_variants[i].empty(),
                "ClassEmbeddingTable: empty variant list for " + class_names[i]);
        bool has_canonical = false;
        for (const auto& v : name_variants[i]) has_canonical |= (v == class_names[i]);
        require(has_canonical,
                "ClassEmbeddingTable: variants for " + class_names[i] + " must include the canonical name");
    }
    require(background_index < k, "ClassEmbeddingTable: background index out of range");
}

}  // namespace corrseg
