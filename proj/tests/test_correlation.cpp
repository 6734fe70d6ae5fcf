#include <doctest.h>

#include <algorithm>

#include "corrseg/correlation.hpp"
#include "testutil.hpp"

using namespace corrseg;

namespace {

SimilarityMatrix sim_from(const MatF& values, SimilaritySource source = SimilaritySource::dino_qk) {
    SimilarityMatrix s;
    s.values = values;
    s.source = source;
    return s;
}

MatF random_symmetric(testutil::Rng& rng, int n) {
    MatF s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) s(i, j) = s(j, i) = rng.normal();
    return s;
}

}  // namespace

TEST_CASE("similarity: all-ones source") {
    const auto s = similarity(nullptr, SimilaritySource::ones, 4);
    CHECK(s.values.rows() == 4);
    CHECK((s.values.array() == 1.0f).all());
}

TEST_CASE("similarity: cosine structure") {
    SUBCASE("diagonal is 1 for any grid") {
        testutil::Rng rng(5);
        MatF data(6, 5);
        for (Eigen::Index i = 0; i < 30; ++i) data(i / 5, i % 5) = rng.normal() + 0.1f;
        FeatureGrid grid(data, 2, 3, SourceTag::clip_q);
        const auto s = similarity(&grid, SimilaritySource::clip_qq, 6);
        for (int i = 0; i < 6; ++i) CHECK(s.values(i, i) == doctest::Approx(1.0f).epsilon(1e-5));
        CHECK((s.values - s.values.transpose()).cwiseAbs().maxCoeff() <= 1e-5f);
        CHECK(s.values.maxCoeff() <= 1.0f + 1e-5f);
        CHECK(s.values.minCoeff() >= -1.0f - 1e-5f);
    }

    SUBCASE("hand-chosen 2-D vectors") {
        MatF data(3, 2);
        data.row(0) << 1.0f, 0.0f;
        data.row(1) << 0.0f, 1.0f;
        data.row(2) << 1.0f, 1.0f;
        FeatureGrid grid(data, 1, 3, SourceTag::clip_q);
        const auto s = similarity(&grid, SimilaritySource::clip_qq, 3);
        CHECK(s.values(0, 1) == doctest::Approx(0.0f).epsilon(1e-6));
        CHECK(s.values(0, 2) == doctest::Approx(std::sqrt(0.5f)).epsilon(1e-5));
        CHECK(s.values(1, 2) == doctest::Approx(std::sqrt(0.5f)).epsilon(1e-5));
    }

    SUBCASE("zero-norm rows are rejected with a diagnostic") {
        MatF data = MatF::Zero(2, 3);
        data(0, 0) = 1.0f;
        FeatureGrid grid(data, 1, 2, SourceTag::clip_q);
        CHECK_THROWS_WITH_AS(similarity(&grid, SimilaritySource::clip_qq, 2),
                             doctest::Contains("zero norm"), std::invalid_argument);
    }

    SUBCASE("feature sources require a grid") {
        CHECK_THROWS_AS(similarity(nullptr, SimilaritySource::clip_qq, 4), std::invalid_argument);
    }
}

TEST_CASE("semantic_matrix: one region covering all patches gives all-true") {
    PatchMask all(4, 1);
    auto set = testutil::make_patch_set(2, 2, {all});
    const auto s = similarity(nullptr, SimilaritySource::ones, 4);
    const auto e = semantic_matrix(set, s);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(e.at(i, j));
}

TEST_CASE("semantic_matrix: all unsegmented with constant S isolates patches") {
    // S > mean(S) is false everywhere when S is constant (strict inequality)
    auto set = testutil::make_patch_set(2, 2, {});
    const auto s = similarity(nullptr, SimilaritySource::ones, 4);
    const auto e = semantic_matrix(set, s);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(e.at(i, j) == (i == j));
}

TEST_CASE("semantic_matrix: hand-evaluated 4-patch instance") {
    // patches {0,1} form one region; {2,3} unsegmented
    PatchMask region(4, 0);
    region[0] = region[1] = 1;
    auto set = testutil::make_patch_set(2, 2, {region});

    MatF s(4, 4);
    s << 1.0f, 0.9f, 0.1f, 0.1f,
         0.9f, 1.0f, 0.1f, 0.1f,
         0.1f, 0.1f, 1.0f, 0.8f,
         0.1f, 0.1f, 0.8f, 1.0f;
    // mean = 0.5125: S[2][3]=0.8 above, S[0][2]=0.1 below
    const auto e = semantic_matrix(set, sim_from(s));

    CHECK(e.at(0, 1));
    CHECK(e.at(1, 0));
    CHECK(e.at(2, 3));
    CHECK(e.at(3, 2));
    CHECK_FALSE(e.at(0, 2));
    CHECK_FALSE(e.at(0, 3));
    CHECK_FALSE(e.at(1, 2));
    CHECK_FALSE(e.at(1, 3));
    for (int i = 0; i < 4; ++i) CHECK(e.at(i, i));

    // cross-check against the termwise oracle
    const auto oracle = testutil::oracle_semantic_matrix(set.unsegmented_patch, {region}, s);
    CHECK(e.allowed == oracle);
}

TEST_CASE("semantic_matrix: equals the termwise oracle on random instances") {
    testutil::Rng rng(42);
    for (int iter = 0; iter < 50; ++iter) {
        const int rows = rng.uniform_int(1, 4);
        const int cols = rng.uniform_int(1, 4);
        const int n = rows * cols;
        auto regions = testutil::random_partition(rng, n, rng.uniform_int(1, 3), 0.4f);
        auto set = testutil::make_patch_set(rows, cols, regions);
        const MatF s = random_symmetric(rng, n);
        const auto e = semantic_matrix(set, sim_from(s));
        CHECK(e.allowed == testutil::oracle_semantic_matrix(set.unsegmented_patch, regions, s));
    }
}

TEST_CASE("semantic_matrix: invariant under region order permutation") {
    testutil::Rng rng(77);
    const int n = 9;
    auto regions = testutil::random_partition(rng, n, 3, 0.3f);
    if (regions.size() > 1) {
        const MatF s = random_symmetric(rng, n);
        auto set = testutil::make_patch_set(3, 3, regions);
        std::vector<PatchMask> shuffled(regions.rbegin(), regions.rend());
        auto set2 = testutil::make_patch_set(3, 3, shuffled);
        CHECK(semantic_matrix(set, sim_from(s)).allowed ==
              semantic_matrix(set2, sim_from(s)).allowed);
    }
}

TEST_CASE("semantic_matrix: splitting a region never adds interactions") {
    testutil::Rng rng(123);
    for (int iter = 0; iter < 20; ++iter) {
        const int n = 12;
        PatchMask whole(n, 0);
        for (int p = 0; p < n; ++p) whole[p] = rng.uniform() < 0.7f ? 1 : 0;
        int members = 0;
        for (uint8_t v : whole) members += v;
        if (members < 2) continue;

        // split `whole` into two non-empty halves
        PatchMask left(n, 0), right(n, 0);
        int seen = 0;
        for (int p = 0; p < n; ++p) {
            if (!whole[p]) continue;
            (seen < members / 2 ? left : right)[p] = 1;
            ++seen;
        }
        const MatF s = random_symmetric(rng, n);
        auto before = semantic_matrix(testutil::make_patch_set(3, 4, {whole}), sim_from(s));
        auto after = semantic_matrix(testutil::make_patch_set(3, 4, {left, right}), sim_from(s));
        for (size_t i = 0; i < before.allowed.size(); ++i)
            CHECK(after.allowed[i] <= before.allowed[i]);
    }
}

TEST_CASE("masked_attention: uniform and one-hot rows") {
    SUBCASE("all-true mask with constant S gives 1/N rows") {
        const auto s = similarity(nullptr, SimilaritySource::ones, 5);
        const auto attn =
            masked_attention(s, InteractionMask::all_true(5), AttentionMode::scope_only, 64, 0.25f);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) CHECK(attn(i, j) == doctest::Approx(0.2f).epsilon(1e-6));
    }

    SUBCASE("diagonal-only row is one-hot") {
        auto mask = InteractionMask::all_true(3);
        mask.set(1, 0, false);
        mask.set(1, 2, false);
        const auto s = similarity(nullptr, SimilaritySource::ones, 3);
        const auto attn = masked_attention(s, mask, AttentionMode::scope_only, 4, 0.25f);
        CHECK(attn(1, 0) == 0.0f);
        CHECK(attn(1, 1) == 1.0f);
        CHECK(attn(1, 2) == 0.0f);
    }
}

TEST_CASE("masked_attention: 3x3 hand case at tau 0.25") {
    MatF s(3, 3);
    s << 1.0f, 0.5f, 0.3f,
         0.5f, 1.0f, 0.2f,
         0.3f, 0.2f, 1.0f;
    auto mask = InteractionMask::all_true(3);
    mask.set(0, 2, false);
    const auto attn =
        masked_attention(sim_from(s), mask, AttentionMode::value_recon, 0, 0.25f);
    // row 0: softmax of (4, 2, masked) = (e^4, e^2, 0) / (e^4 + e^2)
    CHECK(attn(0, 0) == doctest::Approx(0.8808).epsilon(5e-5));
    CHECK(attn(0, 1) == doctest::Approx(0.1192).epsilon(5e-4));
    CHECK(attn(0, 2) == 0.0f);
}

TEST_CASE("masked_attention: rows are stochastic with exact zeros off support") {
    testutil::Rng rng(2718);
    for (int iter = 0; iter < 50; ++iter) {
        const int n = rng.uniform_int(2, 12);
        const MatF s = random_symmetric(rng, n);
        auto mask = InteractionMask::all_true(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && rng.uniform() < 0.5f) mask.set(i, j, false);
        const bool vr = rng.uniform() < 0.5f;
        const auto attn = masked_attention(sim_from(s), mask,
                                           vr ? AttentionMode::value_recon : AttentionMode::scope_only,
                                           rng.uniform_int(1, 128), 0.05f + rng.uniform());
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(attn.row(i).sum() - 1.0f) <= 1e-6f);
            for (int j = 0; j < n; ++j)
                if (!mask.at(i, j)) CHECK(attn(i, j) == 0.0f);
        }
    }
}

TEST_CASE("masked_attention: additive bias matches the boolean mask") {
    auto mask = InteractionMask::all_true(2);
    mask.set(0, 1, false);
    const MatF a = mask.additive_bias();
    CHECK(a(0, 0) == 0.0f);
    CHECK(a(0, 1) == -std::numeric_limits<float>::infinity());
    CHECK(a(1, 0) == 0.0f);
}

TEST_CASE("masked_attention: parameter and invariant violations") {
    const auto s = similarity(nullptr, SimilaritySource::ones, 2);
    CHECK_THROWS_AS(
        masked_attention(s, InteractionMask::all_true(2), AttentionMode::scope_only, 0, 0.25f),
        std::invalid_argument);
    CHECK_THROWS_AS(
        masked_attention(s, InteractionMask::all_true(2), AttentionMode::value_recon, 4, 0.0f),
        std::invalid_argument);

    InteractionMask broken;  // row without any allowed entry
    broken.n = 2;
    broken.allowed = {1, 0, 0, 0};
    CHECK_THROWS_AS(masked_attention(s, broken, AttentionMode::scope_only, 4, 0.25f),
                    std::logic_error);
}
