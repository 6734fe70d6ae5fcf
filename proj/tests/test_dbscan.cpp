#include <doctest.h>

#include "corrseg/dbscan.hpp"
#include "testutil.hpp"

using namespace corrseg;

namespace {

MatF random_points(testutil::Rng& rng, int n, int dim) {
    MatF pts(n, dim);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < dim; ++d) pts(i, d) = rng.normal();
    return pts;
}

}  // namespace

TEST_CASE("dbscan: two close regions merge, orthogonal ones do not") {
    MatF pts(2, 2);

    SUBCASE("cosine distance 0.1 within eps 0.2") {
        // angle with cos = 0.9 -> distance 0.1
        pts.row(0) << 1.0f, 0.0f;
        const float angle = std::acos(0.9f);
        pts.row(1) << std::cos(angle), std::sin(angle);
        const auto res = dbscan_cosine(pts, 0.2f, 1);
        CHECK(res.num_clusters == 1);
        CHECK(res.labels[0] == res.labels[1]);
    }

    SUBCASE("orthogonal vectors have distance 1.0") {
        pts.row(0) << 1.0f, 0.0f;
        pts.row(1) << 0.0f, 1.0f;
        CHECK(cosine_distance(pts, 0, 1) == doctest::Approx(1.0f));
        const auto res = dbscan_cosine(pts, 0.2f, 1);
        CHECK(res.num_clusters == 2);
        CHECK(res.labels[0] != res.labels[1]);
    }
}

TEST_CASE("dbscan: eps 0 merges exact duplicates only") {
    MatF pts(3, 2);
    pts.row(0) << 0.6f, 0.8f;
    pts.row(1) << 0.6f, 0.8f;  // bitwise duplicate
    pts.row(2) << 0.8f, 0.6f;  // distinct direction, distance ~0.04
    const auto res = dbscan_cosine(pts, 0.0f, 1);
    CHECK(res.labels[0] == res.labels[1]);
    CHECK(res.labels[0] != res.labels[2]);
    CHECK(res.num_clusters == 2);
}

TEST_CASE("dbscan: min_samples 1 equals connected components (property)") {
    testutil::Rng rng(2024);
    for (int iter = 0; iter < 100; ++iter) {
        const int n = rng.uniform_int(1, 12);
        MatF pts = random_points(rng, n, rng.uniform_int(2, 4));
        const float eps = rng.uniform() * 1.2f;
        const auto res = dbscan_cosine(pts, eps, 1);
        const auto oracle = testutil::oracle_cc_clusters(pts, eps);
        CHECK(res.labels == oracle);
    }
}

TEST_CASE("dbscan: classic algorithm matches the textbook reference") {
    testutil::Rng rng(515);
    for (int iter = 0; iter < 100; ++iter) {
        const int n = rng.uniform_int(2, 12);
        MatF pts = random_points(rng, n, 3);
        const float eps = 0.05f + rng.uniform() * 0.8f;
        const int min_samples = rng.uniform_int(2, 3);
        const auto res = dbscan_cosine(pts, eps, min_samples);
        const auto oracle = testutil::oracle_classic_dbscan(pts, eps, min_samples);
        CHECK(res.labels == oracle);
    }
}

TEST_CASE("dbscan: isolated points become noise when min_samples > 1") {
    MatF pts(3, 2);
    pts.row(0) << 1.0f, 0.0f;
    pts.row(1) << 1.0f, 0.001f;  // near-duplicate of 0
    pts.row(2) << 0.0f, 1.0f;    // isolated
    const auto res = dbscan_cosine(pts, 0.1f, 2);
    CHECK(res.num_clusters == 1);
    CHECK(res.labels[0] == 0);
    CHECK(res.labels[1] == 0);
    CHECK(res.labels[2] == -1);
}

TEST_CASE("dbscan: zero-norm rows never join nonzero clusters") {
    MatF pts = MatF::Zero(3, 2);
    pts.row(0) << 1.0f, 0.0f;
    // rows 1 and 2 stay zero
    const auto res = dbscan_cosine(pts, 0.5f, 1);
    CHECK(res.labels[0] != res.labels[1]);
    CHECK(res.labels[1] == res.labels[2]);  // identical zero rows cluster together
}

TEST_CASE("dbscan: parameter validation") {
    MatF pts = MatF::Ones(2, 2);
    CHECK_THROWS_AS(dbscan_cosine(pts, -0.1f, 1), std::invalid_argument);
    CHECK_THROWS_AS(dbscan_cosine(pts, 0.1f, 0), std::invalid_argument);
}
