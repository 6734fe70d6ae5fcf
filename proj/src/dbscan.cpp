#include "corrseg/dbscan.hpp"

#include <cstring>
#include <deque>
#include <numeric>

namespace corrseg {

float cosine_distance(const MatF& points, int i, int j) {
    if (i == j) return 0.0f;
    const auto u = points.row(i);
    const auto v = points.row(j);
    if (std::memcmp(u.data(), v.data(), sizeof(float) * points.cols()) == 0) return 0.0f;
    const float nu = u.norm();
    const float nv = v.norm();
    if (nu == 0.0f || nv == 0.0f) return 2.0f;
    return 1.0f - u.dot(v) / (nu * nv);
}

namespace {

std::vector<int> neighbors_of(const MatF& points, int i, float eps) {
    std::vector<int> out;
    const int n = static_cast<int>(points.rows());
    for (int j = 0; j < n; ++j)
        if (cosine_distance(points, i, j) <= eps) out.push_back(j);
    return out;
}

// union-find for the min_samples <= 1 case
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

DbscanResult dbscan_cosine(const MatF& points, float eps, int min_samples) {
    require(eps >= 0.0f, "dbscan: eps must be >= 0");
    require(min_samples >= 1, "dbscan: min_samples must be >= 1");
    const int n = static_cast<int>(points.rows());
    DbscanResult res;
    res.labels.assign(n, -1);
    if (n == 0) return res;

    if (min_samples <= 1) {
        // every point is core: clusters are connected components of the
        // eps-threshold graph
        UnionFind uf(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (cosine_distance(points, i, j) <= eps) uf.unite(i, j);
        std::vector<int> root_label(n, -1);
        for (int i = 0; i < n; ++i) {
            const int r = uf.find(i);
            if (root_label[r] < 0) root_label[r] = res.num_clusters++;
            res.labels[i] = root_label[r];
        }
        return res;
    }

    constexpr int kUndefined = -2;
    std::vector<int> labels(n, kUndefined);
    int cid = 0;
    for (int i = 0; i < n; ++i) {
        if (labels[i] != kUndefined) continue;
        std::vector<int> nbrs = neighbors_of(points, i, eps);
        if (static_cast<int>(nbrs.size()) < min_samples) {
            labels[i] = -1;  // may be relabeled as a border point later
            continue;
        }
        labels[i] = cid;
        std::deque<int> seeds(nbrs.begin(), nbrs.end());
        while (!seeds.empty()) {
            const int q = seeds.front();
            seeds.pop_front();
            if (labels[q] == -1) labels[q] = cid;  // border point
            if (labels[q] != kUndefined) continue;
            labels[q] = cid;
            std::vector<int> qn = neighbors_of(points, q, eps);
            if (static_cast<int>(qn.size()) >= min_samples)
                seeds.insert(seeds.end(), qn.begin(), qn.end());
        }
        ++cid;
    }
    res.labels = std::move(labels);
    res.num_clusters = cid;
    return res;
}

}  // namespace corrseg
