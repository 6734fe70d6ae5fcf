#pragma once

#include "corrseg/common.hpp"

namespace corrseg {

/// Cosine distance 1 - <u,v>/(|u||v|). Bitwise-equal rows have distance 0;
/// if exactly one row has zero norm the distance is 2 (never neighbors).
float cosine_distance(const MatF& points, int i, int j);

struct DbscanResult {
    std::vector<int> labels;  // cluster id per point, -1 for noise
    int num_clusters = 0;
};

/// Density clustering over cosine distance. Neighborhoods use d <= eps.
/// min_samples <= 1 makes every point a core point, so clusters are the
/// connected components of the eps-threshold graph; larger values run the
/// classic expansion with border and noise handling.
DbscanResult dbscan_cosine(const MatF& points, float eps, int min_samples);

}  // namespace corrseg
