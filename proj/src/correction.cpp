#include "corrseg/correction.hpp"

#include <algorithm>
#include <set>

namespace corrseg {

void mode_correct(SegmentationMap& map, const RegionMaskSet& merged) {
    require(merged.pixel_h == map.h && merged.pixel_w == map.w,
            "mode_correct: map and mask dimensions differ");

    std::vector<int64_t> histogram(map.k, 0);
    for (const auto& region : merged.pixel_masks) {
        std::fill(histogram.begin(), histogram.end(), 0);
        for (size_t i = 0; i < region.data.size(); ++i)
            if (region.data[i]) ++histogram[map.labels[i]];

        int32_t mode = 0;
        int64_t best = -1;
        for (int32_t k = 0; k < map.k; ++k) {
            if (histogram[k] > best) {  // ties resolve to the lowest class index
                best = histogram[k];
                mode = k;
            }
        }
        for (size_t i = 0; i < region.data.size(); ++i)
            if (region.data[i]) map.labels[i] = mode;
    }
}

ClassExpansion expand_class_names(const std::vector<std::string>& classes,
                                  const std::map<std::string, std::vector<std::string>>& plural_map,
                                  const std::vector<std::string>& background_subclasses,
                                  bool background_enabled, const std::string& background_name) {
    require(!classes.empty(), "expand_class_names: class list is empty");
    {
        std::set<std::string> uniq(classes.begin(), classes.end());
        require(uniq.size() == classes.size(), "expand_class_names: canonical names must be unique");
    }

    auto variants_for = [&](const std::string& name) {
        std::vector<std::string> out = {name};
        auto it = plural_map.find(name);
        if (it != plural_map.end())
            for (const auto& v : it->second)
                if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
        return out;
    };

    ClassExpansion ex;
    ex.original_names = classes;
    for (int32_t i = 0; i < static_cast<int32_t>(classes.size()); ++i) {
        const bool is_background = background_enabled && classes[i] == background_name;
        if (!is_background) {
            ex.specs.push_back({classes[i], variants_for(classes[i])});
            ex.fold.push_back(i);
            continue;
        }
        require(!background_subclasses.empty(),
                "expand_class_names: background handling enabled with an empty subclass list");
        ex.background_index = i;
        ex.background_subclasses = background_subclasses;
        for (const auto& sub : background_subclasses) {
            ex.specs.push_back({sub, variants_for(sub)});
            ex.fold.push_back(i);
        }
    }

    std::set<std::string> names;
    for (const auto& s : ex.specs)
        require(names.insert(s.name).second,
                "expand_class_names: duplicate name '" + s.name + "' after expansion");
    return ex;
}

void fold_labels(SegmentationMap& map, const ClassExpansion& expansion) {
    require(map.k == static_cast<int>(expansion.fold.size()),
            "fold_labels: map classes do not match the expansion");
    for (auto& v : map.labels) v = expansion.fold[v];
    map.k = static_cast<int>(expansion.original_names.size());
    map.logits.resize(0, 0);  // expanded-space logits are stale after folding
}

}  // namespace corrseg
