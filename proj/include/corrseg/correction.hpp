#pragma once

#include <map>
#include <string>
#include <vector>

#include "corrseg/masks.hpp"
#include "corrseg/providers.hpp"
#include "corrseg/segmentation.hpp"

namespace corrseg {

/// Replaces every pixel label inside each merged region with the modal label
/// of that region (ties toward the lower class index). Unsegmented pixels
/// and the logit tensor are left untouched.
void mode_correct(SegmentationMap& map, const RegionMaskSet& merged);

/// Classifier entries after name expansion, plus the map folding expanded
/// predictions back onto the original class indices for evaluation.
struct ClassExpansion {
    std::vector<ClassSpec> specs;            // one per classifier row
    std::vector<int32_t> fold;               // classifier row -> original class index
    std::vector<std::string> original_names;
    int background_index = -1;               // index into original_names, or -1
    std::vector<std::string> background_subclasses;
};

/// Builds per-class name-variant lists. Variants come from the plural map
/// (classes without an entry stay singletons). When background handling is
/// enabled and a class matches `background_name`, it is replaced by one
/// classifier entry per subclass, all folding back to the background index.
ClassExpansion expand_class_names(const std::vector<std::string>& classes,
                                  const std::map<std::string, std::vector<std::string>>& plural_map,
                                  const std::vector<std::string>& background_subclasses,
                                  bool background_enabled,
                                  const std::string& background_name = "background");

/// Maps expanded-space labels back to original class indices.
void fold_labels(SegmentationMap& map, const ClassExpansion& expansion);

}  // namespace corrseg
