#pragma once

#include <array>
#include <string>

#include "corrseg/common.hpp"

namespace corrseg {

// Image file handling and pixel-space resampling. Everything returning
// ImageU8 is RGB interleaved.

ImageU8 load_image(const std::string& path);
LabelImage load_label_map(const std::string& path, int32_t ignore_value);

void save_label_png(const std::string& path, const LabelImage& labels);
void save_rgb_png(const std::string& path, const ImageU8& image);

/// Scales so the shorter side equals `short_side` (aspect preserved,
/// bilinear). A matching input is returned unchanged; short_side == 0
/// disables resizing.
ImageU8 resize_shorter_side(const ImageU8& image, int short_side);

ImageU8 resize_bilinear(const ImageU8& image, int out_h, int out_w);
LabelImage resize_nearest(const LabelImage& labels, int out_h, int out_w);

/// Deterministic class palette (the usual bit-reversal colormap).
std::array<uint8_t, 3> palette_color(int class_index);

/// Blends the palette-colored label map over the image (50/50).
ImageU8 render_overlay(const ImageU8& image, const LabelImage& labels);

}  // namespace corrseg
