#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace corrseg {

// Row-major everywhere: tensors serialize as little-endian row-major blobs,
// so the in-memory layout matches the archive layout byte for byte.
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecF = Eigen::VectorXf;

/// Dense binary mask at pixel resolution. Values are 0 or 1.
struct Mask2D {
    int h = 0;
    int w = 0;
    std::vector<uint8_t> data;

    Mask2D() = default;
    Mask2D(int height, int width, uint8_t fill = 0)
        : h(height), w(width), data(static_cast<size_t>(height) * width, fill) {}

    uint8_t at(int r, int c) const { return data[static_cast<size_t>(r) * w + c]; }
    void set(int r, int c, uint8_t v) { data[static_cast<size_t>(r) * w + c] = v; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += (v != 0);
        return n;
    }
    bool empty_mask() const { return count() == 0; }
};

/// Interleaved 8-bit image, RGB or single channel.
struct ImageU8 {
    int h = 0;
    int w = 0;
    int channels = 0;
    std::vector<uint8_t> data;

    ImageU8() = default;
    ImageU8(int height, int width, int ch, uint8_t fill = 0)
        : h(height), w(width), channels(ch),
          data(static_cast<size_t>(height) * width * ch, fill) {}

    const uint8_t* row(int r) const { return data.data() + static_cast<size_t>(r) * w * channels; }
    uint8_t* row(int r) { return data.data() + static_cast<size_t>(r) * w * channels; }
};

struct Rect {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;
};

/// Per-pixel integer class labels, with a sentinel for unlabeled pixels.
struct LabelImage {
    int h = 0;
    int w = 0;
    std::vector<int32_t> data;
    int32_t ignore_value = 255;

    LabelImage() = default;
    LabelImage(int height, int width, int32_t fill = 0)
        : h(height), w(width), data(static_cast<size_t>(height) * width, fill) {}

    int32_t at(int r, int c) const { return data[static_cast<size_t>(r) * w + c]; }
    void set(int r, int c, int32_t v) { data[static_cast<size_t>(r) * w + c] = v; }
};

/// Crop a window out of an image; areas outside the image are zero-padded.
ImageU8 crop_window(const ImageU8& img, const Rect& r);

/// Bilinear resample of a per-cell feature grid. `src` holds src_rows*src_cols
/// rows of `channels` values; result holds dst_rows*dst_cols rows. Uses
/// half-pixel centers with edge clamping.
MatF bilinear_resize_grid(const MatF& src, int src_rows, int src_cols,
                          int dst_rows, int dst_cols);

/// FNV-1a 64-bit over raw bytes. Stable across platforms; used to key
/// provider requests in fixture archives.
uint64_t fnv1a64(const void* bytes, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
std::string hex16(uint64_t v);

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void check_finite(const MatF& m, const std::string& what) {
    if (!m.allFinite()) throw std::invalid_argument(what + ": non-finite values");
}

}  // namespace corrseg
