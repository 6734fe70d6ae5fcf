#include "corrseg/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace corrseg {

ImageU8 crop_window(const ImageU8& img, const Rect& r) {
    ImageU8 out(r.height, r.width, img.channels, 0);
    const int r0 = std::max(0, r.top);
    const int r1 = std::min(img.h, r.top + r.height);
    const int c0 = std::max(0, r.left);
    const int c1 = std::min(img.w, r.left + r.width);
    if (r1 <= r0 || c1 <= c0) return out;
    const size_t row_bytes = static_cast<size_t>(c1 - c0) * img.channels;
    for (int rr = r0; rr < r1; ++rr) {
        const uint8_t* src = img.row(rr) + static_cast<size_t>(c0) * img.channels;
        uint8_t* dst = out.row(rr - r.top) + static_cast<size_t>(c0 - r.left) * img.channels;
        std::memcpy(dst, src, row_bytes);
    }
    return out;
}

MatF bilinear_resize_grid(const MatF& src, int src_rows, int src_cols,
                          int dst_rows, int dst_cols) {
    require(src_rows >= 1 && src_cols >= 1, "bilinear_resize_grid: empty source grid");
    require(src.rows() == static_cast<Eigen::Index>(src_rows) * src_cols,
            "bilinear_resize_grid: row count does not match grid shape");
    require(dst_rows >= 1 && dst_cols >= 1, "bilinear_resize_grid: empty target grid");

    if (src_rows == dst_rows && src_cols == dst_cols) return src;

    const int ch = static_cast<int>(src.cols());
    MatF out(static_cast<Eigen::Index>(dst_rows) * dst_cols, ch);

    const float sy = static_cast<float>(src_rows) / dst_rows;
    const float sx = static_cast<float>(src_cols) / dst_cols;

    for (int dr = 0; dr < dst_rows; ++dr) {
        // half-pixel centers, clamped to the valid range
        float fy = (dr + 0.5f) * sy - 0.5f;
        fy = std::min(std::max(fy, 0.0f), static_cast<float>(src_rows - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, src_rows - 1);
        const float wy = fy - y0;
        for (int dc = 0; dc < dst_cols; ++dc) {
            float fx = (dc + 0.5f) * sx - 0.5f;
            fx = std::min(std::max(fx, 0.0f), static_cast<float>(src_cols - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, src_cols - 1);
            const float wx = fx - x0;

            const auto r00 = src.row(static_cast<Eigen::Index>(y0) * src_cols + x0);
            const auto r01 = src.row(static_cast<Eigen::Index>(y0) * src_cols + x1);
            const auto r10 = src.row(static_cast<Eigen::Index>(y1) * src_cols + x0);
            const auto r11 = src.row(static_cast<Eigen::Index>(y1) * src_cols + x1);

            out.row(static_cast<Eigen::Index>(dr) * dst_cols + dc) =
                (1.0f - wy) * ((1.0f - wx) * r00 + wx * r01) +
                wy * ((1.0f - wx) * r10 + wx * r11);
        }
    }
    return out;
}

uint64_t fnv1a64(const void* bytes, size_t len, uint64_t seed) {
    const uint8_t* p = static_cast<const uint8_t*>(bytes);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex16(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace corrseg
