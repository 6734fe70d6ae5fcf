#include "corrseg/image_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace corrseg {

namespace {

ImageU8 from_cv_rgb(const cv::Mat& m) {
    ImageU8 img(m.rows, m.cols, 3);
    for (int r = 0; r < m.rows; ++r)
        std::memcpy(img.row(r), m.ptr<uint8_t>(r), static_cast<size_t>(m.cols) * 3);
    return img;
}

cv::Mat to_cv_rgb(const ImageU8& img) {
    require(img.channels == 3, "expected a 3-channel image");
    cv::Mat m(img.h, img.w, CV_8UC3);
    for (int r = 0; r < img.h; ++r)
        std::memcpy(m.ptr<uint8_t>(r), img.row(r), static_cast<size_t>(img.w) * 3);
    return m;
}

}  // namespace

ImageU8 load_image(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("cannot read image: " + path);
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    return from_cv_rgb(rgb);
}

LabelImage load_label_map(const std::string& path, int32_t ignore_value) {
    cv::Mat gray = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (gray.empty()) throw std::runtime_error("cannot read label map: " + path);
    LabelImage out(gray.rows, gray.cols);
    out.ignore_value = ignore_value;
    for (int r = 0; r < gray.rows; ++r) {
        const uint8_t* src = gray.ptr<uint8_t>(r);
        for (int c = 0; c < gray.cols; ++c) out.set(r, c, src[c]);
    }
    return out;
}

void save_label_png(const std::string& path, const LabelImage& labels) {
    cv::Mat m(labels.h, labels.w, CV_8UC1);
    for (int r = 0; r < labels.h; ++r) {
        uint8_t* dst = m.ptr<uint8_t>(r);
        for (int c = 0; c < labels.w; ++c) {
            const int32_t v = labels.at(r, c);
            require(v >= 0 && v <= 255, "label value out of 8-bit range");
            dst[c] = static_cast<uint8_t>(v);
        }
    }
    if (!cv::imwrite(path, m)) throw std::runtime_error("cannot write label map: " + path);
}

void save_rgb_png(const std::string& path, const ImageU8& image) {
    cv::Mat rgb = to_cv_rgb(image);
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path, bgr)) throw std::runtime_error("cannot write image: " + path);
}

ImageU8 resize_shorter_side(const ImageU8& image, int short_side) {
    if (short_side <= 0) return image;
    const int cur = std::min(image.h, image.w);
    if (cur == short_side) return image;
    const double scale = static_cast<double>(short_side) / cur;
    const int out_h = std::max(short_side, static_cast<int>(std::lround(image.h * scale)));
    const int out_w = std::max(short_side, static_cast<int>(std::lround(image.w * scale)));
    return resize_bilinear(image, out_h, out_w);
}

ImageU8 resize_bilinear(const ImageU8& image, int out_h, int out_w) {
    if (image.h == out_h && image.w == out_w) return image;
    cv::Mat src = to_cv_rgb(image);
    cv::Mat dst;
    cv::resize(src, dst, cv::Size(out_w, out_h), 0, 0, cv::INTER_LINEAR);
    return from_cv_rgb(dst);
}

LabelImage resize_nearest(const LabelImage& labels, int out_h, int out_w) {
    if (labels.h == out_h && labels.w == out_w) return labels;
    LabelImage out(out_h, out_w);
    out.ignore_value = labels.ignore_value;
    for (int r = 0; r < out_h; ++r) {
        const int sr = std::min(labels.h - 1,
                                static_cast<int>((r + 0.5) * labels.h / out_h));
        for (int c = 0; c < out_w; ++c) {
            const int sc = std::min(labels.w - 1,
                                    static_cast<int>((c + 0.5) * labels.w / out_w));
            out.set(r, c, labels.at(sr, sc));
        }
    }
    return out;
}

std::array<uint8_t, 3> palette_color(int class_index) {
    // bit-reversal colormap: class bits spread over the RGB channels
    std::array<uint8_t, 3> rgb = {0, 0, 0};
    int id = class_index;
    for (int shift = 7; shift >= 0 && id > 0; --shift) {
        rgb[0] |= static_cast<uint8_t>(((id >> 0) & 1) << shift);
        rgb[1] |= static_cast<uint8_t>(((id >> 1) & 1) << shift);
        rgb[2] |= static_cast<uint8_t>(((id >> 2) & 1) << shift);
        id >>= 3;
    }
    return rgb;
}

ImageU8 render_overlay(const ImageU8& image, const LabelImage& labels) {
    require(image.h == labels.h && image.w == labels.w,
            "overlay: image and label dimensions differ");
    ImageU8 out(image.h, image.w, 3);
    for (int r = 0; r < image.h; ++r) {
        const uint8_t* src = image.row(r);
        uint8_t* dst = out.row(r);
        for (int c = 0; c < image.w; ++c) {
            const auto color = palette_color(labels.at(r, c));
            for (int ch = 0; ch < 3; ++ch)
                dst[c * 3 + ch] = static_cast<uint8_t>((src[c * 3 + ch] + color[ch]) / 2);
        }
    }
    return out;
}

}  // namespace corrseg
