#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gsvq {

// RGB image, row-major, interleaved channels, values nominally in [0,1].
// Pixels are double so render gradients can be checked by finite differences.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data; // width*height*3

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    bool operator==(const Image&) const = default;
};

// 8-bit RGB PNG; values clamped to [0,1] and rounded.
void write_png(const Image& img, const std::string& path);

// Raw float32 little-endian dump, same layout as Image::data.
void write_raw_f32(const Image& img, const std::string& path);

} // namespace gsvq
