#include "gsvq/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <memory>

#include <png.h>

#include "gsvq/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw image dumps assume a little-endian host");

namespace gsvq {

void write_png(const Image& img, const std::string& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"),
                                                       &std::fclose);
    if (!fp) throw IoError("cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed for '" + path + "'");
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
                row[static_cast<std::size_t>(x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_raw_f32(const Image& img, const std::string& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"),
                                                       &std::fclose);
    if (!fp) throw IoError("cannot open '" + path + "' for writing");
    std::vector<float> buf(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) buf[i] = static_cast<float>(img.data[i]);
    if (std::fwrite(buf.data(), sizeof(float), buf.size(), fp.get()) != buf.size()) {
        throw IoError("raw image write failed for '" + path + "'");
    }
}

} // namespace gsvq
