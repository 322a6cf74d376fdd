#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

#include <png.h>

#include "capkit/color.hpp"
#include "capkit/error.hpp"

namespace capkit {

/// 8-bit RGB raster, row-major, top-left origin.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<RgbColor> pixels;

    Image() = default;
    Image(int w, int h, RgbColor fill = {255, 255, 255})
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    [[nodiscard]] RgbColor& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
    [[nodiscard]] const RgbColor& at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// Loads a PNG as 8-bit RGB. Gray/palette/16-bit inputs are expanded and
/// alpha is composited over white.
inline Image load_png(const std::filesystem::path& path) {
    detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw EnvError("cannot open PNG for reading: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("libpng: read struct allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("libpng: info struct allocation failed");
    }

    std::vector<png_byte> data;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng: failed to decode " + path.string());
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    // Normalize everything to 8-bit RGBA before compositing.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    const png_byte color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t stride = png_get_rowbytes(png, info);

    data.resize(stride * static_cast<std::size_t>(height));
    rows.resize(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] = data.data() + stride * static_cast<std::size_t>(y);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        const png_bytep row = data.data() + stride * static_cast<std::size_t>(y);
        for (int x = 0; x < width; ++x) {
            const png_bytep px = row + 4 * static_cast<std::size_t>(x);
            const double a = px[3] / 255.0;
            const auto over_white = [a](png_byte c) {
                return static_cast<int>(std::lround(c * a + 255.0 * (1.0 - a)));
            };
            img.at(x, y) = {over_white(px[0]), over_white(px[1]), over_white(px[2])};
        }
    }
    return img;
}

/// Writes an 8-bit RGB PNG.
inline void save_png(const Image& img, const std::filesystem::path& path) {
    if (img.width < 1 || img.height < 1) throw Error("save_png: empty image");

    detail::FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw EnvError("cannot open PNG for writing: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("libpng: write struct allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng: info struct allocation failed");
    }

    std::vector<png_byte> row;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng: failed to encode " + path.string());
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    row.resize(3 * static_cast<std::size_t>(img.width));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const RgbColor& c = img.at(x, y);
            row[3 * static_cast<std::size_t>(x) + 0] = static_cast<png_byte>(c.r);
            row[3 * static_cast<std::size_t>(x) + 1] = static_cast<png_byte>(c.g);
            row[3 * static_cast<std::size_t>(x) + 2] = static_cast<png_byte>(c.b);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace capkit
