#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "planforge/error.hpp"
#include "planforge/grid.hpp"

namespace planforge::png {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) throw Error("IoError", "cannot open " + path.string());
    return f;
}

[[noreturn]] inline void on_error(png_structp ptr, png_const_charp msg) {
    auto* what = static_cast<std::string*>(png_get_error_ptr(ptr));
    if (what) *what = msg;
    png_longjmp(ptr, 1);
}

inline void on_warning(png_structp, png_const_charp) {}

}  // namespace detail

// Decodes an 8-bit PNG. Palette and low bit-depth images are expanded; 16-bit
// samples are stripped to 8. The channel count of the file is kept (1-4).
inline Image8 read(const std::filesystem::path& path) {
    auto file = detail::open(path, "rb");
    std::string what;
    png_structp ptr = png_create_read_struct(PNG_LIBPNG_VER_STRING, &what,
                                             detail::on_error, detail::on_warning);
    if (!ptr) throw Error("IoError", "png_create_read_struct failed");
    png_infop info = png_create_info_struct(ptr);
    if (!info) {
        png_destroy_read_struct(&ptr, nullptr, nullptr);
        throw Error("IoError", "png_create_info_struct failed");
    }

    Image8 img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(ptr))) {
        png_destroy_read_struct(&ptr, &info, nullptr);
        throw Error("PngError", path.string() + ": " + what);
    }
    png_init_io(ptr, file.get());
    png_read_info(ptr, info);

    const auto color_type = png_get_color_type(ptr, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ptr);
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(ptr, info) < 8)
        png_set_expand_gray_1_2_4_to_8(ptr);
    if (png_get_valid(ptr, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ptr);
    if (png_get_bit_depth(ptr, info) == 16) png_set_strip_16(ptr);
    png_read_update_info(ptr, info);

    img.width = static_cast<int>(png_get_image_width(ptr, info));
    img.height = static_cast<int>(png_get_image_height(ptr, info));
    img.channels = png_get_channels(ptr, info);
    img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[y] = img.data.data() + static_cast<std::size_t>(y) * img.width * img.channels;
    png_read_image(ptr, rows.data());
    png_read_end(ptr, nullptr);
    png_destroy_read_struct(&ptr, &info, nullptr);
    return img;
}

// Writes 1 (gray), 2 (gray+alpha), 3 (RGB) or 4 (RGBA) channel images.
// No timestamps or text chunks are emitted, so output bytes depend only on
// the pixels.
inline void write(const std::filesystem::path& path, const Image8& img) {
    int color_type = 0;
    switch (img.channels) {
        case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
        case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
        case 3: color_type = PNG_COLOR_TYPE_RGB; break;
        case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
        default:
            throw Error("ChannelCountMismatch",
                        "cannot write PNG with " + std::to_string(img.channels) + " channels");
    }
    auto file = detail::open(path, "wb");
    std::string what;
    png_structp ptr = png_create_write_struct(PNG_LIBPNG_VER_STRING, &what,
                                              detail::on_error, detail::on_warning);
    if (!ptr) throw Error("IoError", "png_create_write_struct failed");
    png_infop info = png_create_info_struct(ptr);
    if (!info) {
        png_destroy_write_struct(&ptr, nullptr);
        throw Error("IoError", "png_create_info_struct failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    if (setjmp(png_jmpbuf(ptr))) {
        png_destroy_write_struct(&ptr, &info);
        throw Error("PngError", path.string() + ": " + what);
    }
    png_init_io(ptr, file.get());
    png_set_IHDR(ptr, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ptr, info);
    auto* base = const_cast<unsigned char*>(img.data.data());
    for (int y = 0; y < img.height; ++y)
        rows[y] = base + static_cast<std::size_t>(y) * img.width * img.channels;
    png_write_image(ptr, rows.data());
    png_write_end(ptr, nullptr);
    png_destroy_write_struct(&ptr, &info);
}

}  // namespace planforge::png
