#include "posegen/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace posegen {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

ByteImage read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    require(fp != nullptr, ErrorClass::io, "cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, ErrorClass::io, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorClass::io, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorClass::io, "failed to decode png " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    // Normalize everything to 8-bit RGB.
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    ByteImage img;
    img.height = int(height);
    img.width = int(width);
    img.pixels.resize(size_t(height) * width * 3);

    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = img.pixels.data() + size_t(y) * width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::string& path, const ByteImage& img) {
    require(img.height > 0 && img.width > 0, ErrorClass::io, "empty image");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    require(fp != nullptr, ErrorClass::io, "cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, ErrorClass::io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorClass::io, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorClass::io, "failed to encode png " + path);
    }

    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_const_bytep> rows(size_t(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[size_t(y)] = img.pixels.data() + size_t(y) * img.width * 3;
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor to_unit_image(const ByteImage& img) {
    Tensor t({3, img.height, img.width});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                t.at3(c, y, x) = Scalar(img.at(y, x, c)) / Scalar(255);
    return t;
}

ByteImage to_byte_image(const Tensor& img01) {
    require(img01.ndim() == 3 && img01.dim(0) == 3, ErrorClass::internal,
            "expected (3,H,W) image, got " + dims_str(img01.dims()));
    ByteImage img;
    img.height = img01.dim(1);
    img.width = img01.dim(2);
    img.pixels.resize(size_t(img.height) * img.width * 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const Scalar v = std::min(Scalar(1), std::max(Scalar(0), img01.at3(c, y, x)));
                img.at(y, x, c) = std::uint8_t(std::lround(v * 255));
            }
    return img;
}

Tensor to_pm1(const Tensor& img01) {
    return Tensor::from_array(img01.dims(), img01.raw() * Scalar(2) - Scalar(1));
}

Tensor to_unit(const Tensor& img_pm1) {
    return Tensor::from_array(img_pm1.dims(),
                              ((img_pm1.raw() + Scalar(1)) * Scalar(0.5)).min(1.0).max(0.0));
}

Tensor tile_grid(const std::vector<Tensor>& images01, int cols) {
    require(!images01.empty(), ErrorClass::internal, "tile_grid: no images");
    require(cols > 0, ErrorClass::internal, "tile_grid: cols must be positive");
    const int h = images01[0].dim(1);
    const int w = images01[0].dim(2);
    const int n = int(images01.size());
    const int rows = (n + cols - 1) / cols;
    Tensor grid({3, rows * h, cols * w});
    for (int i = 0; i < n; ++i) {
        require(images01[size_t(i)].dim(1) == h && images01[size_t(i)].dim(2) == w,
                ErrorClass::internal, "tile_grid: mixed tile sizes");
        const int oy = (i / cols) * h;
        const int ox = (i % cols) * w;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    grid.at3(c, oy + y, ox + x) = images01[size_t(i)].at3(c, y, x);
    }
    return grid;
}

} // namespace posegen
