#pragma once

#include "posegen/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace posegen {

/** 8-bit interleaved RGB raster. */
struct ByteImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels; // height*width*3, interleaved

    std::uint8_t at(int y, int x, int c) const {
        return pixels[size_t((y * width + x) * 3 + c)];
    }
    std::uint8_t& at(int y, int x, int c) {
        return pixels[size_t((y * width + x) * 3 + c)];
    }
};

ByteImage read_png(const std::string& path);
void write_png(const std::string& path, const ByteImage& img);

// [0,1] float image (3,H,W) <-> 8-bit raster. to_bytes clamps then rounds.
Tensor to_unit_image(const ByteImage& img);
ByteImage to_byte_image(const Tensor& img01);

// [0,1] <-> [-1,1], the range the networks operate in
Tensor to_pm1(const Tensor& img01);
Tensor to_unit(const Tensor& img_pm1);

// Tile images (all same size) into a row-major grid raster, `cols` per row.
Tensor tile_grid(const std::vector<Tensor>& images01, int cols);

} // namespace posegen
