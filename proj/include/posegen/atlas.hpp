#pragma once

#include "posegen/densepose.hpp"

#include <cmath>

namespace posegen {

/** Fixed 4-row x 6-column cell grid inside an AxA atlas; part k lives in cell
 *  (k-1 div 6, k-1 mod 6). Cell sizes are floor(A/6) x floor(A/4); when A is
 *  not divisible by 6 the rightmost columns stay unused. */
struct AtlasLayout {
    int atlas_size = 0;
    int cell_w = 0;
    int cell_h = 0;

    static constexpr int kCols = 6;
    static constexpr int kRows = 4;

    explicit AtlasLayout(int atlas_size_);

    int cell_x0(int part) const { return ((part - 1) % kCols) * cell_w; }
    int cell_y0(int part) const { return ((part - 1) / kCols) * cell_h; }

    // nearest-texel address for (u,v) inside part's cell; rounding (rather
    // than truncation) keeps byte-quantized uv grids injective per part
    int texel_x(int part, Scalar u) const {
        return cell_x0(part) + int(std::lround(u * Scalar(cell_w - 1)));
    }
    int texel_y(int part, Scalar v) const {
        return cell_y0(part) + int(std::lround(v * Scalar(cell_h - 1)));
    }
};

/** Pose-independent per-part UV texture of one subject. Unfilled texels are
 *  exactly zero. */
struct TextureAtlas {
    Tensor texels; // (3,A,A), [0,1]
    GridB filled;  // (A,A)
    int atlas_size = 0;
    int parts = kMaxParts;

    AtlasLayout layout() const { return AtlasLayout(atlas_size); }
};

/** Splat each foreground pixel's color to its (part,u,v) texel; colliding
 *  pixels are averaged. */
TextureAtlas extract_texture(const Tensor& image01, const DenseBodyMap& map, int atlas_size);

/** Inverse lookup: each foreground pixel reads its nearest texel, background
 *  renders black. */
Tensor render_texture(const TextureAtlas& atlas, const DenseBodyMap& map);

// Atlas raster serialization: 8-bit texel raster plus a sidecar filled mask
// (255 = filled) at <stem>.png / <stem>.filled.png.
void save_atlas(const TextureAtlas& atlas, const std::string& stem);
TextureAtlas load_atlas(const std::string& stem, int parts = kMaxParts);

} // namespace posegen
