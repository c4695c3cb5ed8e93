#include "posegen/atlas.hpp"

namespace posegen {

AtlasLayout::AtlasLayout(int atlas_size_) : atlas_size(atlas_size_) {
    require(atlas_size >= 2 * kCols, ErrorClass::config,
            "atlas size " + std::to_string(atlas_size) + " too small for the 4x6 cell grid");
    cell_w = atlas_size / kCols;
    cell_h = atlas_size / kRows;
}

TextureAtlas extract_texture(const Tensor& image01, const DenseBodyMap& map, int atlas_size) {
    require(image01.ndim() == 3 && image01.dim(0) == 3, ErrorClass::data,
            "expected (3,H,W) image");
    require(image01.dim(1) == map.height() && image01.dim(2) == map.width(), ErrorClass::data,
            "image and map sizes differ");
    const AtlasLayout layout(atlas_size);

    TextureAtlas atlas;
    atlas.atlas_size = atlas_size;
    atlas.parts = map.parts;
    atlas.texels = Tensor({3, atlas_size, atlas_size});
    atlas.filled = GridB::Constant(atlas_size, atlas_size, false);

    GridI hits = GridI::Zero(atlas_size, atlas_size);
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            const int k = map.part(y, x);
            if (k == 0) continue;
            const int tx = layout.texel_x(k, map.u(y, x));
            const int ty = layout.texel_y(k, map.v(y, x));
            for (int c = 0; c < 3; ++c) atlas.texels.at3(c, ty, tx) += image01.at3(c, y, x);
            hits(ty, tx) += 1;
        }
    }
    for (int ty = 0; ty < atlas_size; ++ty)
        for (int tx = 0; tx < atlas_size; ++tx)
            if (hits(ty, tx) > 0) {
                atlas.filled(ty, tx) = true;
                for (int c = 0; c < 3; ++c) atlas.texels.at3(c, ty, tx) /= Scalar(hits(ty, tx));
            }
    return atlas;
}

Tensor render_texture(const TextureAtlas& atlas, const DenseBodyMap& map) {
    require(atlas.parts == map.parts, ErrorClass::data, "atlas/map part count differs");
    const AtlasLayout layout = atlas.layout();
    Tensor image({3, map.height(), map.width()});
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            const int k = map.part(y, x);
            if (k == 0) continue;
            const int tx = layout.texel_x(k, map.u(y, x));
            const int ty = layout.texel_y(k, map.v(y, x));
            for (int c = 0; c < 3; ++c) image.at3(c, y, x) = atlas.texels.at3(c, ty, tx);
        }
    }
    return image;
}

void save_atlas(const TextureAtlas& atlas, const std::string& stem) {
    write_png(stem + ".png", to_byte_image(atlas.texels));
    ByteImage mask;
    mask.height = atlas.atlas_size;
    mask.width = atlas.atlas_size;
    mask.pixels.assign(size_t(atlas.atlas_size) * atlas.atlas_size * 3, 0);
    for (int y = 0; y < atlas.atlas_size; ++y)
        for (int x = 0; x < atlas.atlas_size; ++x)
            if (atlas.filled(y, x))
                for (int c = 0; c < 3; ++c) mask.at(y, x, c) = 255;
    write_png(stem + ".filled.png", mask);
}

TextureAtlas load_atlas(const std::string& stem, int parts) {
    const ByteImage texels = read_png(stem + ".png");
    const ByteImage mask = read_png(stem + ".filled.png");
    require(texels.height == texels.width, ErrorClass::data, "atlas raster must be square");
    require(mask.height == texels.height && mask.width == texels.width, ErrorClass::data,
            "filled mask size differs from atlas");
    TextureAtlas atlas;
    atlas.atlas_size = texels.height;
    atlas.parts = parts;
    atlas.texels = to_unit_image(texels);
    atlas.filled = GridB::Constant(texels.height, texels.width, false);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            atlas.filled(y, x) = mask.at(y, x, 0) != 0;
    // unfilled texels are zero by contract
    for (int y = 0; y < texels.height; ++y)
        for (int x = 0; x < texels.width; ++x)
            if (!atlas.filled(y, x))
                for (int c = 0; c < 3; ++c) atlas.texels.at3(c, y, x) = 0;
    return atlas;
}

} // namespace posegen
