#include "posegen/densepose.hpp"

#include <cmath>

namespace posegen {

DenseBodyMap decode_iuv(const ByteImage& raster, int parts) {
    require(raster.height > 0 && raster.width > 0, ErrorClass::data, "empty IUV raster");
    require(parts >= 1 && parts <= kMaxParts, ErrorClass::config,
            "part count must be in 1..24");

    DenseBodyMap map;
    map.parts = parts;
    map.part.resize(raster.height, raster.width);
    map.u.resize(raster.height, raster.width);
    map.v.resize(raster.height, raster.width);

    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            const int k = raster.at(y, x, 0);
            require(k <= parts, ErrorClass::data,
                    "corrupt IUV map: part index " + std::to_string(k) + " > " +
                        std::to_string(parts));
            map.part(y, x) = k;
            if (k == 0) {
                map.u(y, x) = 0;
                map.v(y, x) = 0;
            } else {
                map.u(y, x) = Scalar(raster.at(y, x, 1)) / Scalar(255);
                map.v(y, x) = Scalar(raster.at(y, x, 2)) / Scalar(255);
            }
        }
    }
    return map;
}

ByteImage encode_iuv(const DenseBodyMap& map) {
    validate_map(map);
    ByteImage raster;
    raster.height = map.height();
    raster.width = map.width();
    raster.pixels.resize(size_t(raster.height) * raster.width * 3);
    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            const int k = map.part(y, x);
            raster.at(y, x, 0) = std::uint8_t(k);
            raster.at(y, x, 1) = k == 0 ? 0 : std::uint8_t(std::lround(map.u(y, x) * 255));
            raster.at(y, x, 2) = k == 0 ? 0 : std::uint8_t(std::lround(map.v(y, x) * 255));
        }
    }
    return raster;
}

void validate_map(const DenseBodyMap& map) {
    require(map.parts >= 1 && map.parts <= kMaxParts, ErrorClass::data, "bad part count");
    require(map.part.rows() > 0 && map.part.cols() > 0, ErrorClass::data, "empty map");
    require(map.u.rows() == map.part.rows() && map.u.cols() == map.part.cols() &&
                map.v.rows() == map.part.rows() && map.v.cols() == map.part.cols(),
            ErrorClass::data, "map grid shapes differ");
    require((map.part >= 0).all() && (map.part <= map.parts).all(), ErrorClass::data,
            "part index out of range");
    require((map.u >= 0).all() && (map.u <= 1).all() && (map.v >= 0).all() && (map.v <= 1).all(),
            ErrorClass::data, "uv out of [0,1]");
    require(((map.part != 0) || (map.u == 0 && map.v == 0)).all(), ErrorClass::data,
            "background pixels must have u = v = 0");
}

BinaryMask part_mask(const DenseBodyMap& map, const std::set<int>& parts_wanted) {
    for (int k : parts_wanted)
        require(k >= 1 && k <= map.parts, ErrorClass::invalid_part_group,
                "part index " + std::to_string(k) + " outside 1.." + std::to_string(map.parts));
    BinaryMask mask;
    mask.bits = GridB::Constant(map.part.rows(), map.part.cols(), false);
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            if (parts_wanted.count(map.part(y, x))) mask.bits(y, x) = true;
    return mask;
}

BinaryMask foreground_mask(const DenseBodyMap& map) {
    BinaryMask mask;
    mask.bits = map.part != 0;
    return mask;
}

} // namespace posegen
