#pragma once

#include "posegen/image.hpp"

#include <set>

namespace posegen {

inline constexpr int kMaxParts = 24;

/** Per-pixel body-part correspondence: part index and surface (u,v).
 *
 *  part = 0 marks background; there u = v = 0. u runs along x inside a part's
 *  local frame, v along y, both in [0,1].
 */
struct DenseBodyMap {
    GridI part; // (H,W), values 0..parts
    GridS u;    // (H,W), [0,1]
    GridS v;    // (H,W), [0,1]
    int parts = kMaxParts;

    int height() const { return int(part.rows()); }
    int width() const { return int(part.cols()); }
};

struct BinaryMask {
    GridB bits; // (H,W)

    int count() const { return int(bits.count()); }
};

/** Parse an 8-bit IUV raster: channel 0 holds the literal part index,
 *  channels 1,2 hold U,V scaled by 255. Background (u,v) is forced to zero.
 *  Rejects any part index above `parts`. */
DenseBodyMap decode_iuv(const ByteImage& raster, int parts = kMaxParts);

/** Inverse of decode_iuv; round-trips bit-exactly on decoded maps. */
ByteImage encode_iuv(const DenseBodyMap& map);

void validate_map(const DenseBodyMap& map);

/** Mask of pixels whose part index is in `parts_wanted` (each in 1..parts). */
BinaryMask part_mask(const DenseBodyMap& map, const std::set<int>& parts_wanted);

BinaryMask foreground_mask(const DenseBodyMap& map);

} // namespace posegen
