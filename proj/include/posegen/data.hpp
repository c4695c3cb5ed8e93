#pragma once

#include "posegen/densepose.hpp"
#include "posegen/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace posegen {

/** One (image, body map) pair on disk: <root>/<identity>/<stem>.img.png and
 *  <stem>.iuv.png. */
struct DatasetRecord {
    std::string identity;
    std::string stem;
    std::string image_path;
    std::string iuv_path;
};

struct DatasetIndex {
    std::vector<DatasetRecord> records;
    std::map<std::string, std::vector<int>> by_identity; // identity -> record indices
    int skipped_without_iuv = 0;

    int size() const { return int(records.size()); }
};

/** Scan a dataset root (sorted, deterministic). Images without a matching IUV
 *  raster are dropped and counted; an empty result is an error. */
DatasetIndex load_index(const std::string& root);

struct Sample {
    Tensor image01; // (3,H,W) in [0,1]
    DenseBodyMap map;
};

Sample load_sample(const DatasetRecord& rec, int parts);

/** Source/target pair of the same identity in two poses. */
struct PairSample {
    Sample source;
    Sample target;
    std::string identity;
};

/** Uniformly pick an identity with at least two records, then two distinct
 *  records of it. */
PairSample sample_pair(const DatasetIndex& index, int parts, Rng& rng);

/** Synthetic figure dataset: blocky articulated mannequins with exact part
 *  and uv rasters. Geometry is collision-free by construction, so each
 *  part's pixels map injectively into its texture cell (for atlas sizes at
 *  least image_size). */
struct SynthSpec {
    int identities = 20;
    int frames = 4;
    int image_size = 64;
    std::uint64_t seed = 1;

    bool operator==(const SynthSpec&) const = default;
};

inline constexpr int kSynthParts = 6; // head, torso, arms, legs

/** Write the dataset under root; byte-identical for equal (spec, root). */
void make_synthetic_dataset(const SynthSpec& spec, const std::string& root);

} // namespace posegen
