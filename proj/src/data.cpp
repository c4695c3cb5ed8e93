#include "posegen/data.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace posegen {
namespace fs = std::filesystem;

DatasetIndex load_index(const std::string& root) {
    require(fs::is_directory(root), ErrorClass::io, "dataset root not found: " + root);
    DatasetIndex index;
    std::vector<std::string> identities;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) identities.push_back(entry.path().filename().string());
    std::sort(identities.begin(), identities.end());

    constexpr const char* kImgSuffix = ".img.png";
    for (const std::string& id : identities) {
        std::vector<std::string> stems;
        for (const auto& entry : fs::directory_iterator(fs::path(root) / id)) {
            const std::string name = entry.path().filename().string();
            if (name.size() > std::char_traits<char>::length(kImgSuffix) &&
                name.ends_with(kImgSuffix))
                stems.push_back(name.substr(0, name.size() - 8));
        }
        std::sort(stems.begin(), stems.end());
        for (const std::string& stem : stems) {
            DatasetRecord rec;
            rec.identity = id;
            rec.stem = stem;
            rec.image_path = (fs::path(root) / id / (stem + ".img.png")).string();
            rec.iuv_path = (fs::path(root) / id / (stem + ".iuv.png")).string();
            if (!fs::exists(rec.iuv_path)) {
                ++index.skipped_without_iuv;
                continue;
            }
            index.by_identity[id].push_back(int(index.records.size()));
            index.records.push_back(std::move(rec));
        }
    }
    if (index.skipped_without_iuv > 0)
        std::fprintf(stderr, "note: skipped %d image(s) without a body-map raster\n",
                     index.skipped_without_iuv);
    require(!index.records.empty(), ErrorClass::data,
            "dataset at " + root + " contains no usable records");
    return index;
}

Sample load_sample(const DatasetRecord& rec, int parts) {
    Sample s;
    s.image01 = to_unit_image(read_png(rec.image_path));
    s.map = decode_iuv(read_png(rec.iuv_path), parts);
    require(s.image01.dim(1) == s.map.height() && s.image01.dim(2) == s.map.width(),
            ErrorClass::data, "image and body map disagree on size: " + rec.image_path);
    return s;
}

PairSample sample_pair(const DatasetIndex& index, int parts, Rng& rng) {
    std::vector<const std::vector<int>*> eligible;
    std::vector<std::string> names;
    for (const auto& [id, recs] : index.by_identity)
        if (recs.size() >= 2) {
            eligible.push_back(&recs);
            names.push_back(id);
        }
    require(!eligible.empty(), ErrorClass::data,
            "no identity has two or more records; cannot form training pairs");
    const int pick = rng.uniform_int(int(eligible.size()));
    const std::vector<int>& recs = *eligible[pick];
    const int a = rng.uniform_int(int(recs.size()));
    int b = rng.uniform_int(int(recs.size()) - 1);
    if (b >= a) ++b;
    PairSample pair;
    pair.identity = names[pick];
    pair.source = load_sample(index.records[recs[a]], parts);
    pair.target = load_sample(index.records[recs[b]], parts);
    return pair;
}

namespace {

// Axis-aligned part geometry; all boxes are mutually disjoint by construction
// so the painted rasters are exact and collision-free.
struct Box {
    int part = 0;
    int x0 = 0, y0 = 0, w = 0, h = 0;
    bool ellipse = false;
};

struct Appearance {
    Scalar base[kSynthParts + 1][3]; // per part RGB in [0.2, 0.85]
    int stripe_period = 3;
};

Appearance draw_appearance(Rng& rng) {
    Appearance ap{};
    auto draw_rgb = [&](Scalar* rgb) {
        for (int c = 0; c < 3; ++c) rgb[c] = 0.2 + 0.65 * rng.uniform();
    };
    Scalar skin[3], shirt[3], pants[3];
    draw_rgb(skin);
    draw_rgb(shirt);
    draw_rgb(pants);
    for (int c = 0; c < 3; ++c) {
        ap.base[1][c] = skin[c];  // head
        ap.base[2][c] = shirt[c]; // torso
        ap.base[3][c] = shirt[c] * 0.9 + 0.05; // arms: sleeve tint
        ap.base[4][c] = shirt[c] * 0.9 + 0.05;
        ap.base[5][c] = pants[c]; // legs
        ap.base[6][c] = pants[c];
    }
    ap.stripe_period = 2 + rng.uniform_int(3); // 2..4
    return ap;
}

int scaled(int v, int s) { return std::max(1, (v * s + 32) / 64); }

std::vector<Box> draw_pose(int S, Rng& rng) {
    const int torso_w = scaled(10, S), torso_h = scaled(14, S);
    const int head_w = scaled(9, S), head_h = scaled(8, S);
    const int arm_w = scaled(4, S), arm_h = scaled(13, S);
    const int leg_w = scaled(4, S), leg_h = scaled(14, S);

    const int tx_lo = scaled(18, S), tx_hi = scaled(36, S);
    const int ty_lo = scaled(20, S), ty_hi = scaled(26, S);
    const int torso_x = tx_lo + rng.uniform_int(tx_hi - tx_lo + 1);
    const int torso_y = ty_lo + rng.uniform_int(ty_hi - ty_lo + 1);

    const int head_tilt = rng.uniform_int(5) - 2; // -2..2
    const int head_gap = 1 + rng.uniform_int(2);
    const int spread_l = rng.uniform_int(5), spread_r = rng.uniform_int(5); // 0..4
    const int voff_l = rng.uniform_int(2), voff_r = rng.uniform_int(2);     // 0..1
    const int leg_out_l = rng.uniform_int(3), leg_out_r = rng.uniform_int(3); // 0..2

    std::vector<Box> boxes;
    boxes.push_back({1, torso_x + (torso_w - head_w) / 2 + head_tilt,
                     torso_y - head_h - head_gap, head_w, head_h, true});
    boxes.push_back({2, torso_x, torso_y, torso_w, torso_h, false});
    boxes.push_back({3, torso_x - arm_w - spread_l, torso_y + voff_l, arm_w, arm_h, false});
    boxes.push_back({4, torso_x + torso_w + spread_r, torso_y + voff_r, arm_w, arm_h, false});
    boxes.push_back({5, torso_x + 1 - leg_out_l, torso_y + torso_h, leg_w, leg_h, false});
    boxes.push_back(
        {6, torso_x + torso_w - leg_w - 1 + leg_out_r, torso_y + torso_h, leg_w, leg_h, false});
    for (const Box& b : boxes)
        require(b.x0 >= 0 && b.y0 >= 0 && b.x0 + b.w <= S && b.y0 + b.h <= S,
                ErrorClass::internal, "figure part out of canvas");
    return boxes;
}

void paint(const std::vector<Box>& boxes, const Appearance& ap, int S, ByteImage& img,
           ByteImage& iuv) {
    auto to_byte = [](Scalar v) {
        return std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = to_byte(0.1); // background

    for (const Box& b : boxes)
        for (int yl = 0; yl < b.h; ++yl)
            for (int xl = 0; xl < b.w; ++xl) {
                if (b.ellipse) {
                    const Scalar dx = (xl + 0.5) / b.w - 0.5;
                    const Scalar dy = (yl + 0.5) / b.h - 0.5;
                    if (dx * dx + dy * dy > 0.25) continue;
                }
                const int y = b.y0 + yl, x = b.x0 + xl;
                const Scalar u = b.w > 1 ? Scalar(xl) / (b.w - 1) : 0.0;
                const Scalar v = b.h > 1 ? Scalar(yl) / (b.h - 1) : 0.0;
                const Scalar stripe =
                    ((yl / ap.stripe_period) % 2 == 0) ? 1.0 : 0.85;
                const Scalar shade = 0.85 + 0.15 * u;
                for (int c = 0; c < 3; ++c)
                    img.at(y, x, c) = to_byte(ap.base[b.part][c] * stripe * shade);
                iuv.at(y, x, 0) = std::uint8_t(b.part);
                iuv.at(y, x, 1) = std::uint8_t(std::lround(u * 255.0));
                iuv.at(y, x, 2) = std::uint8_t(std::lround(v * 255.0));
            }
}

} // namespace

void make_synthetic_dataset(const SynthSpec& spec, const std::string& root) {
    require(spec.identities >= 1 && spec.frames >= 1, ErrorClass::config,
            "synthetic dataset needs at least one identity and one frame");
    require(spec.image_size >= 48, ErrorClass::config,
            "synthetic figures need image_size of at least 48");
    fs::create_directories(root);
    std::ofstream listing(fs::path(root) / "train.txt");

    char buf[64];
    for (int id = 0; id < spec.identities; ++id) {
        std::snprintf(buf, sizeof buf, "id_%03d", id);
        const std::string identity = buf;
        fs::create_directories(fs::path(root) / identity);
        Rng ap_rng(Rng::derive_seed(spec.seed, "appearance." + identity));
        const Appearance ap = draw_appearance(ap_rng);

        for (int f = 0; f < spec.frames; ++f) {
            std::snprintf(buf, sizeof buf, "frame_%02d", f);
            const std::string stem = buf;
            Rng pose_rng(Rng::derive_seed(spec.seed, "pose." + identity + "." + stem));
            const std::vector<Box> boxes = draw_pose(spec.image_size, pose_rng);

            ByteImage img, iuv;
            img.height = img.width = iuv.height = iuv.width = spec.image_size;
            img.pixels.assign(size_t(spec.image_size) * spec.image_size * 3, 0);
            iuv.pixels.assign(size_t(spec.image_size) * spec.image_size * 3, 0);
            paint(boxes, ap, spec.image_size, img, iuv);

            // every emitted map must satisfy the container invariants
            validate_map(decode_iuv(iuv, kSynthParts));

            const fs::path dir = fs::path(root) / identity;
            write_png((dir / (stem + ".img.png")).string(), img);
            write_png((dir / (stem + ".iuv.png")).string(), iuv);
            listing << identity << '/' << stem << '\n';
        }
    }
}

} // namespace posegen
