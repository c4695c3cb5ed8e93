#include "posegen/inference.hpp"

#include "posegen/image.hpp"

#include <filesystem>
#include <fstream>

namespace posegen::infer {
namespace fs = std::filesystem;

namespace {

void require_part_model(const ModelBundle& m, const char* what) {
    require(!m.cfg.noparts, ErrorClass::config,
            std::string(what) + " needs a part-disentangled model; this checkpoint "
                                "was trained with a single flat appearance code");
}

// empty groups are legal: resampling nothing and merging nothing are no-ops
void check_group(const std::set<int>& group, int parts) {
    for (int p : group)
        require(p >= 1 && p <= parts, ErrorClass::invalid_part_group,
                "part " + std::to_string(p) + " outside 1.." + std::to_string(parts));
}

MatrixX tensor_as_matrix(const Tensor& t) {
    MatrixX m(t.dim(0), t.dim(1));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = t.at2(int(r), int(c));
    return m;
}

} // namespace

GaussianParams encode_appearance(const ModelBundle& m, const Tensor& image01,
                                 const DenseBodyMap& map) {
    TextureAtlas tex = extract_texture(image01, map, m.cfg.atlas_size);
    nets::EncoderOutput post = m.enc(ag::Var::constant(to_pm1(tex.texels)));
    return GaussianParams{tensor_as_matrix(post.mu.value()),
                          tensor_as_matrix(post.log_var.value())};
}

PartLatent latent_from_posterior(const GaussianParams& post, bool sample, Rng& rng) {
    if (sample) return sample_reparam(post, rng);
    return PartLatent{post.mu};
}

PartLatent prior_latent(const ModelBundle& m, Rng& rng) {
    return standard_normal_latent(m.cfg.parts, m.cfg.latent_dim, rng);
}

Tensor generate(const ModelBundle& m, const PartLatent& z, const DenseBodyMap& pose) {
    require(z.part_count() == m.cfg.parts && z.dims_per_part() == m.cfg.latent_dim,
            ErrorClass::config,
            "appearance code shape does not match the model configuration");
    WarpedNoiseImage field;
    if (m.cfg.noparts) {
        VectorX flat(z.values.size());
        for (int r = 0; r < z.values.rows(); ++r)
            for (int c = 0; c < z.values.cols(); ++c)
                flat[r * z.values.cols() + c] = z.values(r, c);
        field = warp_broadcast_noparts(flat, pose);
    } else {
        field = warp_broadcast(z, pose);
    }
    ag::Var img = m.gen(ag::Var::constant(field.values));
    return to_unit(img.value());
}

Tensor sample_appearance(const ModelBundle& m, const DenseBodyMap& pose, Rng& rng) {
    return generate(m, prior_latent(m, rng), pose);
}

Tensor pose_transfer(const ModelBundle& m, const Sample& source, const DenseBodyMap& pose,
                     bool sample_posterior, Rng& rng) {
    GaussianParams post = encode_appearance(m, source.image01, source.map);
    return generate(m, latent_from_posterior(post, sample_posterior, rng), pose);
}

PartLatent resample_group(const ModelBundle& m, const PartLatent& base,
                          const std::set<int>& group, Rng& rng) {
    require_part_model(m, "part resampling");
    check_group(group, m.cfg.parts);
    return resample_parts(base, group, rng);
}

Tensor garment_transfer(const ModelBundle& m, const Sample& person, const Sample& garment_from,
                        const std::set<int>& group, const DenseBodyMap& pose) {
    require_part_model(m, "garment transfer");
    check_group(group, m.cfg.parts);
    PartLatent z_body{encode_appearance(m, person.image01, person.map).mu};
    PartLatent z_garment{encode_appearance(m, garment_from.image01, garment_from.map).mu};
    return generate(m, merge_latents(z_body, z_garment, group), pose);
}

std::vector<Tensor> interpolate_images(const ModelBundle& m, const PartLatent& z1,
                                       const PartLatent& z2, int steps,
                                       const DenseBodyMap& pose) {
    require(steps >= 1, ErrorClass::config, "interpolation needs at least one step");
    std::vector<Tensor> out;
    for (int i = 0; i < steps; ++i) {
        Scalar t = steps == 1 ? 0.0 : Scalar(i) / Scalar(steps - 1);
        out.push_back(generate(m, interpolate(z1, z2, t), pose));
    }
    return out;
}

void write_image_grid(const std::string& out_dir, const std::string& name,
                      const std::vector<Tensor>& tiles01, int cols, nlohmann::json tiles_meta) {
    Tensor grid = tile_grid(tiles01, cols);
    fs::create_directories(out_dir);
    write_png((fs::path(out_dir) / (name + ".png")).string(), to_byte_image(grid));

    nlohmann::json j;
    j["rows"] = (int(tiles01.size()) + cols - 1) / cols;
    j["cols"] = cols;
    j["tile_height"] = tiles01[0].dim(1);
    j["tile_width"] = tiles01[0].dim(2);
    j["tiles"] = std::move(tiles_meta);
    std::ofstream f(fs::path(out_dir) / (name + ".json"));
    require(bool(f), ErrorClass::io, "cannot write grid manifest in " + out_dir);
    f << j.dump(2) << '\n';
}

} // namespace posegen::infer
