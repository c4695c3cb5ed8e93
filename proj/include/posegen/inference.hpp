#pragma once

#include "posegen/atlas.hpp"
#include "posegen/data.hpp"
#include "posegen/latent.hpp"
#include "posegen/networks.hpp"

#include <json.hpp>

#include <set>

namespace posegen::infer {

/** Posterior over the appearance code of one observed (image, map) pair. */
GaussianParams encode_appearance(const ModelBundle& m, const Tensor& image01,
                                 const DenseBodyMap& map);

/** Posterior mean by default; a reparameterized draw when `sample` is set. */
PartLatent latent_from_posterior(const GaussianParams& post, bool sample, Rng& rng);

/** Appearance draw from the prior N(0,I). */
PartLatent prior_latent(const ModelBundle& m, Rng& rng);

/** Render an appearance code in a target pose; returns a [0,1] image. */
Tensor generate(const ModelBundle& m, const PartLatent& z, const DenseBodyMap& pose);

/** New appearance in the given pose, z ~ N(0,I). */
Tensor sample_appearance(const ModelBundle& m, const DenseBodyMap& pose, Rng& rng);

/** Re-render the person from `source` in `pose`, keeping appearance. */
Tensor pose_transfer(const ModelBundle& m, const Sample& source, const DenseBodyMap& pose,
                     bool sample_posterior, Rng& rng);

/** Keep `base` but redraw the rows of `group` from the prior. Requires a
 *  part-disentangled model. */
PartLatent resample_group(const ModelBundle& m, const PartLatent& base,
                          const std::set<int>& group, Rng& rng);

/** Appearance of `person` wearing `garment_from`'s rows for `group`.
 *  Requires a part-disentangled model. */
Tensor garment_transfer(const ModelBundle& m, const Sample& person, const Sample& garment_from,
                        const std::set<int>& group, const DenseBodyMap& pose);

/** `steps` renderings along the line between two appearance codes; the blend
 *  runs from z2 (first tile) to z1 (last tile). */
std::vector<Tensor> interpolate_images(const ModelBundle& m, const PartLatent& z1,
                                       const PartLatent& z2, int steps,
                                       const DenseBodyMap& pose);

/** Tile [0,1] images into <out_dir>/<name>.png and write a sidecar
 *  <out_dir>/<name>.json carrying per-tile metadata plus grid geometry. */
void write_image_grid(const std::string& out_dir, const std::string& name,
                      const std::vector<Tensor>& tiles01, int cols, nlohmann::json tiles_meta);

} // namespace posegen::infer
