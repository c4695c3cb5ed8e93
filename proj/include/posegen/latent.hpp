#pragma once

#include "posegen/densepose.hpp"
#include "posegen/rng.hpp"

#include <set>

namespace posegen {

/** Per-part appearance code: row k-1 is the N-vector owned by part k. */
struct PartLatent {
    MatrixX values; // (M,N)

    int part_count() const { return int(values.rows()); }
    int dims_per_part() const { return int(values.cols()); }
};

/** Diagonal Gaussian over a PartLatent; sigma is carried as log-variance. */
struct GaussianParams {
    MatrixX mu;      // (M,N)
    MatrixX log_var; // (M,N)
};

/** Per-pixel latent field: background pixels are exactly zero, pixels of one
 *  part region all carry that part's vector. Stored as (N,H,W). */
struct WarpedNoiseImage {
    Tensor values;

    int channels() const { return values.dim(0); }
    int height() const { return values.dim(1); }
    int width() const { return values.dim(2); }
};

PartLatent standard_normal_latent(int parts, int dims, Rng& rng);

/** z = mu + exp(log_var/2) * eps, eps ~ N(0,1) from rng (row-major order). */
PartLatent sample_reparam(const GaussianParams& params, Rng& rng);

/** Closed-form KL(N(mu,sigma^2) || N(0,I)) = 0.5 sum(mu^2 + sigma^2 - log sigma^2 - 1). */
Scalar kl_to_standard_normal(const GaussianParams& params);

/** Broadcast row z[k] to every pixel of part k's region; background stays 0. */
WarpedNoiseImage warp_broadcast(const PartLatent& z, const DenseBodyMap& map);

/** Ablation mode: one flat M*N vector broadcast over the whole foreground. */
WarpedNoiseImage warp_broadcast_noparts(const VectorX& z_flat, const DenseBodyMap& map);

/** Replace the rows in `parts` with fresh standard-normal draws (ascending
 *  part order); all other rows are left bit-identical. */
PartLatent resample_parts(const PartLatent& z, const std::set<int>& parts, Rng& rng);

/** Row p from z_garment when p is in garment_parts, else from z_body. */
PartLatent merge_latents(const PartLatent& z_body, const PartLatent& z_garment,
                         const std::set<int>& garment_parts);

/** z1*t + z2*(1-t). Note the convention: t=0 yields z2 and t=1 yields z1. */
PartLatent interpolate(const PartLatent& z1, const PartLatent& z2, Scalar t);

// Flat row-major serialization with an (M,N) header, used by the CLI to
// save/restore appearance codes.
void save_latent(const PartLatent& z, const std::string& path);
PartLatent load_latent(const std::string& path);

} // namespace posegen
