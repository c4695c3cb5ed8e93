#pragma once

#include "posegen/nn.hpp"

namespace posegen {

/** Shared shape/width knobs for the three networks.
 *
 *  noparts switches to the ablation wiring: the appearance code collapses to
 *  one flat vector of parts*latent_dim entries broadcast over the whole
 *  foreground instead of one latent_dim row per body part.
 */
struct NetConfig {
    int image_size = 64;    // multiple of 8 (three generator halvings)
    int atlas_size = 64;    // multiple of 32 (five encoder halvings)
    int parts = 6;          // 1..24
    int latent_dim = 4;
    int base_channels = 16;
    bool noparts = false;

    // channel count of the warped latent field the generator/discriminator see
    int latent_channels() const { return noparts ? parts * latent_dim : latent_dim; }

    void validate() const;
    bool operator==(const NetConfig&) const = default;
};

namespace nets {

struct EncoderOutput {
    ag::Var mu;      // (M,N)
    ag::Var log_var; // (M,N)
};

/** Texture atlas -> posterior over the per-part appearance code.
 *  Stem conv, five stride-2 residual blocks, global average pool, one FC
 *  head emitting mean and log-variance. */
class Encoder {
public:
    Encoder() = default;
    Encoder(const NetConfig& cfg, nn::ParamStore& ps, Rng& rng);

    EncoderOutput operator()(const ag::Var& texture) const; // (3,A,A) in [-1,1]

private:
    struct ResDown {
        nn::Conv2d main1, main2, skip;
    };
    NetConfig cfg_;
    nn::Conv2d stem_;
    std::vector<ResDown> blocks_;
    nn::Linear head_;
};

/** Warped latent field -> image in [-1,1]. Stem, three stride-2 downs, six
 *  residual blocks, three nearest-neighbour ups, tanh head. */
class Generator {
public:
    Generator() = default;
    Generator(const NetConfig& cfg, nn::ParamStore& ps, Rng& rng);

    ag::Var operator()(const ag::Var& z_image) const; // (latent_channels,H,W)

private:
    struct ResBlock {
        nn::Conv2d c1, c2;
    };
    NetConfig cfg_;
    nn::Conv2d stem_, head_;
    std::vector<nn::Conv2d> downs_, ups_;
    std::vector<ResBlock> blocks_;
};

struct DiscriminatorOutput {
    std::vector<ag::Var> logits;                 // one patch-logit map per scale
    std::vector<std::vector<ag::Var>> features;  // per scale, post-activation maps
};

/** Two-scale patch discriminator over (image, warped latent field) pairs;
 *  the second scale sees both inputs pooled to half resolution. */
class Discriminator {
public:
    Discriminator() = default;
    Discriminator(const NetConfig& cfg, nn::ParamStore& ps, Rng& rng);

    DiscriminatorOutput operator()(const ag::Var& image, const ag::Var& z_image) const;

    static constexpr int kScales = 2;

private:
    struct Scale {
        nn::Conv2d l0, l1, l2, l3, l4;
    };
    NetConfig cfg_;
    std::vector<Scale> scales_;
};

} // namespace nets

/** The three networks plus their parameter tables and the training step
 *  counter; everything a checkpoint persists about model state. */
struct ModelBundle {
    NetConfig cfg;
    nn::ParamStore enc_params, gen_params, disc_params;
    nets::Encoder enc;
    nets::Generator gen;
    nets::Discriminator disc;
    long long step = 0;
};

/** Build freshly initialized networks; layer init draws come from independent
 *  per-network substreams of `seed`. */
ModelBundle create_models(const NetConfig& cfg, std::uint64_t seed);

} // namespace posegen
