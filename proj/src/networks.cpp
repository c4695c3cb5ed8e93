#include "posegen/networks.hpp"

namespace posegen {

void NetConfig::validate() const {
    require(image_size >= 16 && image_size % 8 == 0, ErrorClass::config,
            "image_size must be a multiple of 8 and at least 16, got " +
                std::to_string(image_size));
    require(atlas_size >= 64 && atlas_size % 32 == 0, ErrorClass::config,
            "atlas_size must be a multiple of 32 and at least 64, got " +
                std::to_string(atlas_size));
    require(parts >= 1 && parts <= kMaxParts, ErrorClass::config,
            "parts must be in 1.." + std::to_string(kMaxParts) + ", got " +
                std::to_string(parts));
    require(latent_dim >= 1, ErrorClass::config, "latent_dim must be positive");
    require(base_channels >= 4, ErrorClass::config, "base_channels must be at least 4");
}

namespace nets {

Encoder::Encoder(const NetConfig& cfg, nn::ParamStore& ps, Rng& rng) : cfg_(cfg) {
    const int b = cfg.base_channels;
    stem_ = nn::Conv2d(ps, "stem", 3, b, 3, ag::same_conv(3), rng);
    const int widths[6] = {b, 2 * b, 4 * b, 4 * b, 4 * b, 4 * b};
    for (int i = 0; i < 5; ++i) {
        ResDown blk;
        const std::string tag = "down" + std::to_string(i);
        blk.main1 = nn::Conv2d(ps, tag + ".main1", widths[i], widths[i + 1], 3,
                               ag::halving_conv(3), rng);
        blk.main2 =
            nn::Conv2d(ps, tag + ".main2", widths[i + 1], widths[i + 1], 3, ag::same_conv(3), rng);
        blk.skip = nn::Conv2d(ps, tag + ".skip", widths[i], widths[i + 1], 1, ag::same_conv(1), rng);
        blocks_.push_back(std::move(blk));
    }
    head_ = nn::Linear(ps, "head", 4 * b, 2 * cfg.parts * cfg.latent_dim, rng);
}

EncoderOutput Encoder::operator()(const ag::Var& texture) const {
    require(texture.value().ndim() == 3 && texture.value().dim(0) == 3 &&
                texture.value().dim(1) == cfg_.atlas_size &&
                texture.value().dim(2) == cfg_.atlas_size,
            ErrorClass::internal, "encoder expects a (3,A,A) texture");
    ag::Var h = ag::relu(ag::instance_norm(stem_(texture)));
    for (const ResDown& blk : blocks_) {
        ag::Var main = ag::relu(ag::instance_norm(blk.main1(h)));
        main = ag::instance_norm(blk.main2(main));
        ag::Var skip = blk.skip(ag::avg_pool2(h));
        h = ag::relu(ag::add(main, skip));
    }
    h = ag::global_avg_pool(h);
    ag::Var stats = head_(h);
    const int mn = cfg_.parts * cfg_.latent_dim;
    EncoderOutput out;
    out.mu = ag::reshape(ag::slice_flat(stats, 0, mn), {cfg_.parts, cfg_.latent_dim});
    out.log_var = ag::reshape(ag::slice_flat(stats, mn, mn), {cfg_.parts, cfg_.latent_dim});
    return out;
}

Generator::Generator(const NetConfig& cfg, nn::ParamStore& ps, Rng& rng) : cfg_(cfg) {
    const int b = cfg.base_channels;
    stem_ = nn::Conv2d(ps, "stem", cfg.latent_channels(), b, 7, ag::same_conv(7), rng);
    const int widths[4] = {b, 2 * b, 4 * b, 8 * b};
    for (int i = 0; i < 3; ++i)
        downs_.push_back(nn::Conv2d(ps, "down" + std::to_string(i), widths[i], widths[i + 1], 3,
                                    ag::halving_conv(3), rng));
    for (int i = 0; i < 6; ++i) {
        ResBlock blk;
        const std::string tag = "res" + std::to_string(i);
        blk.c1 = nn::Conv2d(ps, tag + ".c1", 8 * b, 8 * b, 3, ag::same_conv(3), rng);
        blk.c2 = nn::Conv2d(ps, tag + ".c2", 8 * b, 8 * b, 3, ag::same_conv(3), rng);
        blocks_.push_back(std::move(blk));
    }
    for (int i = 0; i < 3; ++i)
        ups_.push_back(nn::Conv2d(ps, "up" + std::to_string(i), widths[3 - i], widths[2 - i], 3,
                                  ag::same_conv(3), rng));
    head_ = nn::Conv2d(ps, "head", b, 3, 7, ag::same_conv(7), rng);
}

ag::Var Generator::operator()(const ag::Var& z_image) const {
    require(z_image.value().ndim() == 3 && z_image.value().dim(0) == cfg_.latent_channels() &&
                z_image.value().dim(1) == cfg_.image_size &&
                z_image.value().dim(2) == cfg_.image_size,
            ErrorClass::internal, "generator expects a (latent_channels,H,W) field, got " +
                                      dims_str(z_image.value().dims()));
    ag::Var h = ag::relu(ag::instance_norm(stem_(z_image)));
    for (const nn::Conv2d& down : downs_) h = ag::relu(ag::instance_norm(down(h)));
    for (const ResBlock& blk : blocks_) {
        ag::Var r = ag::relu(ag::instance_norm(blk.c1(h)));
        r = ag::instance_norm(blk.c2(r));
        h = ag::add(h, r);
    }
    for (const nn::Conv2d& up : ups_)
        h = ag::relu(ag::instance_norm(up(ag::upsample_nearest2(h))));
    return ag::tanh(head_(h));
}

Discriminator::Discriminator(const NetConfig& cfg, nn::ParamStore& ps, Rng& rng) : cfg_(cfg) {
    const int b = cfg.base_channels;
    const int cin = 3 + cfg.latent_channels();
    for (int s = 0; s < kScales; ++s) {
        Scale sc;
        const std::string tag = "scale" + std::to_string(s);
        sc.l0 = nn::Conv2d(ps, tag + ".l0", cin, b, 4, ag::halving_conv(4), rng);
        sc.l1 = nn::Conv2d(ps, tag + ".l1", b, 2 * b, 4, ag::halving_conv(4), rng);
        sc.l2 = nn::Conv2d(ps, tag + ".l2", 2 * b, 4 * b, 4, ag::halving_conv(4), rng);
        sc.l3 = nn::Conv2d(ps, tag + ".l3", 4 * b, 8 * b, 4, ag::same_conv(4), rng);
        sc.l4 = nn::Conv2d(ps, tag + ".l4", 8 * b, 1, 4, ag::same_conv(4), rng);
        scales_.push_back(std::move(sc));
    }
}

DiscriminatorOutput Discriminator::operator()(const ag::Var& image,
                                              const ag::Var& z_image) const {
    require(image.value().dim(1) == z_image.value().dim(1) &&
                image.value().dim(2) == z_image.value().dim(2),
            ErrorClass::internal, "discriminator inputs must share spatial dims");
    DiscriminatorOutput out;
    ag::Var x = ag::concat_channels(image, z_image);
    for (int s = 0; s < kScales; ++s) {
        if (s > 0) x = ag::avg_pool2(x);
        const Scale& sc = scales_[s];
        std::vector<ag::Var> feats;
        ag::Var h = ag::leaky_relu(sc.l0(x));
        feats.push_back(h);
        h = ag::leaky_relu(ag::instance_norm(sc.l1(h)));
        feats.push_back(h);
        h = ag::leaky_relu(ag::instance_norm(sc.l2(h)));
        feats.push_back(h);
        h = ag::leaky_relu(ag::instance_norm(sc.l3(h)));
        feats.push_back(h);
        out.logits.push_back(sc.l4(h));
        out.features.push_back(std::move(feats));
    }
    return out;
}

} // namespace nets

ModelBundle create_models(const NetConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelBundle m;
    m.cfg = cfg;
    Rng enc_rng(Rng::derive_seed(seed, "init.enc"));
    Rng gen_rng(Rng::derive_seed(seed, "init.gen"));
    Rng disc_rng(Rng::derive_seed(seed, "init.disc"));
    m.enc = nets::Encoder(cfg, m.enc_params, enc_rng);
    m.gen = nets::Generator(cfg, m.gen_params, gen_rng);
    m.disc = nets::Discriminator(cfg, m.disc_params, disc_rng);
    return m;
}

} // namespace posegen
