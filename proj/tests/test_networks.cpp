#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include "posegen/networks.hpp"

using namespace posegen;
using testutil::rand_tensor;

namespace {

NetConfig tiny_config() {
    NetConfig cfg;
    cfg.image_size = 16;
    cfg.atlas_size = 64;
    cfg.parts = 6;
    cfg.latent_dim = 4;
    cfg.base_channels = 4;
    return cfg;
}

bool stores_equal(const nn::ParamStore& a, const nn::ParamStore& b) {
    if (a.entries().size() != b.entries().size()) return false;
    for (size_t i = 0; i < a.entries().size(); ++i) {
        const auto& [na, va] = a.entries()[i];
        const auto& [nb, vb] = b.entries()[i];
        if (na != nb || !va.value().same_dims(vb.value())) return false;
        if ((va.value().raw() != vb.value().raw()).any()) return false;
    }
    return true;
}

} // namespace

TEST_CASE("config validation accepts the documented ranges only") {
    CHECK_NOTHROW(NetConfig{}.validate());
    CHECK_NOTHROW(tiny_config().validate());
    NetConfig big;
    big.atlas_size = 256;
    big.parts = 24;
    big.latent_dim = 16;
    CHECK_NOTHROW(big.validate());

    auto reject = [](auto mutate) {
        NetConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), Error);
    };
    reject([](NetConfig& c) { c.image_size = 8; });   // too small
    reject([](NetConfig& c) { c.image_size = 20; });  // not a multiple of 8
    reject([](NetConfig& c) { c.atlas_size = 32; });  // too small
    reject([](NetConfig& c) { c.atlas_size = 100; }); // not a multiple of 32
    reject([](NetConfig& c) { c.parts = 0; });
    reject([](NetConfig& c) { c.parts = 25; });
    reject([](NetConfig& c) { c.latent_dim = 0; });
    reject([](NetConfig& c) { c.base_channels = 2; });
}

TEST_CASE("latent channel width depends on the wiring mode") {
    NetConfig c = tiny_config();
    CHECK(c.latent_channels() == 4);
    c.noparts = true;
    CHECK(c.latent_channels() == 24);
}

TEST_CASE("encoder emits one posterior row per part") {
    Rng rng(11);
    for (auto [atlas, parts, dims] : {std::tuple{64, 6, 4}, std::tuple{256, 24, 16}}) {
        NetConfig cfg = tiny_config();
        cfg.atlas_size = atlas;
        cfg.parts = parts;
        cfg.latent_dim = dims;
        ModelBundle m = create_models(cfg, 3);
        nets::EncoderOutput out =
            m.enc(ag::Var::constant(rand_tensor({3, atlas, atlas}, rng)));
        CHECK(out.mu.value().dims() == std::vector<int>{parts, dims});
        CHECK(out.log_var.value().dims() == std::vector<int>{parts, dims});
    }
}

TEST_CASE("generator maps a latent field to a tanh image of the same size") {
    Rng rng(12);
    NetConfig cfg = tiny_config();
    ModelBundle m = create_models(cfg, 4);
    ag::Var img = m.gen(ag::Var::constant(
        rand_tensor({cfg.latent_channels(), cfg.image_size, cfg.image_size}, rng)));
    CHECK(img.value().dims() == std::vector<int>{3, cfg.image_size, cfg.image_size});
    CHECK(img.value().raw().abs().maxCoeff() <= 1.0);

    cfg.noparts = true;
    ModelBundle flat = create_models(cfg, 4);
    ag::Var img2 = flat.gen(ag::Var::constant(
        rand_tensor({cfg.latent_channels(), cfg.image_size, cfg.image_size}, rng)));
    CHECK(img2.value().dims() == std::vector<int>{3, cfg.image_size, cfg.image_size});
}

TEST_CASE("discriminator yields logits and feature pyramids at two scales") {
    Rng rng(13);
    NetConfig cfg = tiny_config();
    ModelBundle m = create_models(cfg, 5);
    ag::Var img = ag::Var::constant(rand_tensor({3, cfg.image_size, cfg.image_size}, rng));
    ag::Var z = ag::Var::constant(
        rand_tensor({cfg.latent_channels(), cfg.image_size, cfg.image_size}, rng));
    nets::DiscriminatorOutput out = m.disc(img, z);
    REQUIRE(int(out.logits.size()) == nets::Discriminator::kScales);
    REQUIRE(int(out.features.size()) == nets::Discriminator::kScales);
    for (int s = 0; s < nets::Discriminator::kScales; ++s) {
        CHECK(out.logits[s].value().dim(0) == 1);
        // three stride-2 layers per scale; the second scale pools its input
        CHECK(out.logits[s].value().dim(1) * (s == 0 ? 8 : 16) == cfg.image_size);
        CHECK(out.features[s].size() == 4);
        for (const ag::Var& f : out.features[s]) CHECK(!f.value().empty());
    }
}

TEST_CASE("initialization is seed-deterministic per network") {
    NetConfig cfg = tiny_config();
    ModelBundle a = create_models(cfg, 42);
    ModelBundle b = create_models(cfg, 42);
    ModelBundle c = create_models(cfg, 43);
    CHECK(stores_equal(a.enc_params, b.enc_params));
    CHECK(stores_equal(a.gen_params, b.gen_params));
    CHECK(stores_equal(a.disc_params, b.disc_params));
    CHECK(!stores_equal(a.enc_params, c.enc_params));
    CHECK(!stores_equal(a.gen_params, c.gen_params));
}

TEST_CASE("forward passes are deterministic") {
    Rng rng(14);
    NetConfig cfg = tiny_config();
    ModelBundle m = create_models(cfg, 6);
    Tensor atlas = rand_tensor({3, cfg.atlas_size, cfg.atlas_size}, rng);
    Tensor a = m.enc(ag::Var::constant(atlas)).mu.value();
    Tensor b = m.enc(ag::Var::constant(atlas)).mu.value();
    CHECK((a.raw() == b.raw()).all());
}

TEST_CASE("one backward pass reaches every parameter of all three networks") {
    Rng rng(15);
    NetConfig cfg = tiny_config();
    ModelBundle m = create_models(cfg, 7);

    nets::EncoderOutput post =
        m.enc(ag::Var::constant(rand_tensor({3, cfg.atlas_size, cfg.atlas_size}, rng)));
    Tensor eps = rand_tensor({cfg.parts, cfg.latent_dim}, rng);
    ag::Var z = ag::reparam(post.mu, post.log_var, eps);

    GridI part(cfg.image_size, cfg.image_size);
    for (int y = 0; y < part.rows(); ++y)
        for (int x = 0; x < part.cols(); ++x) part(y, x) = 1 + (y * 7 + x) % cfg.parts;
    DenseBodyMap map = testutil::map_from_parts(part, cfg.parts);
    ag::Var field = ag::warp_broadcast(z, map);
    ag::Var img = m.gen(field);
    nets::DiscriminatorOutput d = m.disc(img, field);

    std::vector<std::pair<ag::Var, Scalar>> terms;
    for (const ag::Var& l : d.logits) terms.emplace_back(ag::mse_to(l, 1.0), 1.0);
    terms.emplace_back(ag::kl_std_normal(post.mu, post.log_var), 1.0);
    ag::backward(ag::wsum(terms));

    CHECK(m.enc_params.all_have_grads());
    CHECK(m.gen_params.all_have_grads());
    CHECK(m.disc_params.all_have_grads());
}
