#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include "posegen/losses.hpp"

using namespace posegen;
using testutil::rand_tensor;

namespace {

ag::Var scalar_var(Scalar v) { return ag::Var::constant(Tensor::scalar(v)); }

ag::Var logit(std::initializer_list<Scalar> vals) {
    Tensor t = Tensor::zeros({1, 1, int(vals.size())});
    int i = 0;
    for (Scalar v : vals) t[i++] = v;
    return ag::Var::constant(t);
}

} // namespace

TEST_CASE("weighted total applies the reference weights") {
    loss::TermVars t{scalar_var(1), scalar_var(1), scalar_var(1), scalar_var(1), scalar_var(1)};
    LossWeights w;
    CHECK(loss::weighted_total(t, w).value().item() == doctest::Approx(26.01).epsilon(1e-12));

    // each term feeds in with exactly its own weight
    loss::TermVars only_kl{scalar_var(0), scalar_var(0), scalar_var(0), scalar_var(0),
                           scalar_var(3)};
    CHECK(loss::weighted_total(only_kl, w).value().item() ==
          doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("perceptual loss over the identity extractor is the mean L1") {
    Rng rng(21);
    loss::PixelFeatureExtractor fx;
    Tensor target = rand_tensor({3, 8, 8}, rng);
    Tensor gen = target;
    gen.raw() += 0.1;
    ag::Var d = loss::perceptual_loss(fx, ag::Var::constant(gen), ag::Var::constant(target));
    CHECK(d.value().item() == doctest::Approx(0.1).epsilon(1e-12));
    ag::Var zero =
        loss::perceptual_loss(fx, ag::Var::constant(target), ag::Var::constant(target));
    CHECK(zero.value().item() == 0.0);
}

TEST_CASE("stub extractor is frozen, deterministic and differentiable") {
    Rng rng(22);
    loss::StubFeatureExtractor fx1, fx2;
    Tensor img = rand_tensor({3, 16, 16}, rng);
    auto l1 = fx1(ag::Var::constant(img));
    auto l2 = fx2(ag::Var::constant(img));
    REQUIRE(l1.size() == 3);
    REQUIRE(l2.size() == 3);
    for (size_t j = 0; j < l1.size(); ++j) {
        CHECK(!l1[j].value().empty());
        CHECK((l1[j].value().raw() == l2[j].value().raw()).all());
    }
    // spatial pyramid halves per stage
    CHECK(l1[0].value().dim(1) == 8);
    CHECK(l1[1].value().dim(1) == 4);
    CHECK(l1[2].value().dim(1) == 2);

    Tensor other = rand_tensor({3, 16, 16}, rng);
    testutil::check_gradients(
        {img, other},
        [&](const std::vector<ag::Var>& v) { return loss::perceptual_loss(fx1, v[0], v[1]); },
        // small h keeps the worst-case error of differencing across a leaky-relu
        // kink (~ slope_jump * h / 4) well inside the tolerance
        1e-4, 5e-4);
}

TEST_CASE("lsgan objectives match their algebra") {
    // single scale: perfect real logits, fake logits at 0.5
    ag::Var d1 = loss::lsgan_d_loss({logit({1, 1})}, {logit({0.5})});
    CHECK(d1.value().item() == doctest::Approx(0.5 * 0.25).epsilon(1e-12));

    // two scales average; second scale contributes 0.5*(mse(0,1)+mse(1,0))/2
    ag::Var d2 = loss::lsgan_d_loss({logit({1, 1}), logit({0})}, {logit({0.5}), logit({1})});
    CHECK(d2.value().item() ==
          doctest::Approx(0.5 * (0.5 * 0.25) + 0.5 * (0.5 * 1 + 0.5 * 1)).epsilon(1e-12));

    ag::Var g = loss::lsgan_g_loss({logit({0, 0.5}), logit({1})});
    CHECK(g.value().item() == doctest::Approx(0.5 * ((1.0 + 0.25) / 2) + 0.5 * 0).epsilon(1e-12));

    CHECK_THROWS_AS(loss::lsgan_d_loss({logit({1})}, {}), Error);
}

TEST_CASE("feature matching averages per layer and detaches the real branch") {
    Rng rng(23);
    nets::DiscriminatorOutput real, fake;
    std::vector<ag::Var> real_params, fake_params;
    real.features.resize(2);
    fake.features.resize(2);
    Scalar expect = 0;
    for (int s = 0; s < 2; ++s)
        for (int l = 0; l < 2; ++l) {
            Tensor a = rand_tensor({2, 3, 3}, rng), b = rand_tensor({2, 3, 3}, rng);
            real_params.push_back(ag::Var::param(a));
            fake_params.push_back(ag::Var::param(b));
            real.features[s].push_back(real_params.back());
            fake.features[s].push_back(fake_params.back());
            expect += (a.raw() - b.raw()).abs().mean() / (2.0 * 2.0);
        }
    ag::Var fm = loss::feature_matching_loss(real, fake);
    CHECK(fm.value().item() == doctest::Approx(expect).epsilon(1e-9));

    ag::backward(fm);
    for (const ag::Var& p : fake_params) CHECK(!p.grad().empty());
    for (const ag::Var& p : real_params) CHECK(p.grad().empty()); // detached
}

TEST_CASE("head box covers the region with a grown, clamped margin") {
    GridI part = GridI::Zero(20, 20);
    for (int y = 4; y <= 8; ++y)
        for (int x = 10; x <= 13; ++x) part(y, x) = 1; // 5x4 head region
    DenseBodyMap map = testutil::map_from_parts(part, 6);

    loss::CropBox box = loss::head_box(map, {1}, 0.2);
    // grow_y = ceil(5*0.2) = 1, grow_x = ceil(4*0.2) = 1
    CHECK(box.y0 == 3);
    CHECK(box.x0 == 9);
    CHECK(box.h == 7);
    CHECK(box.w == 6);

    // margin clamps at the canvas border
    GridI corner = GridI::Zero(10, 10);
    corner(0, 0) = 1;
    loss::CropBox c = loss::head_box(testutil::map_from_parts(corner, 6), {1}, 0.2);
    CHECK(c.y0 == 0);
    CHECK(c.x0 == 0);
    CHECK(c.h == 2);
    CHECK(c.w == 2);

    loss::CropBox none = loss::head_box(map, {3}, 0.2);
    CHECK(none.empty());
}

TEST_CASE("face identity loss is zero for identical crops and without a head") {
    Rng rng(24);
    loss::StubFaceEmbedder fe;
    GridI part = GridI::Zero(40, 40);
    for (int y = 2; y <= 12; ++y)
        for (int x = 14; x <= 24; ++x) part(y, x) = 1;
    DenseBodyMap map = testutil::map_from_parts(part, 6);

    Tensor img = rand_tensor({3, 40, 40}, rng);
    ag::Var same = loss::face_identity_loss(fe, ag::Var::constant(img),
                                            ag::Var::constant(img), map, {1});
    CHECK(same.value().item() == 0.0);

    Tensor other = rand_tensor({3, 40, 40}, rng);
    ag::Var diff = loss::face_identity_loss(fe, ag::Var::constant(img),
                                            ag::Var::constant(other), map, {1});
    CHECK(diff.value().item() > 0.0);

    // no head pixels -> hard zero, no graph surprises
    DenseBodyMap headless = testutil::map_from_parts(GridI::Zero(40, 40), 6);
    ag::Var none = loss::face_identity_loss(fe, ag::Var::constant(img),
                                            ag::Var::constant(other), headless, {1});
    CHECK(none.value().item() == 0.0);

    // gradient reaches the generated image through crop + resize + embedding
    testutil::check_gradients(
        {img},
        [&](const std::vector<ag::Var>& v) {
            return loss::face_identity_loss(fe, v[0], ag::Var::constant(other), map, {1});
        },
        1e-4, 5e-4);
}
