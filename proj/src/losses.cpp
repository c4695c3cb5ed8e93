#include "posegen/losses.hpp"

#include <cmath>

namespace posegen::loss {
namespace {

// frozen He-style init so stub activations stay O(1) across stages
ag::Var frozen_conv_weight(int cout, int cin, int k, Rng& rng) {
    Tensor w = Tensor::zeros({cout, cin, k, k});
    const Scalar std_dev = std::sqrt(2.0 / (cin * k * k));
    for (int i = 0; i < w.size(); ++i) w[i] = std_dev * rng.normal();
    return ag::Var::constant(std::move(w));
}

ag::Var frozen_linear_weight(int out, int in, Rng& rng) {
    Tensor w = Tensor::zeros({out, in});
    const Scalar std_dev = std::sqrt(2.0 / in);
    for (int i = 0; i < w.size(); ++i) w[i] = std_dev * rng.normal();
    return ag::Var::constant(std::move(w));
}

ag::Var zero_bias(int n) { return ag::Var::constant(Tensor::zeros({n})); }

} // namespace

StubFeatureExtractor::StubFeatureExtractor() {
    Rng rng(0x7CEB5EEDULL);
    w1_ = frozen_conv_weight(8, 3, 3, rng);
    b1_ = zero_bias(8);
    w2_ = frozen_conv_weight(16, 8, 3, rng);
    b2_ = zero_bias(16);
    w3_ = frozen_conv_weight(16, 16, 3, rng);
    b3_ = zero_bias(16);
}

std::vector<ag::Var> StubFeatureExtractor::operator()(const ag::Var& image) const {
    std::vector<ag::Var> layers;
    ag::Var h = ag::relu(ag::conv2d(image, w1_, b1_, ag::halving_conv(3)));
    layers.push_back(h);
    h = ag::relu(ag::conv2d(h, w2_, b2_, ag::halving_conv(3)));
    layers.push_back(h);
    h = ag::relu(ag::conv2d(h, w3_, b3_, ag::halving_conv(3)));
    layers.push_back(h);
    return layers;
}

StubFaceEmbedder::StubFaceEmbedder() {
    Rng rng(0xFACE5EEDULL);
    w1_ = frozen_conv_weight(8, 3, 3, rng);
    b1_ = zero_bias(8);
    w2_ = frozen_conv_weight(16, 8, 3, rng);
    b2_ = zero_bias(16);
    wf_ = frozen_linear_weight(32, 16, rng);
    bf_ = zero_bias(32);
}

ag::Var StubFaceEmbedder::operator()(const ag::Var& face_crop) const {
    require(face_crop.value().ndim() == 3 && face_crop.value().dim(0) == 3 &&
                face_crop.value().dim(1) == input_size() &&
                face_crop.value().dim(2) == input_size(),
            ErrorClass::internal, "face embedder expects a (3,32,32) crop");
    ag::Var h = ag::relu(ag::conv2d(face_crop, w1_, b1_, ag::halving_conv(3)));
    h = ag::relu(ag::conv2d(h, w2_, b2_, ag::halving_conv(3)));
    h = ag::global_avg_pool(h);
    return ag::linear(h, wf_, bf_);
}

ag::Var perceptual_loss(const FeatureExtractor& fx, const ag::Var& a, const ag::Var& b) {
    std::vector<ag::Var> la = fx(a);
    std::vector<ag::Var> lb = fx(b);
    require(la.size() == lb.size() && !la.empty(), ErrorClass::internal,
            "feature extractor returned mismatched layer lists");
    std::vector<std::pair<ag::Var, Scalar>> terms;
    for (size_t j = 0; j < la.size(); ++j) terms.emplace_back(ag::l1_mean(la[j], lb[j]), 1.0);
    return ag::wsum(terms);
}

CropBox head_box(const DenseBodyMap& map, const std::set<int>& head_parts, Scalar margin) {
    BinaryMask mask = part_mask(map, head_parts);
    CropBox box;
    if (mask.count() == 0) return box;
    int ymin = map.height(), ymax = -1, xmin = map.width(), xmax = -1;
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            if (mask.bits(y, x)) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
            }
    const int grow_y = int(std::ceil((ymax - ymin + 1) * margin));
    const int grow_x = int(std::ceil((xmax - xmin + 1) * margin));
    box.y0 = std::max(0, ymin - grow_y);
    box.x0 = std::max(0, xmin - grow_x);
    box.h = std::min(map.height(), ymax + grow_y + 1) - box.y0;
    box.w = std::min(map.width(), xmax + grow_x + 1) - box.x0;
    return box;
}

ag::Var face_identity_loss(const FaceEmbedder& fe, const ag::Var& gen_image,
                           const ag::Var& target_image, const DenseBodyMap& target_map,
                           const std::set<int>& head_parts) {
    const CropBox box = head_box(target_map, head_parts);
    if (box.empty()) return ag::Var::constant(Tensor::scalar(0.0));
    const int s = fe.input_size();
    ag::Var ga = fe(ag::resize_bilinear(ag::crop(gen_image, box.y0, box.x0, box.h, box.w), s, s));
    ag::Var gb =
        fe(ag::resize_bilinear(ag::crop(target_image, box.y0, box.x0, box.h, box.w), s, s));
    return ag::l1_sum(ga, gb);
}

ag::Var lsgan_d_loss(const std::vector<ag::Var>& real_logits,
                     const std::vector<ag::Var>& fake_logits) {
    require(real_logits.size() == fake_logits.size() && !real_logits.empty(),
            ErrorClass::internal, "discriminator logit lists must match");
    std::vector<std::pair<ag::Var, Scalar>> terms;
    const Scalar per_scale = 1.0 / Scalar(real_logits.size());
    for (size_t s = 0; s < real_logits.size(); ++s) {
        terms.emplace_back(ag::mse_to(real_logits[s], 1.0), 0.5 * per_scale);
        terms.emplace_back(ag::mse_to(fake_logits[s], 0.0), 0.5 * per_scale);
    }
    return ag::wsum(terms);
}

ag::Var lsgan_g_loss(const std::vector<ag::Var>& fake_logits) {
    require(!fake_logits.empty(), ErrorClass::internal, "empty logit list");
    std::vector<std::pair<ag::Var, Scalar>> terms;
    const Scalar per_scale = 1.0 / Scalar(fake_logits.size());
    for (const ag::Var& l : fake_logits) terms.emplace_back(ag::mse_to(l, 1.0), per_scale);
    return ag::wsum(terms);
}

ag::Var feature_matching_loss(const nets::DiscriminatorOutput& real,
                              const nets::DiscriminatorOutput& fake) {
    require(real.features.size() == fake.features.size() && !real.features.empty(),
            ErrorClass::internal, "feature lists must cover the same scales");
    std::vector<std::pair<ag::Var, Scalar>> terms;
    const Scalar per = 1.0 / Scalar(real.features.size());
    for (size_t s = 0; s < real.features.size(); ++s) {
        require(real.features[s].size() == fake.features[s].size(), ErrorClass::internal,
                "feature lists must have matching depth");
        const Scalar per_layer = per / Scalar(real.features[s].size());
        for (size_t j = 0; j < real.features[s].size(); ++j)
            terms.emplace_back(ag::l1_mean(fake.features[s][j], ag::detach(real.features[s][j])),
                               per_layer);
    }
    return ag::wsum(terms);
}

ag::Var weighted_total(const TermVars& t, const LossWeights& w) {
    return ag::wsum({{t.vgg, w.vgg}, {t.face, w.face}, {t.adv, w.adv}, {t.fm, w.fm}, {t.kl, w.kl}});
}

} // namespace posegen::loss
