#pragma once

#include "posegen/densepose.hpp"
#include "posegen/networks.hpp"

#include <memory>
#include <set>

namespace posegen {

/** Weights of the training objective's terms; defaults follow the reference
 *  configuration (perceptual 10, identity 5, adversarial 1, feature match 10,
 *  prior 0.01). */
struct LossWeights {
    Scalar vgg = 10.0;
    Scalar face = 5.0;
    Scalar adv = 1.0;
    Scalar fm = 10.0;
    Scalar kl = 0.01;

    bool operator==(const LossWeights&) const = default;
};

namespace loss {

/** Layer-activation pyramid used by the perceptual loss. */
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::vector<ag::Var> operator()(const ag::Var& image) const = 0;
};

/** Frozen random conv pyramid standing in for a pretrained feature network:
 *  three stride-2 stages, widths 8/16/16, fixed internal seed. */
class StubFeatureExtractor : public FeatureExtractor {
public:
    StubFeatureExtractor();
    std::vector<ag::Var> operator()(const ag::Var& image) const override;

private:
    ag::Var w1_, b1_, w2_, b2_, w3_, b3_;
};

/** Single-layer extractor whose only "activation" is the image itself; used
 *  by tests to make the perceptual loss analytically checkable. */
class PixelFeatureExtractor : public FeatureExtractor {
public:
    std::vector<ag::Var> operator()(const ag::Var& image) const override { return {image}; }
};

/** Face-recognition embedding interface: fixed-size crop -> feature vector. */
class FaceEmbedder {
public:
    virtual ~FaceEmbedder() = default;
    virtual int input_size() const = 0;
    virtual ag::Var operator()(const ag::Var& face_crop) const = 0;
};

/** Frozen random embedding network: 32x32 crop -> 32-dim vector. */
class StubFaceEmbedder : public FaceEmbedder {
public:
    StubFaceEmbedder();
    int input_size() const override { return 32; }
    ag::Var operator()(const ag::Var& face_crop) const override;

private:
    ag::Var w1_, b1_, w2_, b2_, wf_, bf_;
};

/** Sum over layers of the mean elementwise L1 between activations. */
ag::Var perceptual_loss(const FeatureExtractor& fx, const ag::Var& a, const ag::Var& b);

/** Head-region bounding box of `parts_wanted`, grown by `margin` per side and
 *  clamped to the image; empty region -> zero box. */
struct CropBox {
    int y0 = 0, x0 = 0, h = 0, w = 0;
    bool empty() const { return h == 0 || w == 0; }
};
CropBox head_box(const DenseBodyMap& map, const std::set<int>& head_parts,
                 Scalar margin = 0.2);

/** L1 (summed) between embeddings of the head crops of both images; the crop
 *  window comes from the target pose. Zero when the head is not visible. */
ag::Var face_identity_loss(const FaceEmbedder& fe, const ag::Var& gen_image,
                           const ag::Var& target_image, const DenseBodyMap& target_map,
                           const std::set<int>& head_parts);

/** Least-squares GAN objectives, averaged over discriminator scales. The
 *  discriminator side carries the usual 1/2 on each of its two terms. */
ag::Var lsgan_d_loss(const std::vector<ag::Var>& real_logits,
                     const std::vector<ag::Var>& fake_logits);
ag::Var lsgan_g_loss(const std::vector<ag::Var>& fake_logits);

/** Mean L1 between discriminator activations of real and generated inputs,
 *  averaged per layer and per scale; the real branch is detached. */
ag::Var feature_matching_loss(const nets::DiscriminatorOutput& real,
                              const nets::DiscriminatorOutput& fake);

/** Unweighted scalar terms of the generator/encoder objective. */
struct TermVars {
    ag::Var vgg, face, adv, fm, kl;
};

/** w_vgg*vgg + w_face*face + w_adv*adv + w_fm*fm + w_kl*kl. */
ag::Var weighted_total(const TermVars& t, const LossWeights& w);

} // namespace loss
} // namespace posegen
