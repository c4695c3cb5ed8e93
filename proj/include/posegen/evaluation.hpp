#pragma once

#include "posegen/config.hpp"
#include "posegen/inference.hpp"
#include "posegen/losses.hpp"

namespace posegen::eval {

/** Mean over all unordered pairs of the perceptual distance between samples
 *  of one pose. Images in [0,1]; distances are computed in [-1,1] space, the
 *  same convention the training losses use. */
Scalar pairwise_diversity(const loss::FeatureExtractor& fx, const std::vector<Tensor>& samples01);

/** One pooled feature row per image: global average of the extractor's last
 *  activation layer. Rows stack to (n, d). */
MatrixX image_features(const loss::FeatureExtractor& fx, const std::vector<Tensor>& images01);

struct FeatureStats {
    VectorX mean;
    MatrixX cov; // unbiased (n-1) normalization
};

/** Gaussian fit of feature rows; needs at least two rows. */
FeatureStats feature_stats(const MatrixX& rows);

/** Squared Frechet distance |mu1-mu2|^2 + Tr(C1 + C2 - 2 sqrtm(C1^1/2 C2 C1^1/2)).
 *  Both covariances are eps-regularized; negative eigenvalues clamp to zero. */
Scalar frechet_distance(const FeatureStats& a, const FeatureStats& b, Scalar eps = 1e-6);

Scalar fid_from_features(const MatrixX& a, const MatrixX& b);

/** Frechet distance between pooled-feature Gaussian fits of two image sets. */
Scalar fid(const loss::FeatureExtractor& fx, const std::vector<Tensor>& generated01,
           const std::vector<Tensor>& reference01);

/** Windowed structural similarity: 11x11 Gaussian window (sigma 1.5),
 *  stabilizers K1=0.01, K2=0.03 on a unit dynamic range, mean over valid
 *  window positions and channels. Inputs in [0,1]. */
Scalar ssim(const Tensor& a01, const Tensor& b01);

/** Mean over unordered sample pairs of the per-pixel channel-summed L1
 *  distance inside `mask`, normalized by the mask pixel count. An empty mask
 *  yields 0 (with a stderr note). */
Scalar masked_variation(const std::vector<Tensor>& samples01, const BinaryMask& mask);

struct VariationPair {
    Scalar part = 0; // inside the part group's region
    Scalar rest = 0; // foreground minus the group
};

/** Sampling-locality statistic: masked variation inside the group's region vs
 *  the rest of the foreground. */
VariationPair variation_part_rest(const std::vector<Tensor>& samples01, const DenseBodyMap& map,
                                  const std::set<int>& group);

struct EvalSummary {
    Scalar diversity = 0;         // fresh prior draws, mean over poses
    Scalar diversity_fixed_z = 0; // re-decodings of one fixed code (collapse floor)
    Scalar fid = 0;               // samples vs dataset images
    Scalar ssim_mean = 0;         // posterior-mean pose transfer vs ground truth
    Scalar variation_part = 0;
    Scalar variation_rest = 0;
    int n_poses = 0;
    int n_samples = 0;
    std::uint64_t seed = 0;
    std::string group;
    std::vector<Scalar> diversity_per_pose;
};

/** Run the full protocol on `n_poses` poses x `n_samples` samples and write
 *  report.txt + diversity_per_pose.csv under out_dir.
 *
 *  Variation uses group-resampling around a fixed base code; a flat-code
 *  (noparts) model cannot resample a subset, so it falls back to fresh full
 *  draws. Absolute metric values are comparable only across runs using the
 *  same feature extractor. */
EvalSummary eval_report(const ModelBundle& m, const DatasetIndex& index, const EvalConfig& ec,
                        const loss::FeatureExtractor& fx, const std::string& group_name,
                        const std::string& out_dir);

} // namespace posegen::eval
