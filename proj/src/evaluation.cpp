#include "posegen/evaluation.hpp"

#include "posegen/image.hpp"

#include <Eigen/Eigenvalues>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace posegen::eval {
namespace fs = std::filesystem;

namespace {

// one extractor pass per image, reused across all pair distances
std::vector<std::vector<ag::Var>> layer_stacks(const loss::FeatureExtractor& fx,
                                               const std::vector<Tensor>& images01) {
    std::vector<std::vector<ag::Var>> out;
    out.reserve(images01.size());
    for (const Tensor& img : images01) out.push_back(fx(ag::Var::constant(to_pm1(img))));
    return out;
}

Scalar stack_distance(const std::vector<ag::Var>& a, const std::vector<ag::Var>& b) {
    Scalar d = 0;
    for (size_t j = 0; j < a.size(); ++j) d += ag::l1_mean(a[j], b[j]).value().item();
    return d;
}

MatrixX sqrtm_psd(const MatrixX& m) {
    Eigen::SelfAdjointEigenSolver<MatrixX> es(m);
    require(es.info() == Eigen::Success, ErrorClass::numeric, "covariance eigensolve failed");
    VectorX lam = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

MatrixX plane_of(const Tensor& img, int c) {
    MatrixX p(img.dim(1), img.dim(2));
    for (int y = 0; y < p.rows(); ++y)
        for (int x = 0; x < p.cols(); ++x) p(y, x) = img.at3(c, int(y), int(x));
    return p;
}

// separable Gaussian filtering over valid window positions only
MatrixX gauss_valid(const MatrixX& p, const VectorX& k) {
    const int r = int(k.size());
    MatrixX horiz(p.rows(), p.cols() - r + 1);
    for (int y = 0; y < horiz.rows(); ++y)
        for (int x = 0; x < horiz.cols(); ++x) {
            Scalar acc = 0;
            for (int i = 0; i < r; ++i) acc += k[i] * p(y, x + i);
            horiz(y, x) = acc;
        }
    MatrixX out(p.rows() - r + 1, horiz.cols());
    for (int y = 0; y < out.rows(); ++y)
        for (int x = 0; x < out.cols(); ++x) {
            Scalar acc = 0;
            for (int i = 0; i < r; ++i) acc += k[i] * horiz(y + i, x);
            out(y, x) = acc;
        }
    return out;
}

} // namespace

Scalar pairwise_diversity(const loss::FeatureExtractor& fx,
                          const std::vector<Tensor>& samples01) {
    const int n = int(samples01.size());
    if (n < 2) return 0;
    auto stacks = layer_stacks(fx, samples01);
    Scalar acc = 0;
    int pairs = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            acc += stack_distance(stacks[i], stacks[j]);
            ++pairs;
        }
    return acc / Scalar(pairs);
}

MatrixX image_features(const loss::FeatureExtractor& fx, const std::vector<Tensor>& images01) {
    require(!images01.empty(), ErrorClass::data, "no images to embed");
    MatrixX rows;
    for (size_t i = 0; i < images01.size(); ++i) {
        ag::Var pooled = ag::global_avg_pool(fx(ag::Var::constant(to_pm1(images01[i]))).back());
        const Tensor& v = pooled.value();
        if (rows.size() == 0) rows.resize(images01.size(), v.size());
        require(int(rows.cols()) == v.size(), ErrorClass::internal, "feature width changed");
        for (int c = 0; c < v.size(); ++c) rows(int(i), c) = v[c];
    }
    return rows;
}

FeatureStats feature_stats(const MatrixX& rows) {
    require(rows.rows() >= 2, ErrorClass::data,
            "covariance needs at least two samples, got " + std::to_string(rows.rows()));
    FeatureStats s;
    s.mean = rows.colwise().mean();
    MatrixX centered = rows.rowwise() - s.mean.transpose();
    s.cov = centered.transpose() * centered / Scalar(rows.rows() - 1);
    return s;
}

Scalar frechet_distance(const FeatureStats& a, const FeatureStats& b, Scalar eps) {
    require(a.mean.size() == b.mean.size(), ErrorClass::data,
            "feature dimensionality differs between the two sets");
    const auto d = a.mean.size();
    MatrixX c1 = a.cov + eps * MatrixX::Identity(d, d);
    MatrixX c2 = b.cov + eps * MatrixX::Identity(d, d);
    MatrixX root1 = sqrtm_psd(c1);
    MatrixX inner = root1 * c2 * root1;
    inner = Scalar(0.5) * (inner + inner.transpose()); // symmetrize numerics
    Eigen::SelfAdjointEigenSolver<MatrixX> es(inner);
    require(es.info() == Eigen::Success, ErrorClass::numeric, "matrix sqrt eigensolve failed");
    const Scalar tr_sqrt = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt().sum();
    const Scalar fd =
        (a.mean - b.mean).squaredNorm() + c1.trace() + c2.trace() - 2.0 * tr_sqrt;
    return std::max(fd, Scalar(0));
}

Scalar fid_from_features(const MatrixX& a, const MatrixX& b) {
    return frechet_distance(feature_stats(a), feature_stats(b));
}

Scalar fid(const loss::FeatureExtractor& fx, const std::vector<Tensor>& generated01,
           const std::vector<Tensor>& reference01) {
    return fid_from_features(image_features(fx, generated01), image_features(fx, reference01));
}

Scalar ssim(const Tensor& a01, const Tensor& b01) {
    require(a01.same_dims(b01), ErrorClass::data, "ssim inputs differ in shape");
    constexpr int kWin = 11;
    constexpr Scalar kSigma = 1.5;
    constexpr Scalar c1 = 0.01 * 0.01; // (K1 L)^2 on unit range
    constexpr Scalar c2 = 0.03 * 0.03;
    require(a01.ndim() == 3 && a01.dim(1) >= kWin && a01.dim(2) >= kWin, ErrorClass::data,
            "ssim needs (C,H,W) images at least 11x11");

    VectorX k(kWin);
    for (int i = 0; i < kWin; ++i) {
        Scalar d = Scalar(i - kWin / 2);
        k[i] = std::exp(-d * d / (2 * kSigma * kSigma));
    }
    k /= k.sum();

    Scalar acc = 0;
    for (int c = 0; c < a01.dim(0); ++c) {
        MatrixX pa = plane_of(a01, c), pb = plane_of(b01, c);
        MatrixX mu_a = gauss_valid(pa, k), mu_b = gauss_valid(pb, k);
        MatrixX saa = gauss_valid(pa.cwiseProduct(pa), k) - mu_a.cwiseProduct(mu_a);
        MatrixX sbb = gauss_valid(pb.cwiseProduct(pb), k) - mu_b.cwiseProduct(mu_b);
        MatrixX sab = gauss_valid(pa.cwiseProduct(pb), k) - mu_a.cwiseProduct(mu_b);
        MatrixX num = (2.0 * mu_a.cwiseProduct(mu_b).array() + c1).matrix().cwiseProduct(
            (2.0 * sab.array() + c2).matrix());
        MatrixX den =
            (mu_a.cwiseProduct(mu_a).array() + mu_b.cwiseProduct(mu_b).array() + c1)
                .matrix()
                .cwiseProduct((saa.array() + sbb.array() + c2).matrix());
        acc += (num.array() / den.array()).mean();
    }
    return acc / Scalar(a01.dim(0));
}

Scalar masked_variation(const std::vector<Tensor>& samples01, const BinaryMask& mask) {
    const int n = int(samples01.size());
    if (n < 2) return 0;
    if (mask.count() == 0) {
        std::cerr << "note: variation over an empty mask, reporting 0\n";
        return 0;
    }
    Scalar acc = 0;
    int pairs = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const Tensor& a = samples01[size_t(i)];
            const Tensor& b = samples01[size_t(j)];
            require(a.same_dims(b), ErrorClass::data, "variation samples differ in shape");
            Scalar sum = 0;
            for (int y = 0; y < mask.bits.rows(); ++y)
                for (int x = 0; x < mask.bits.cols(); ++x) {
                    if (!mask.bits(y, x)) continue;
                    for (int c = 0; c < a.dim(0); ++c)
                        sum += std::abs(a.at3(c, int(y), int(x)) - b.at3(c, int(y), int(x)));
                }
            acc += sum / Scalar(mask.count());
            ++pairs;
        }
    return acc / Scalar(pairs);
}

VariationPair variation_part_rest(const std::vector<Tensor>& samples01, const DenseBodyMap& map,
                                  const std::set<int>& group) {
    BinaryMask inside = part_mask(map, group);
    BinaryMask rest{foreground_mask(map).bits && !inside.bits};
    return VariationPair{masked_variation(samples01, inside),
                         masked_variation(samples01, rest)};
}

EvalSummary eval_report(const ModelBundle& m, const DatasetIndex& index, const EvalConfig& ec,
                        const loss::FeatureExtractor& fx, const std::string& group_name,
                        const std::string& out_dir) {
    require(ec.n_poses >= 1, ErrorClass::config, "eval needs at least one pose");
    require(ec.n_samples >= 2, ErrorClass::config, "eval needs at least two samples per pose");
    require(index.size() >= 1, ErrorClass::data, "empty dataset index");
    const std::set<int> group = resolve_part_group(group_name, m.cfg.parts);

    EvalSummary out;
    out.n_poses = std::min(ec.n_poses, index.size());
    out.n_samples = ec.n_samples;
    out.seed = ec.seed;
    out.group = group_name;

    Rng rng(Rng::derive_seed(ec.seed, "eval"));

    // reference set for realism: every dataset image, capped
    constexpr int kMaxReference = 200;
    std::vector<Tensor> reference;
    for (int i = 0; i < index.size() && int(reference.size()) < kMaxReference; ++i)
        reference.push_back(load_sample(index.records[size_t(i)], m.cfg.parts).image01);

    std::vector<Tensor> generated;
    std::vector<std::string> pose_records;
    Scalar div_acc = 0, floor_acc = 0, ssim_acc = 0, vp_acc = 0, vr_acc = 0;
    for (int p = 0; p < out.n_poses; ++p) {
        const int rec_idx = p * index.size() / out.n_poses;
        const DatasetRecord& rec = index.records[size_t(rec_idx)];
        Sample target = load_sample(rec, m.cfg.parts);
        pose_records.push_back(rec.identity + "/" + rec.stem);

        // diversity: fresh appearance draws in this pose
        std::vector<Tensor> draws;
        for (int s = 0; s < ec.n_samples; ++s)
            draws.push_back(infer::sample_appearance(m, target.map, rng));
        const Scalar d = pairwise_diversity(fx, draws);
        out.diversity_per_pose.push_back(d);
        div_acc += d;
        for (Tensor& t : draws) generated.push_back(std::move(t));

        // collapse floor: the same statistic over re-decodings of one code
        std::vector<Tensor> fixed(size_t(ec.n_samples),
                                  infer::sample_appearance(m, target.map, rng));
        floor_acc += pairwise_diversity(fx, fixed);

        // locality: resample only the group around a fixed base; a flat-code
        // model has no per-part rows, so it redraws everything
        std::vector<Tensor> vary;
        if (m.cfg.noparts) {
            for (int s = 0; s < ec.n_samples; ++s)
                vary.push_back(infer::sample_appearance(m, target.map, rng));
        } else {
            PartLatent base = infer::prior_latent(m, rng);
            for (int s = 0; s < ec.n_samples; ++s)
                vary.push_back(
                    infer::generate(m, resample_parts(base, group, rng), target.map));
        }
        VariationPair vp = variation_part_rest(vary, target.map, group);
        vp_acc += vp.part;
        vr_acc += vp.rest;

        // transfer fidelity: posterior-mean re-render from a sibling record
        const auto& siblings = index.by_identity.at(rec.identity);
        int src_idx = rec_idx;
        for (int cand : siblings)
            if (cand != rec_idx) {
                src_idx = cand;
                break;
            }
        Sample source = load_sample(index.records[size_t(src_idx)], m.cfg.parts);
        Tensor recon = infer::pose_transfer(m, source, target.map, false, rng);
        ssim_acc += ssim(recon, target.image01);
    }

    out.diversity = div_acc / Scalar(out.n_poses);
    out.diversity_fixed_z = floor_acc / Scalar(out.n_poses);
    out.variation_part = vp_acc / Scalar(out.n_poses);
    out.variation_rest = vr_acc / Scalar(out.n_poses);
    out.ssim_mean = ssim_acc / Scalar(out.n_poses);
    out.fid = fid(fx, generated, reference);

    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "report.txt");
        require(bool(f), ErrorClass::io, "cannot write report in " + out_dir);
        f.precision(17);
        f << "# values are comparable only across runs using the same feature extractor\n";
        f << "fid " << out.fid << '\n';
        f << "ssim_mean " << out.ssim_mean << '\n';
        f << "diversity " << out.diversity << '\n';
        f << "diversity_fixed_z " << out.diversity_fixed_z << '\n';
        f << "variation_part " << out.variation_part << '\n';
        f << "variation_rest " << out.variation_rest << '\n';
        f << "variation_group " << out.group << '\n';
        f << "n_poses " << out.n_poses << '\n';
        f << "n_samples " << out.n_samples << '\n';
        f << "n_reference " << reference.size() << '\n';
        f << "seed " << out.seed << '\n';
        f << "model_step " << m.step << '\n';
        f << "noparts " << (m.cfg.noparts ? 1 : 0) << '\n';
    }
    {
        std::ofstream f(fs::path(out_dir) / "diversity_per_pose.csv");
        require(bool(f), ErrorClass::io, "cannot write diversity csv in " + out_dir);
        f.precision(17);
        f << "pose,record,diversity\n";
        for (size_t i = 0; i < out.diversity_per_pose.size(); ++i)
            f << i << ',' << pose_records[i] << ',' << out.diversity_per_pose[i] << '\n';
    }
    return out;
}

} // namespace posegen::eval
