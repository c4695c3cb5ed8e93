// End-to-end acceptance gate. Each criterion prints one line:
//   [PASS] criterion N: <evidence>
//   [FAIL] criterion N: <what broke>
// The process exits nonzero when any criterion fails. Working files go to a
// scratch directory under the system temp root; two criteria train real
// models, so a full run takes roughly 45 minutes on one CPU core.

#include "posegen/atlas.hpp"
#include "posegen/autograd.hpp"
#include "posegen/checkpoint.hpp"
#include "posegen/config.hpp"
#include "posegen/data.hpp"
#include "posegen/evaluation.hpp"
#include "posegen/inference.hpp"
#include "posegen/latent.hpp"
#include "posegen/losses.hpp"
#include "posegen/networks.hpp"
#include "posegen/rng.hpp"
#include "posegen/training.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace posegen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(Scalar v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Tensor rand_tensor(std::vector<int> dims, Rng& rng, Scalar lo, Scalar hi) {
    Tensor t = Tensor::zeros(std::move(dims));
    for (int i = 0; i < t.size(); ++i) t[i] = lo + (hi - lo) * rng.uniform();
    return t;
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
    return a.same_dims(b) && (a.raw() == b.raw()).all();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> csv_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
    return lines;
}

// metric rows with the wall-clock column (pure timing, never reproducible)
// removed; everything left must match bit for bit across reruns
std::vector<std::string> metric_rows_without_wall(const fs::path& p) {
    std::vector<std::string> rows;
    for (const std::string& line : csv_lines(p)) rows.push_back(line.substr(0, line.rfind(',')));
    return rows;
}

Scalar csv_column(const std::string& row, int col) {
    std::stringstream ss(row);
    std::string cell;
    for (int i = 0; i <= col; ++i) std::getline(ss, cell, ',');
    return std::stod(cell);
}

struct FdResult {
    Scalar worst = 0; // worst |fd - an| / max(1, |fd|, |an|) over checked coords
    int refined = 0;  // coords re-probed at a finer step (unstable quotient at h)
    int skipped = 0;  // coords with no valid quotient at any probed step (kink)
    int total = 0;
};

/** Central-difference check of d(build)/d(inputs) at probe step h.
 *
 *  Two realities of differencing a deep net shape this check. Stacked
 *  normalizations compound into huge higher derivatives (every instance-norm
 *  differentiation multiplies a 1/sigma factor), so at some coordinates the
 *  quotient has no stable value at step h no matter how it is extrapolated;
 *  those are re-probed at a 100x finer step, inside the truncation window
 *  again. And across a rectifier kink the quotient is not a derivative
 *  estimate at any step; such coordinates stay scale-inconsistent everywhere
 *  and are skipped (an undetected kink implies negligible downstream
 *  sensitivity, which the tolerance absorbs). Stability at one step is judged
 *  by agreement of two Richardson extrapolants, which also supply the
 *  truncation-free estimate that is compared against the analytic gradient. */
FdResult fd_check(const std::vector<Tensor>& inputs,
                  const std::function<ag::Var(const std::vector<ag::Var>&)>& build, Scalar h) {
    std::vector<ag::Var> params;
    params.reserve(inputs.size());
    for (const Tensor& t : inputs) params.push_back(ag::Var::param(t));
    ag::Var out = build(params);
    ag::backward(out);

    auto eval = [&](const std::vector<Tensor>& xs) {
        std::vector<ag::Var> vs;
        vs.reserve(xs.size());
        for (const Tensor& t : xs) vs.push_back(ag::Var::constant(t));
        return build(vs).value().item();
    };

    FdResult res;
    for (size_t i = 0; i < inputs.size(); ++i) {
        const Tensor& g = params[i].grad();
        if (g.empty()) {
            res.worst = std::numeric_limits<Scalar>::infinity();
            return res;
        }
        for (int j = 0; j < inputs[i].size(); ++j) {
            auto central = [&](Scalar step) {
                std::vector<Tensor> xs = inputs;
                xs[i][j] += step;
                const Scalar fp = eval(xs);
                xs[i][j] -= 2 * step;
                const Scalar fm = eval(xs);
                return (fp - fm) / (2 * step);
            };
            // Richardson pair at one step; stable when both extrapolants agree
            auto estimate = [&](Scalar step, Scalar& value) {
                const Scalar fd1 = central(step);
                const Scalar fd2 = central(step / 2);
                const Scalar fd4 = central(step / 4);
                const Scalar r1 = (4 * fd2 - fd1) / 3;
                const Scalar r2 = (4 * fd4 - fd2) / 3;
                value = r2;
                return std::abs(r1 - r2) <=
                       1e-5 * std::max({Scalar(1), std::abs(r1), std::abs(r2)});
            };

            ++res.total;
            Scalar fd = 0;
            bool stable = estimate(h, fd);
            if (!stable) {
                ++res.refined;
                stable = estimate(h / 100, fd);
            }
            if (!stable) {
                ++res.skipped;
                continue;
            }
            const Scalar an = g[j];
            const Scalar denom = std::max({Scalar(1), std::abs(fd), std::abs(an)});
            res.worst = std::max(res.worst, std::abs(fd - an) / denom);
        }
    }
    return res;
}

// ---------------------------------------------------------------- criteria

bool criterion1(const fs::path&, std::string& detail) {
    const auto t0 = Clock::now();
    Rng rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        const int parts = 1 + rng.uniform_int(24);
        const int dims = 1 + rng.uniform_int(16);
        const int h = 4 + rng.uniform_int(13);
        const int w = 4 + rng.uniform_int(13);

        DenseBodyMap map;
        map.parts = parts;
        map.part = GridI::Zero(h, w);
        map.u = GridS::Zero(h, w);
        map.v = GridS::Zero(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                map.part(y, x) = rng.uniform_int(parts + 1);
                if (map.part(y, x) != 0) {
                    map.u(y, x) = rng.uniform();
                    map.v(y, x) = rng.uniform();
                }
            }

        PartLatent z = standard_normal_latent(parts, dims, rng);
        WarpedNoiseImage wz = warp_broadcast(z, map);
        if (wz.values.dim(0) != dims || wz.values.dim(1) != h || wz.values.dim(2) != w) {
            detail = "trial " + std::to_string(trial) + ": wrong output shape";
            return false;
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int p = map.part(y, x);
                for (int c = 0; c < dims; ++c) {
                    const Scalar want = p == 0 ? Scalar(0) : z.values(p - 1, c);
                    if (wz.values.at3(c, y, x) != want) {
                        detail = "trial " + std::to_string(trial) + ": pixel (" +
                                 std::to_string(y) + "," + std::to_string(x) +
                                 ") channel " + std::to_string(c) + " differs";
                        return false;
                    }
                }
            }
    }
    const double dt = seconds_since(t0);
    detail = "1000 random (code, body-map) fields equal the per-pixel definition exactly, "
             "background exactly zero (" + fmt(dt) + " s, budget 60 s)";
    return dt < 60.0;
}

bool criterion2(const fs::path&, std::string& detail) {
    const auto t0 = Clock::now();
    const Scalar h = 1e-3, tol = 1e-4;
    Rng rng(202);

    // broadcast op: deterministic map covering background and all six parts
    DenseBodyMap map;
    map.parts = 6;
    map.part = GridI::Zero(10, 10);
    map.u = GridS::Zero(10, 10);
    map.v = GridS::Zero(10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) map.part(y, x) = (y * 10 + x) % 7;
    Tensor z = rand_tensor({6, 4}, rng, -1.0, 1.0);
    Tensor probe_w = rand_tensor({4, 10, 10}, rng, -1.0, 1.0);
    const FdResult r_warp = fd_check(
        {z}, [&](const std::vector<ag::Var>& v) {
            return ag::dot_const(ag::warp_broadcast(v[0], map), probe_w);
        },
        h);

    // generator forward at a small width/size
    NetConfig cfg;
    cfg.image_size = 16;
    cfg.atlas_size = 64;
    cfg.parts = 6;
    cfg.latent_dim = 2;
    cfg.base_channels = 4;
    ModelBundle m = create_models(cfg, 202);
    Tensor z_field = rand_tensor({cfg.latent_channels(), 16, 16}, rng, -1.0, 1.0);
    Tensor probe_g = rand_tensor({3, 16, 16}, rng, -1.0, 1.0);
    const FdResult r_gen = fd_check(
        {z_field},
        [&](const std::vector<ag::Var>& v) { return ag::dot_const(m.gen(v[0]), probe_g); }, h);

    // perceptual distance between two images
    loss::StubFeatureExtractor fx;
    Tensor a = rand_tensor({3, 12, 12}, rng, -1.0, 1.0);
    Tensor b = rand_tensor({3, 12, 12}, rng, -1.0, 1.0);
    const FdResult r_per = fd_check(
        {a, b},
        [&](const std::vector<ag::Var>& v) { return loss::perceptual_loss(fx, v[0], v[1]); }, h);

    // coordinates whose quotient never stabilizes (a kink inside every probe
    // interval) carry no valid estimate; they are excluded but capped at 2%
    auto ok = [&](const FdResult& r) { return r.worst <= tol && r.skipped * 50 <= r.total; };
    auto show = [&](const FdResult& r) {
        return fmt(r.worst) + " (" + std::to_string(r.refined) + "/" + std::to_string(r.total) +
               " coords re-probed finer, " + std::to_string(r.skipped) + " skipped at a kink)";
    };
    const double dt = seconds_since(t0);
    detail = "worst relative mismatch: broadcast " + show(r_warp) + ", generator " +
             show(r_gen) + ", perceptual " + show(r_per) + " (tolerance 1e-4; " + fmt(dt) +
             " s, budget 300 s)";
    return ok(r_warp) && ok(r_gen) && ok(r_per) && dt < 300.0;
}

bool criterion3(const fs::path&, std::string& detail) {
    // quadrature oracle for one dimension of KL(N(mu,var) || N(0,1))
    auto kl_quadrature = [](Scalar mu, Scalar log_var) {
        const Scalar sigma = std::exp(0.5 * log_var);
        const Scalar lo = mu - 12.0 * std::max(sigma, Scalar(1));
        const Scalar hi = mu + 12.0 * std::max(sigma, Scalar(1));
        const int n = 4000; // Simpson intervals (even)
        const Scalar dx = (hi - lo) / n;
        auto f = [&](Scalar x) {
            const Scalar t = (x - mu) / sigma;
            const Scalar q = std::exp(-0.5 * t * t) / (sigma * std::sqrt(2.0 * M_PI));
            const Scalar log_ratio = -0.5 * t * t - std::log(sigma) + 0.5 * x * x;
            return q * log_ratio;
        };
        Scalar acc = f(lo) + f(hi);
        for (int i = 1; i < n; ++i) acc += f(lo + i * dx) * (i % 2 ? 4.0 : 2.0);
        return acc * dx / 3.0;
    };

    Rng rng(303);
    Scalar worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        GaussianParams p;
        p.mu = MatrixX(2, 3);
        p.log_var = MatrixX(2, 3);
        Scalar quad = 0;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 3; ++c) {
                p.mu(r, c) = -2.0 + 4.0 * rng.uniform();
                p.log_var(r, c) = -2.0 + 4.0 * rng.uniform();
                quad += kl_quadrature(p.mu(r, c), p.log_var(r, c));
            }
        worst = std::max(worst, std::abs(kl_to_standard_normal(p) - quad));
    }

    GaussianParams zero;
    zero.mu = MatrixX::Zero(2, 3);
    zero.log_var = MatrixX::Zero(2, 3);
    const bool zero_exact = kl_to_standard_normal(zero) == 0.0;

    detail = "closed form vs quadrature worst gap " + fmt(worst) +
             " over 100 random posteriors (tolerance 1e-4); KL(0,0) " +
             std::string(zero_exact ? "== 0 exactly" : "!= 0");
    return worst <= 1e-4 && zero_exact;
}

bool criterion4(const fs::path& work, std::string& detail) {
    const auto t0 = Clock::now();
    const fs::path dir = work / "c4";
    SynthSpec ss;
    ss.identities = 1;
    ss.frames = 2;
    ss.image_size = 64;
    ss.seed = 404;
    make_synthetic_dataset(ss, (dir / "data").string());
    DatasetIndex idx = load_index((dir / "data").string());

    NetConfig net; // 64x64, 6 parts, 4 dims per part
    TrainConfig tc; // lr 2e-4, beta1 0.5, weights 10/5/1/10/0.01
    tc.steps = 500;
    tc.checkpoint_every = 500;
    tc.seed = 404;
    ModelBundle m = create_models(net, tc.seed);
    train::FitResult fr = train::fit(m, idx, net, tc, (dir / "run").string());

    const std::vector<std::string> lines = csv_lines(fr.metrics_csv);
    if (lines.size() < 2) {
        detail = "metrics log is empty";
        return false;
    }
    const Scalar first = csv_column(lines[1], 3); // perceptual term, initial weights
    const Scalar last = csv_column(lines.back(), 3);
    const double dt = seconds_since(t0);
    detail = "perceptual term " + fmt(first) + " -> " + fmt(last) + " after 500 steps (ratio " +
             fmt(last / first) + ", need < 0.30; " + fmt(dt) + " s, budget 900 s)";
    return last < 0.30 * first && dt < 900.0;
}

struct DeskModelEval {
    bool trained = false;
    eval::EvalSummary ours;
    eval::EvalSummary noparts;
};

bool criterion5(const fs::path& work, std::string& detail, DeskModelEval& shared) {
    const auto t0 = Clock::now();
    const fs::path dir = work / "c5";
    SynthSpec ss;
    ss.identities = 20;
    ss.frames = 4;
    ss.image_size = 64;
    ss.seed = 505;
    make_synthetic_dataset(ss, (dir / "data").string());
    DatasetIndex idx = load_index((dir / "data").string());

    TrainConfig tc;
    tc.steps = 2000;
    tc.checkpoint_every = 2000;
    tc.seed = 505;

    NetConfig net_parts; // per-part appearance code
    ModelBundle ours = create_models(net_parts, tc.seed);
    train::fit(ours, idx, net_parts, tc, (dir / "run_parts").string());

    NetConfig net_flat = net_parts; // ablation: one flat code over the silhouette
    net_flat.noparts = true;
    ModelBundle flat = create_models(net_flat, tc.seed);
    train::fit(flat, idx, net_flat, tc, (dir / "run_noparts").string());

    EvalConfig ec; // 5 poses x 16 samples
    loss::StubFeatureExtractor fx;
    shared.ours = eval::eval_report(ours, idx, ec, fx, "torso", (dir / "eval_parts").string());
    shared.noparts =
        eval::eval_report(flat, idx, ec, fx, "torso", (dir / "eval_noparts").string());
    shared.trained = true;

    const Scalar ratio_ours = shared.ours.variation_rest / shared.ours.variation_part;
    const Scalar ratio_flat = shared.noparts.variation_rest / shared.noparts.variation_part;
    const double dt = seconds_since(t0);
    detail = "torso resampling: part-code model rest/part = " + fmt(shared.ours.variation_rest) +
             "/" + fmt(shared.ours.variation_part) + " (ratio " + fmt(ratio_ours) +
             "), flat-code model ratio " + fmt(ratio_flat) + "; need rest < part and flat ratio > "
             "part-code ratio (" + fmt(dt) + " s, budget 7200 s)";
    return shared.ours.variation_rest < shared.ours.variation_part && ratio_flat > ratio_ours &&
           dt < 7200.0;
}

bool criterion6(const fs::path&, std::string& detail, const DeskModelEval& shared) {
    if (!shared.trained) {
        detail = "desk model unavailable (training criterion failed earlier)";
        return false;
    }
    const Scalar fresh = shared.ours.diversity;
    const Scalar floor = shared.ours.diversity_fixed_z;
    detail = "pairwise diversity over 16 fresh draws/pose = " + fmt(fresh) +
             "; re-decoding one fixed code = " + fmt(floor) + " (need fresh > 10x fixed)";
    return fresh > 10.0 * floor && fresh > 0.0;
}

bool criterion7(const fs::path&, std::string& detail) {
    Rng rng(707);
    loss::StubFeatureExtractor fx;

    std::vector<Tensor> set_a;
    for (int i = 0; i < 10; ++i) set_a.push_back(rand_tensor({3, 16, 16}, rng, 0.0, 1.0));
    const Scalar fid_self = eval::fid(fx, set_a, set_a);

    // two 1-d feature sets with unit variance and means one apart: distance 1
    MatrixX fa(2, 1), fb(2, 1);
    fa << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    fb = fa.array() + 1.0;
    const Scalar fid_scalar = eval::fid_from_features(fa, fb);

    std::vector<Tensor> four;
    for (int i = 0; i < 4; ++i) four.push_back(rand_tensor({3, 16, 16}, rng, 0.0, 1.0));
    const Scalar div = eval::pairwise_diversity(fx, four);
    Scalar brute = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            brute += loss::perceptual_loss(fx, ag::Var::constant(to_pm1(four[i])),
                                           ag::Var::constant(to_pm1(four[j])))
                         .value()
                         .item();
    brute /= 6.0;

    Tensor img = rand_tensor({3, 20, 24}, rng, 0.0, 1.0);
    const Scalar ssim_self = eval::ssim(img, img);

    detail = "fid(A,A) = " + fmt(fid_self) + "; scalar-Gaussian case |fid-1| = " +
             fmt(std::abs(fid_scalar - 1.0)) + "; |diversity - 6-pair mean| = " +
             fmt(std::abs(div - brute)) + "; ssim(a,a) = " + fmt(ssim_self);
    return fid_self <= 1e-6 && std::abs(fid_scalar - 1.0) <= 1e-6 &&
           std::abs(div - brute) <= 1e-9 && ssim_self == 1.0;
}

bool criterion8(const fs::path& work, std::string& detail) {
    const fs::path dir = work / "c8";
    SynthSpec ss;
    ss.identities = 2;
    ss.frames = 2;
    ss.image_size = 48;
    ss.seed = 808;
    make_synthetic_dataset(ss, (dir / "data").string());
    DatasetIndex idx = load_index((dir / "data").string());

    NetConfig net;
    net.image_size = 48;
    net.latent_dim = 2;
    net.base_channels = 4;
    TrainConfig tc;
    tc.steps = 12;
    tc.batch_size = 1;
    tc.checkpoint_every = 6;
    tc.seed = 808;

    ModelBundle m1 = create_models(net, tc.seed);
    train::FitResult r1 = train::fit(m1, idx, net, tc, (dir / "a").string());
    ModelBundle m2 = create_models(net, tc.seed);
    train::FitResult r2 = train::fit(m2, idx, net, tc, (dir / "b").string());

    const auto rows_a = metric_rows_without_wall(r1.metrics_csv);
    const auto rows_b = metric_rows_without_wall(r2.metrics_csv);
    const bool logs_equal = rows_a == rows_b && rows_a.size() == 13;
    const bool ckpt_equal = slurp(r1.final_checkpoint) == slurp(r2.final_checkpoint);

    // resume from the mid-run snapshot and reproduce the uninterrupted tail
    CheckpointData mid = load_checkpoint((dir / "a" / "ckpt_6.bin").string());
    ModelBundle m3 = restore_models(mid);
    train::FitResult r3 = train::fit(m3, idx, net, tc, (dir / "c").string(), &mid);
    const auto rows_c = metric_rows_without_wall(r3.metrics_csv);
    bool resume_rows = rows_c.size() == 7 && r3.steps_run == 6;
    for (size_t i = 1; resume_rows && i < rows_c.size(); ++i)
        resume_rows = rows_c[i] == rows_a[6 + i];
    const bool resume_ckpt = slurp(r3.final_checkpoint) == slurp(r1.final_checkpoint);

    detail = std::string("rerun metric logs ") +
             (logs_equal ? "bit-identical" : "DIFFER") + " (timing column excluded) and final "
             "checkpoints " + (ckpt_equal ? "byte-identical" : "DIFFER") +
             "; resumed tail rows " + (resume_rows ? "match" : "DIFFER") +
             ", resumed final checkpoint " + (resume_ckpt ? "byte-identical" : "DIFFERS");
    return logs_equal && ckpt_equal && resume_rows && resume_ckpt;
}

bool criterion9(const fs::path& work, std::string& detail) {
    const fs::path dir = work / "c9";
    SynthSpec ss;
    ss.identities = 2;
    ss.frames = 2;
    ss.image_size = 48;
    ss.seed = 909;
    make_synthetic_dataset(ss, (dir / "data").string());
    DatasetIndex idx = load_index((dir / "data").string());

    NetConfig net;
    net.image_size = 48;
    net.latent_dim = 2;
    net.base_channels = 4;
    ModelBundle m = create_models(net, 909);

    Sample person = load_sample(idx.records[0], net.parts);
    Sample garment = load_sample(idx.records[2], net.parts); // other identity
    const DenseBodyMap pose = load_sample(idx.records[1], net.parts).map;
    Rng rng(1);

    const Tensor person_tr = infer::pose_transfer(m, person, pose, false, rng);
    const Tensor garment_tr = infer::pose_transfer(m, garment, pose, false, rng);
    const bool empty_is_person =
        tensors_equal(infer::garment_transfer(m, person, garment, {}, pose), person_tr);
    const bool full_is_garment = tensors_equal(
        infer::garment_transfer(m, person, garment, {1, 2, 3, 4, 5, 6}, pose), garment_tr);

    PartLatent base = infer::prior_latent(m, rng);
    PartLatent kept = infer::resample_group(m, base, {}, rng);
    const bool empty_group_identical =
        tensors_equal(infer::generate(m, kept, pose), infer::generate(m, base, pose));

    PartLatent z1 = infer::prior_latent(m, rng);
    PartLatent z2 = infer::prior_latent(m, rng);
    std::vector<Tensor> tiles = infer::interpolate_images(m, z1, z2, 5, pose);
    const bool ends_exact = tiles.size() == 5 &&
                            tensors_equal(tiles.front(), infer::generate(m, z2, pose)) &&
                            tensors_equal(tiles.back(), infer::generate(m, z1, pose));

    detail = std::string("garment transfer with empty/full sets ") +
             (empty_is_person && full_is_garment ? "equals" : "DIFFERS from") +
             " the two pose transfers exactly; empty resample group " +
             (empty_group_identical ? "reproduces" : "CHANGES") +
             " the image; interpolation endpoints " + (ends_exact ? "decode" : "DO NOT decode") +
             " exactly the two codes";
    return empty_is_person && full_is_garment && empty_group_identical && ends_exact;
}

bool report(int id, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << detail << "\n";
    std::cout.flush();
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    // optional args select a subset of criteria (debugging aid); default all.
    // Criterion 6 reuses the models trained by criterion 5.
    std::vector<bool> wanted(10, argc <= 1);
    for (int i = 1; i < argc; ++i) {
        const int id = std::atoi(argv[i]);
        if (id >= 1 && id <= 9) wanted[size_t(id)] = true;
    }

    const fs::path work = fs::temp_directory_path() / "posegen_acceptance";
    std::error_code ec;
    fs::remove_all(work, ec);
    fs::create_directories(work);

    bool all = true;
    DeskModelEval desk;
    auto run = [&](int id, auto&& fn) {
        if (!wanted[size_t(id)]) return;
        std::string detail;
        bool ok = false;
        try {
            ok = fn(work, detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        all = report(id, ok, detail) && all;
    };

    run(1, [](const fs::path& w, std::string& d) { return criterion1(w, d); });
    run(2, [](const fs::path& w, std::string& d) { return criterion2(w, d); });
    run(3, [](const fs::path& w, std::string& d) { return criterion3(w, d); });
    run(4, [](const fs::path& w, std::string& d) { return criterion4(w, d); });
    run(5, [&](const fs::path& w, std::string& d) { return criterion5(w, d, desk); });
    run(6, [&](const fs::path& w, std::string& d) { return criterion6(w, d, desk); });
    run(7, [](const fs::path& w, std::string& d) { return criterion7(w, d); });
    run(8, [](const fs::path& w, std::string& d) { return criterion8(w, d); });
    run(9, [](const fs::path& w, std::string& d) { return criterion9(w, d); });

    return all ? 0 : 1;
}
