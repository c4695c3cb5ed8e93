#include "posegen/training.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace posegen::train {
namespace fs = std::filesystem;

void Adam::attach(std::vector<nn::ParamStore*> stores) {
    require(params_.empty(), ErrorClass::internal, "optimizer attached twice");
    for (nn::ParamStore* ps : stores)
        for (const auto& [name, v] : ps->entries()) {
            params_.push_back(v);
            m_.push_back(Tensor::zeros(v.value().dims()));
            v_.push_back(Tensor::zeros(v.value().dims()));
        }
}

void Adam::step() {
    ++t_;
    const Scalar bc1 = 1.0 - std::pow(beta1_, Scalar(t_));
    const Scalar bc2 = 1.0 - std::pow(beta2_, Scalar(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        ag::Var& p = params_[i];
        if (p.grad().empty()) { // untouched this step: decay moments as zero grad
            m_[i].raw() *= beta1_;
            v_[i].raw() *= beta2_;
            continue;
        }
        const ArrayX& g = p.grad().raw();
        m_[i].raw() = beta1_ * m_[i].raw() + (1.0 - beta1_) * g;
        v_[i].raw() = beta2_ * v_[i].raw() + (1.0 - beta2_) * g.square();
        p.value_mut().raw() -=
            lr_ * (m_[i].raw() / bc1) / ((v_[i].raw() / bc2).sqrt() + eps_);
    }
}

std::string StepMetrics::csv_header() {
    return "step,loss_d,loss_g,vgg,face,adv,fm,kl,grad_eg,grad_d,wall_ms";
}

std::string StepMetrics::csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << step << ',' << loss_d << ',' << loss_g << ',' << vgg << ',' << face << ',' << adv
       << ',' << fm << ',' << kl << ',' << grad_eg << ',' << grad_d << ',' << wall_ms;
    return os.str();
}

namespace {

Scalar grad_norm(std::initializer_list<const nn::ParamStore*> stores) {
    Scalar acc = 0;
    for (const nn::ParamStore* ps : stores)
        for (const auto& [name, v] : ps->entries())
            if (!v.grad().empty()) acc += v.grad().raw().square().sum();
    return std::sqrt(acc);
}

void check_finite(Scalar v, const char* term, long long step) {
    require(std::isfinite(v), ErrorClass::numeric,
            std::string("non-finite ") + term + " at step " + std::to_string(step));
}

struct SampleGraph {
    ag::Var mu, log_var, z_field, z_field_const, fake, fake_const, real;
    DenseBodyMap target_map;
};

} // namespace

StepMetrics train_step(ModelBundle& m, const std::vector<PairSample>& batch,
                       const TrainConfig& tc, Adam& opt_eg, Adam& opt_d, Rng& rng,
                       const loss::FeatureExtractor& fx, const loss::FaceEmbedder& fe) {
    require(!batch.empty(), ErrorClass::internal, "empty training batch");
    const auto t0 = std::chrono::steady_clock::now();
    const long long this_step = m.step + 1;
    const Scalar inv_b = 1.0 / Scalar(batch.size());
    const std::set<int> face_region = head_parts(m.cfg.parts);

    // forward pass: appearance -> posterior -> reparameterized latent field ->
    // generated image, one graph per sample
    std::vector<SampleGraph> graphs;
    for (const PairSample& pair : batch) {
        SampleGraph g;
        g.target_map = pair.target.map;
        TextureAtlas tex = extract_texture(pair.source.image01, pair.source.map, m.cfg.atlas_size);
        nets::EncoderOutput post = m.enc(ag::Var::constant(to_pm1(tex.texels)));
        g.mu = post.mu;
        g.log_var = post.log_var;

        Tensor eps = Tensor::zeros({m.cfg.parts, m.cfg.latent_dim});
        for (int i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
        ag::Var z = ag::reparam(g.mu, g.log_var, eps);
        g.z_field = m.cfg.noparts
                        ? ag::warp_broadcast_noparts(
                              ag::reshape(z, {m.cfg.parts * m.cfg.latent_dim}), pair.target.map)
                        : ag::warp_broadcast(z, pair.target.map);
        g.fake = m.gen(g.z_field);
        g.z_field_const = ag::detach(g.z_field);
        g.fake_const = ag::detach(g.fake);
        g.real = ag::Var::constant(to_pm1(pair.target.image01));
        graphs.push_back(std::move(g));
    }

    StepMetrics out;
    out.step = this_step;

    // discriminator update: real pairs up, generated pairs down
    {
        std::vector<std::pair<ag::Var, Scalar>> d_terms;
        for (SampleGraph& g : graphs) {
            nets::DiscriminatorOutput d_real = m.disc(g.real, g.z_field_const);
            nets::DiscriminatorOutput d_fake = m.disc(g.fake_const, g.z_field_const);
            d_terms.emplace_back(loss::lsgan_d_loss(d_real.logits, d_fake.logits), inv_b);
        }
        ag::Var loss_d = ag::wsum(d_terms);
        out.loss_d = loss_d.value().item();
        check_finite(out.loss_d, "discriminator loss", this_step);
        m.disc_params.zero_grads();
        ag::backward(loss_d);
        out.grad_d = grad_norm({&m.disc_params});
        check_finite(out.grad_d, "discriminator gradient norm", this_step);
        opt_d.step();
    }

    // joint encoder+generator update against the refreshed discriminator
    {
        std::vector<std::pair<ag::Var, Scalar>> vgg_t, face_t, adv_t, fm_t, kl_t;
        for (SampleGraph& g : graphs) {
            nets::DiscriminatorOutput d_fake = m.disc(g.fake, g.z_field);
            nets::DiscriminatorOutput d_real = m.disc(g.real, g.z_field_const);
            vgg_t.emplace_back(loss::perceptual_loss(fx, g.fake, g.real), inv_b);
            face_t.emplace_back(
                loss::face_identity_loss(fe, g.fake, g.real, g.target_map, face_region), inv_b);
            adv_t.emplace_back(loss::lsgan_g_loss(d_fake.logits), inv_b);
            fm_t.emplace_back(loss::feature_matching_loss(d_real, d_fake), inv_b);
            kl_t.emplace_back(ag::kl_std_normal(g.mu, g.log_var), inv_b);
        }
        loss::TermVars terms;
        terms.vgg = ag::wsum(vgg_t);
        terms.face = ag::wsum(face_t);
        terms.adv = ag::wsum(adv_t);
        terms.fm = ag::wsum(fm_t);
        terms.kl = ag::wsum(kl_t);
        ag::Var total = loss::weighted_total(terms, tc.weights);

        out.vgg = terms.vgg.value().item();
        out.face = terms.face.value().item();
        out.adv = terms.adv.value().item();
        out.fm = terms.fm.value().item();
        out.kl = terms.kl.value().item();
        out.loss_g = total.value().item();
        check_finite(out.vgg, "perceptual term", this_step);
        check_finite(out.face, "identity term", this_step);
        check_finite(out.adv, "adversarial term", this_step);
        check_finite(out.fm, "feature-matching term", this_step);
        check_finite(out.kl, "prior term", this_step);
        check_finite(out.loss_g, "generator loss", this_step);

        m.enc_params.zero_grads();
        m.gen_params.zero_grads();
        m.disc_params.zero_grads(); // scratch: written by backward, never stepped here
        ag::backward(total);
        out.grad_eg = grad_norm({&m.enc_params, &m.gen_params});
        check_finite(out.grad_eg, "generator gradient norm", this_step);
        opt_eg.step();
    }

    m.step = this_step;
    out.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

std::vector<std::string> optimizer_param_names(const ModelBundle& m, bool eg) {
    std::vector<std::string> names;
    if (eg) {
        for (const auto& [n, v] : m.enc_params.entries()) names.push_back("enc." + n);
        for (const auto& [n, v] : m.gen_params.entries()) names.push_back("gen." + n);
    } else {
        for (const auto& [n, v] : m.disc_params.entries()) names.push_back("disc." + n);
    }
    return names;
}

void pack_optimizer(const Adam& opt, const std::vector<std::string>& names,
                    const std::string& prefix, CheckpointData& ckpt) {
    require(opt.size() == names.size(), ErrorClass::internal, "optimizer/table size mismatch");
    for (size_t i = 0; i < names.size(); ++i) {
        ckpt.tensors.emplace_back(prefix + ".m." + names[i], opt.m_moments()[i]);
        ckpt.tensors.emplace_back(prefix + ".v." + names[i], opt.v_moments()[i]);
    }
}

void unpack_optimizer(Adam& opt, const std::vector<std::string>& names,
                      const std::string& prefix, const CheckpointData& ckpt) {
    require(opt.size() == names.size(), ErrorClass::internal, "optimizer/table size mismatch");
    for (size_t i = 0; i < names.size(); ++i) {
        const Tensor* mm = ckpt.find(prefix + ".m." + names[i]);
        const Tensor* vv = ckpt.find(prefix + ".v." + names[i]);
        require(mm && vv, ErrorClass::checkpoint_mismatch,
                "checkpoint lacks optimizer state for " + names[i]);
        require(mm->dims() == opt.m_moments()[i].dims() &&
                    vv->dims() == opt.v_moments()[i].dims(),
                ErrorClass::checkpoint_mismatch,
                "optimizer state shape mismatch for " + names[i]);
        opt.m_moment(i) = *mm;
        opt.v_moment(i) = *vv;
    }
}

} // namespace

FitResult fit(ModelBundle& m, const DatasetIndex& data, const NetConfig& net_cfg,
              const TrainConfig& tc, const std::string& out_dir, const CheckpointData* resume) {
    require(net_cfg == m.cfg, ErrorClass::config, "model bundle does not match the run config");
    require(tc.batch_size >= 1, ErrorClass::config, "batch_size must be positive");
    fs::create_directories(out_dir);

    Adam opt_eg(tc.lr, tc.beta1, tc.beta2, tc.adam_eps);
    Adam opt_d(tc.lr, tc.beta1, tc.beta2, tc.adam_eps);
    opt_eg.attach({&m.enc_params, &m.gen_params});
    opt_d.attach({&m.disc_params});
    Rng rng(Rng::derive_seed(tc.seed, "train.stream"));

    const std::vector<std::string> eg_names = optimizer_param_names(m, true);
    const std::vector<std::string> d_names = optimizer_param_names(m, false);

    if (resume) {
        require(resume->extra.contains("train_state"), ErrorClass::checkpoint_mismatch,
                "checkpoint carries no training state; it cannot seed a resume");
        const nlohmann::json& ts = resume->extra.at("train_state");
        unpack_optimizer(opt_eg, eg_names, "opt.eg", *resume);
        unpack_optimizer(opt_d, d_names, "opt.d", *resume);
        opt_eg.set_iterations(ts.at("opt_eg_t").get<long long>());
        opt_d.set_iterations(ts.at("opt_d_t").get<long long>());
        rng.load_state(ts.at("rng_state").get<std::string>());
    }

    const std::string csv_path = (fs::path(out_dir) / "metrics.csv").string();
    std::ofstream csv;
    if (resume && fs::exists(csv_path)) {
        csv.open(csv_path, std::ios::app);
    } else {
        csv.open(csv_path, std::ios::trunc);
        csv << StepMetrics::csv_header() << '\n';
    }
    require(csv.good(), ErrorClass::io, "cannot write metrics to " + csv_path);

    loss::StubFeatureExtractor fx;
    loss::StubFaceEmbedder fe;

    auto save = [&](const std::string& name) {
        CheckpointData ckpt;
        pack_models(m, ckpt);
        pack_optimizer(opt_eg, eg_names, "opt.eg", ckpt);
        pack_optimizer(opt_d, d_names, "opt.d", ckpt);
        ckpt.extra["train_state"] = {{"opt_eg_t", opt_eg.iterations()},
                                     {"opt_d_t", opt_d.iterations()},
                                     {"rng_state", rng.save_state()}};
        ckpt.extra["train_config"] = to_json(tc);
        const std::string path = (fs::path(out_dir) / name).string();
        save_checkpoint(path, ckpt);
        return path;
    };

    FitResult result;
    while (m.step < tc.steps) {
        std::vector<PairSample> batch;
        for (int i = 0; i < tc.batch_size; ++i)
            batch.push_back(sample_pair(data, m.cfg.parts, rng));
        StepMetrics metrics = train_step(m, batch, tc, opt_eg, opt_d, rng, fx, fe);
        csv << metrics.csv_row() << '\n';
        csv.flush();
        ++result.steps_run;
        if (tc.checkpoint_every > 0 && m.step % tc.checkpoint_every == 0 && m.step < tc.steps)
            save("ckpt_" + std::to_string(m.step) + ".bin");
    }
    result.final_checkpoint = save("ckpt_final.bin");
    result.metrics_csv = csv_path;
    return result;
}

} // namespace posegen::train
