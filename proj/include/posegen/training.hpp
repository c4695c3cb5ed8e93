#pragma once

#include "posegen/atlas.hpp"
#include "posegen/checkpoint.hpp"
#include "posegen/data.hpp"
#include "posegen/losses.hpp"

namespace posegen::train {

/** Adam over one or more parameter tables; moments live here, values are
 *  updated in place. Parameters with empty gradients decay as zero-grad. */
class Adam {
public:
    Adam() = default;
    Adam(Scalar lr, Scalar beta1, Scalar beta2, Scalar eps)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void attach(std::vector<nn::ParamStore*> stores);
    void step();

    long long iterations() const { return t_; }
    void set_iterations(long long t) { t_ = t; }
    // flattened parameter order: stores in attach order, entries in table order
    const std::vector<Tensor>& m_moments() const { return m_; }
    const std::vector<Tensor>& v_moments() const { return v_; }
    Tensor& m_moment(size_t i) { return m_[i]; }
    Tensor& v_moment(size_t i) { return v_[i]; }
    size_t size() const { return params_.size(); }

private:
    Scalar lr_ = 2e-4, beta1_ = 0.5, beta2_ = 0.999, eps_ = 1e-8;
    std::vector<ag::Var> params_;
    std::vector<Tensor> m_, v_;
    long long t_ = 0;
};

struct StepMetrics {
    long long step = 0;
    Scalar loss_d = 0, loss_g = 0, vgg = 0, face = 0, adv = 0, fm = 0, kl = 0;
    Scalar grad_eg = 0, grad_d = 0;
    double wall_ms = 0;

    static std::string csv_header();
    std::string csv_row() const;
};

/** One optimization step on a batch of source/target pairs: discriminator
 *  update first (both generator-side inputs detached), then one joint
 *  encoder+generator update against the refreshed discriminator. */
StepMetrics train_step(ModelBundle& m, const std::vector<PairSample>& batch,
                       const TrainConfig& tc, Adam& opt_eg, Adam& opt_d, Rng& rng,
                       const loss::FeatureExtractor& fx, const loss::FaceEmbedder& fe);

struct FitResult {
    std::string final_checkpoint;
    std::string metrics_csv;
    long long steps_run = 0;
};

/** Run (or resume) a training loop to tc.steps total steps: streams metrics
 *  to <out_dir>/metrics.csv, checkpoints on the configured cadence and at the
 *  end. `resume` must be a checkpoint that carries training state; the
 *  continued run reproduces an uninterrupted one exactly. */
FitResult fit(ModelBundle& m, const DatasetIndex& data, const NetConfig& net_cfg,
              const TrainConfig& tc, const std::string& out_dir,
              const CheckpointData* resume = nullptr);

} // namespace posegen::train
