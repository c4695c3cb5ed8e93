#pragma once

#include "posegen/densepose.hpp"
#include "posegen/tensor.hpp"

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace posegen::ag {

/** Reverse-mode autodiff over Tensor values.
 *
 *  Ops record a backward closure only when some input requires gradients, so
 *  inference-style calls run as plain forward evaluation. Graphs are one-shot:
 *  build, call backward() on a scalar root, read leaf grads, discard.
 */
struct Node {
    Tensor value;
    Tensor grad; // allocated on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void()> backward_fn;

    Tensor& grad_buf() {
        if (grad.empty()) grad = Tensor::zeros(value.dims());
        return grad;
    }
};

class Var {
public:
    Var() = default;

    static Var constant(Tensor v);
    static Var param(Tensor v);

    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    Tensor& value_mut() { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    Tensor& grad_buf() { return node_->grad_buf(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    void zero_grad() {
        if (node_ && !node_->grad.empty()) node_->grad.setZero();
    }

    const std::shared_ptr<Node>& node() const { return node_; }
    static Var wrap(std::shared_ptr<Node> n) {
        Var v;
        v.node_ = std::move(n);
        return v;
    }

private:
    std::shared_ptr<Node> node_;
};

/** Backprop from a scalar root (seeds d(root)/d(root) = 1). */
void backward(const Var& root);

Var detach(const Var& x);
Var reshape(const Var& x, std::vector<int> dims);
Var slice_flat(const Var& x, int offset, int len);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, Scalar c);

Var relu(const Var& x);
Var leaky_relu(const Var& x, Scalar slope = 0.2);
Var tanh(const Var& x);

struct ConvSpec {
    int stride = 1;
    int pad_t = 0, pad_b = 0, pad_l = 0, pad_r = 0;
};

// symmetric-enough padding presets used by the nets
ConvSpec same_conv(int k);              // stride 1, output size preserved
ConvSpec halving_conv(int k);           // stride 2, output size H/2 for even H

// x (Cin,H,W), w (Cout,Cin,k,k), b (Cout) -> (Cout,OH,OW)
Var conv2d(const Var& x, const Var& w, const Var& b, const ConvSpec& spec);

// per-channel normalization over the spatial plane, no affine terms
Var instance_norm(const Var& x, Scalar eps = 1e-5);

// x (In), w (Out,In), b (Out) -> (Out)
Var linear(const Var& x, const Var& w, const Var& b);

Var global_avg_pool(const Var& x);      // (C,H,W) -> (C)
Var avg_pool2(const Var& x);            // area-average downsample by 2
Var upsample_nearest2(const Var& x);
Var concat_channels(const Var& a, const Var& b);
Var crop(const Var& x, int y0, int x0, int h, int w);
Var resize_bilinear(const Var& x, int oh, int ow);

// latent-field ops
Var warp_broadcast(const Var& z, const DenseBodyMap& map);          // (M,N) -> (N,H,W)
Var warp_broadcast_noparts(const Var& z_flat, const DenseBodyMap& map); // (L) -> (L,H,W)
Var reparam(const Var& mu, const Var& log_var, const Tensor& eps);
Var kl_std_normal(const Var& mu, const Var& log_var); // -> scalar

// scalar reductions
Var l1_mean(const Var& a, const Var& b);
Var l1_sum(const Var& a, const Var& b);
Var mse_to(const Var& x, Scalar target);
Var dot_const(const Var& x, const Tensor& weights); // sum(w*x) -> scalar
Var wsum(const std::vector<std::pair<Var, Scalar>>& terms); // weighted scalar sum

} // namespace posegen::ag
