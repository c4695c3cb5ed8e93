#include "posegen/autograd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace posegen::ag {
namespace {

bool any_grad(std::initializer_list<const Var*> ins) {
    for (const Var* v : ins)
        if (v->requires_grad()) return true;
    return false;
}

std::shared_ptr<Node> make_node(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return n;
}

// Attach inputs + closure only when gradients can flow.
Var finish(std::shared_ptr<Node> n, std::initializer_list<Var> ins,
           std::function<void()> bwd) {
    bool need = false;
    for (const Var& v : ins) need = need || v.requires_grad();
    if (need) {
        n->requires_grad = true;
        for (const Var& v : ins) n->inputs.push_back(v.node());
        n->backward_fn = std::move(bwd);
    }
    return Var::wrap(std::move(n));
}

} // namespace

Var Var::constant(Tensor v) { return Var::wrap(make_node(std::move(v))); }

Var Var::param(Tensor v) {
    auto n = make_node(std::move(v));
    n->requires_grad = true;
    return Var::wrap(std::move(n));
}

void backward(const Var& root) {
    require(root.defined(), ErrorClass::internal, "backward on empty Var");
    require(root.value().size() == 1, ErrorClass::internal,
            "backward root must be scalar, got dims " + dims_str(root.value().dims()));
    if (!root.requires_grad()) return;
    root.node()->grad_buf().raw()[0] = 1.0;

    // iterative post-order DFS -> topological order
    std::vector<Node*> topo;
    std::unordered_set<Node*> done;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (done.count(n)) {
            stack.pop_back();
            continue;
        }
        if (idx < n->inputs.size()) {
            Node* child = n->inputs[idx++].get();
            if (!done.count(child) && child->requires_grad) stack.emplace_back(child, 0);
        } else {
            done.insert(n);
            topo.push_back(n);
            stack.pop_back();
        }
    }
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn();
    }
}

Var detach(const Var& x) { return Var::constant(x.value()); }

Var reshape(const Var& x, std::vector<int> dims) {
    Tensor out = x.value().reshaped(dims);
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xin = x.node().get();
    return finish(std::move(n), {x}, [self, xin] {
        if (xin->requires_grad) xin->grad_buf().raw() += self->grad.raw();
    });
}

Var slice_flat(const Var& x, int offset, int len) {
    require(offset >= 0 && len >= 0 && offset + len <= x.value().size(),
            ErrorClass::internal, "slice_flat out of range");
    Tensor out = Tensor::zeros({len});
    out.raw() = x.value().raw().segment(offset, len);
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xin = x.node().get();
    return finish(std::move(n), {x}, [self, xin, offset, len] {
        if (xin->requires_grad)
            xin->grad_buf().raw().segment(offset, len) += self->grad.raw();
    });
}

Var add(const Var& a, const Var& b) {
    require(a.value().same_dims(b.value()), ErrorClass::internal,
            "add: shape mismatch " + dims_str(a.value().dims()) + " vs " +
                dims_str(b.value().dims()));
    Tensor out(a.value());
    out.raw() += b.value().raw();
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* an = a.node().get();
    Node* bn = b.node().get();
    return finish(std::move(n), {a, b}, [self, an, bn] {
        if (an->requires_grad) an->grad_buf().raw() += self->grad.raw();
        if (bn->requires_grad) bn->grad_buf().raw() += self->grad.raw();
    });
}

Var sub(const Var& a, const Var& b) {
    require(a.value().same_dims(b.value()), ErrorClass::internal, "sub: shape mismatch");
    Tensor out(a.value());
    out.raw() -= b.value().raw();
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* an = a.node().get();
    Node* bn = b.node().get();
    return finish(std::move(n), {a, b}, [self, an, bn] {
        if (an->requires_grad) an->grad_buf().raw() += self->grad.raw();
        if (bn->requires_grad) bn->grad_buf().raw() -= self->grad.raw();
    });
}

Var scale(const Var& a, Scalar c) {
    Tensor out(a.value());
    out.raw() *= c;
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* an = a.node().get();
    return finish(std::move(n), {a}, [self, an, c] {
        if (an->requires_grad) an->grad_buf().raw() += c * self->grad.raw();
    });
}

Var relu(const Var& x) {
    Tensor out(x.value());
    out.raw() = out.raw().max(0.0);
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn] {
        if (!xn->requires_grad) return;
        xn->grad_buf().raw() +=
            self->grad.raw() * (xn->value.raw() > 0.0).cast<Scalar>();
    });
}

Var leaky_relu(const Var& x, Scalar slope) {
    Tensor out(x.value());
    out.raw() = out.raw().max(slope * out.raw());
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, slope] {
        if (!xn->requires_grad) return;
        ArrayX gate = (xn->value.raw() > 0.0).select(ArrayX::Ones(xn->value.size()),
                                                     ArrayX::Constant(xn->value.size(), slope));
        xn->grad_buf().raw() += self->grad.raw() * gate;
    });
}

Var tanh(const Var& x) {
    Tensor out(x.value());
    out.raw() = out.raw().tanh();
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn] {
        if (!xn->requires_grad) return;
        xn->grad_buf().raw() += self->grad.raw() * (1.0 - self->value.raw().square());
    });
}

ConvSpec same_conv(int k) {
    ConvSpec s;
    s.stride = 1;
    s.pad_t = s.pad_l = (k - 1) / 2;
    s.pad_b = s.pad_r = k - 1 - s.pad_t;
    return s;
}

ConvSpec halving_conv(int k) {
    ConvSpec s;
    s.stride = 2;
    s.pad_t = s.pad_b = s.pad_l = s.pad_r = (k - 1) / 2;
    return s;
}

namespace {

struct ConvDims {
    int cin, h, w, cout, kh, kw, oh, ow;
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, const ConvSpec& s) {
    require(x.ndim() == 3 && w.ndim() == 4, ErrorClass::internal,
            "conv2d expects (C,H,W) input and (O,C,kh,kw) weight");
    ConvDims d;
    d.cin = x.dim(0);
    d.h = x.dim(1);
    d.w = x.dim(2);
    d.cout = w.dim(0);
    d.kh = w.dim(2);
    d.kw = w.dim(3);
    require(w.dim(1) == d.cin, ErrorClass::internal,
            "conv2d channel mismatch: input " + std::to_string(d.cin) + ", weight " +
                std::to_string(w.dim(1)));
    d.oh = (d.h + s.pad_t + s.pad_b - d.kh) / s.stride + 1;
    d.ow = (d.w + s.pad_l + s.pad_r - d.kw) / s.stride + 1;
    require(d.oh > 0 && d.ow > 0, ErrorClass::internal, "conv2d output would be empty");
    return d;
}

// columns matrix K x P, K = Cin*kh*kw with k=(ci*kh+ky)*kw+kx, P = OH*OW with p=oy*OW+ox
MatrixX im2col(const Tensor& x, const ConvDims& d, const ConvSpec& s) {
    const int K = d.cin * d.kh * d.kw;
    const int P = d.oh * d.ow;
    MatrixX col = MatrixX::Zero(K, P);
    const Scalar* src = x.raw().data();
    for (int oy = 0; oy < d.oh; ++oy) {
        for (int ox = 0; ox < d.ow; ++ox) {
            const int p = oy * d.ow + ox;
            const int iy0 = oy * s.stride - s.pad_t;
            const int ix0 = ox * s.stride - s.pad_l;
            Scalar* dst = col.data() + static_cast<ptrdiff_t>(p) * K;
            for (int ci = 0; ci < d.cin; ++ci) {
                const Scalar* plane = src + static_cast<ptrdiff_t>(ci) * d.h * d.w;
                for (int ky = 0; ky < d.kh; ++ky) {
                    const int iy = iy0 + ky;
                    if (iy < 0 || iy >= d.h) {
                        dst += d.kw;
                        continue;
                    }
                    const Scalar* row = plane + static_cast<ptrdiff_t>(iy) * d.w;
                    for (int kx = 0; kx < d.kw; ++kx) {
                        const int ix = ix0 + kx;
                        *dst++ = (ix >= 0 && ix < d.w) ? row[ix] : 0.0;
                    }
                }
            }
        }
    }
    return col;
}

void col2im_add(const MatrixX& col, const ConvDims& d, const ConvSpec& s, Tensor& dx) {
    const int K = d.cin * d.kh * d.kw;
    Scalar* out = dx.raw().data();
    for (int oy = 0; oy < d.oh; ++oy) {
        for (int ox = 0; ox < d.ow; ++ox) {
            const int p = oy * d.ow + ox;
            const int iy0 = oy * s.stride - s.pad_t;
            const int ix0 = ox * s.stride - s.pad_l;
            const Scalar* src = col.data() + static_cast<ptrdiff_t>(p) * K;
            for (int ci = 0; ci < d.cin; ++ci) {
                Scalar* plane = out + static_cast<ptrdiff_t>(ci) * d.h * d.w;
                for (int ky = 0; ky < d.kh; ++ky) {
                    const int iy = iy0 + ky;
                    if (iy < 0 || iy >= d.h) {
                        src += d.kw;
                        continue;
                    }
                    Scalar* row = plane + static_cast<ptrdiff_t>(iy) * d.w;
                    for (int kx = 0; kx < d.kw; ++kx) {
                        const int ix = ix0 + kx;
                        if (ix >= 0 && ix < d.w) row[ix] += src[kx];
                    }
                    src += d.kw;
                }
            }
        }
    }
}

} // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, const ConvSpec& spec) {
    const ConvDims d = conv_dims(x.value(), w.value(), spec);
    require(b.value().ndim() == 1 && b.value().dim(0) == d.cout, ErrorClass::internal,
            "conv2d bias shape mismatch");
    const int K = d.cin * d.kh * d.kw;
    const int P = d.oh * d.ow;

    // weight flat layout ((o*Cin+ci)*kh+ky)*kw+kx reads column-major as (K, Cout)
    Eigen::Map<const MatrixX> wmap(w.value().raw().data(), K, d.cout);
    MatrixX col = im2col(x.value(), d, spec);

    Tensor out = Tensor::zeros({d.cout, d.oh, d.ow});
    // (P,Cout) column-major == (Cout,OH,OW) flat with contiguous channel planes
    Eigen::Map<MatrixX> ymap(out.raw().data(), P, d.cout);
    ymap.noalias() = col.transpose() * wmap;
    for (int o = 0; o < d.cout; ++o) ymap.col(o).array() += b.value().raw()[o];

    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    Node* wn = w.node().get();
    Node* bn = b.node().get();
    return finish(std::move(n), {x, w, b}, [self, xn, wn, bn, d, spec, K, P] {
        Eigen::Map<const MatrixX> dymap(self->grad.raw().data(), P, d.cout);
        // columns are recomputed here instead of kept alive in the closure: the
        // graph holds one col matrix at a time instead of one per conv layer
        if (wn->requires_grad || bn->requires_grad) {
            if (wn->requires_grad) {
                MatrixX col = im2col(xn->value, d, spec);
                Eigen::Map<MatrixX> dwmap(wn->grad_buf().raw().data(), K, d.cout);
                dwmap.noalias() += col * dymap;
            }
            if (bn->requires_grad) {
                ArrayX& db = bn->grad_buf().raw();
                for (int o = 0; o < d.cout; ++o) db[o] += dymap.col(o).sum();
            }
        }
        if (xn->requires_grad) {
            Eigen::Map<const MatrixX> wmap(wn->value.raw().data(), K, d.cout);
            MatrixX dcol(K, P);
            dcol.noalias() = wmap * dymap.transpose();
            col2im_add(dcol, d, spec, xn->grad_buf());
        }
    });
}

Var instance_norm(const Var& x, Scalar eps) {
    require(x.value().ndim() == 3, ErrorClass::internal, "instance_norm expects (C,H,W)");
    const int C = x.value().dim(0);
    const int plane = x.value().dim(1) * x.value().dim(2);
    Tensor out = Tensor::zeros(x.value().dims());
    VectorX inv_std(C);
    for (int c = 0; c < C; ++c) {
        auto xs = x.value().raw().segment(static_cast<ptrdiff_t>(c) * plane, plane);
        const Scalar mu = xs.mean();
        const Scalar var = (xs - mu).square().mean();
        inv_std[c] = 1.0 / std::sqrt(var + eps);
        out.raw().segment(static_cast<ptrdiff_t>(c) * plane, plane) = (xs - mu) * inv_std[c];
    }
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, C, plane, inv_std] {
        if (!xn->requires_grad) return;
        ArrayX& dx = xn->grad_buf().raw();
        for (int c = 0; c < C; ++c) {
            const ptrdiff_t off = static_cast<ptrdiff_t>(c) * plane;
            auto dy = self->grad.raw().segment(off, plane);
            auto yh = self->value.raw().segment(off, plane);
            const Scalar m_dy = dy.mean();
            const Scalar m_dyy = (dy * yh).mean();
            dx.segment(off, plane) += inv_std[c] * (dy - m_dy - yh * m_dyy);
        }
    });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    require(x.value().ndim() == 1 && w.value().ndim() == 2 && b.value().ndim() == 1,
            ErrorClass::internal, "linear expects vector input, (O,I) weight, (O) bias");
    const int in = x.value().dim(0);
    const int out_n = w.value().dim(0);
    require(w.value().dim(1) == in && b.value().dim(0) == out_n, ErrorClass::internal,
            "linear shape mismatch");
    // row-major (O,I) reads column-major as (I,O)
    Eigen::Map<const MatrixX> wmap(w.value().raw().data(), in, out_n);
    Eigen::Map<const VectorX> xv(x.value().raw().data(), in);
    Tensor out = Tensor::zeros({out_n});
    Eigen::Map<VectorX> yv(out.raw().data(), out_n);
    yv.noalias() = wmap.transpose() * xv;
    yv += Eigen::Map<const VectorX>(b.value().raw().data(), out_n);

    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    Node* wn = w.node().get();
    Node* bn = b.node().get();
    return finish(std::move(n), {x, w, b}, [self, xn, wn, bn, in, out_n] {
        Eigen::Map<const VectorX> dy(self->grad.raw().data(), out_n);
        if (wn->requires_grad) {
            Eigen::Map<const VectorX> xv(xn->value.raw().data(), in);
            Eigen::Map<MatrixX> dw(wn->grad_buf().raw().data(), in, out_n);
            dw.noalias() += xv * dy.transpose();
        }
        if (bn->requires_grad)
            Eigen::Map<VectorX>(bn->grad_buf().raw().data(), out_n) += dy;
        if (xn->requires_grad) {
            Eigen::Map<const MatrixX> wmap(wn->value.raw().data(), in, out_n);
            Eigen::Map<VectorX>(xn->grad_buf().raw().data(), in).noalias() += wmap * dy;
        }
    });
}

Var global_avg_pool(const Var& x) {
    require(x.value().ndim() == 3, ErrorClass::internal, "global_avg_pool expects (C,H,W)");
    const int C = x.value().dim(0);
    const int plane = x.value().dim(1) * x.value().dim(2);
    Tensor out = Tensor::zeros({C});
    for (int c = 0; c < C; ++c)
        out.raw()[c] = x.value().raw().segment(static_cast<ptrdiff_t>(c) * plane, plane).mean();
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, C, plane] {
        if (!xn->requires_grad) return;
        ArrayX& dx = xn->grad_buf().raw();
        for (int c = 0; c < C; ++c)
            dx.segment(static_cast<ptrdiff_t>(c) * plane, plane) += self->grad.raw()[c] / plane;
    });
}

Var avg_pool2(const Var& x) {
    require(x.value().ndim() == 3, ErrorClass::internal, "avg_pool2 expects (C,H,W)");
    const int C = x.value().dim(0), H = x.value().dim(1), W = x.value().dim(2);
    require(H % 2 == 0 && W % 2 == 0, ErrorClass::internal,
            "avg_pool2 needs even spatial dims, got " + dims_str(x.value().dims()));
    const int oh = H / 2, ow = W / 2;
    Tensor out = Tensor::zeros({C, oh, ow});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < oh; ++y)
            for (int xx = 0; xx < ow; ++xx)
                out.at3(c, y, xx) = 0.25 * (x.value().at3(c, 2 * y, 2 * xx) +
                                            x.value().at3(c, 2 * y, 2 * xx + 1) +
                                            x.value().at3(c, 2 * y + 1, 2 * xx) +
                                            x.value().at3(c, 2 * y + 1, 2 * xx + 1));
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, C, oh, ow] {
        if (!xn->requires_grad) return;
        Tensor& dx = xn->grad_buf();
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < oh; ++y)
                for (int xx = 0; xx < ow; ++xx) {
                    const Scalar g = 0.25 * self->grad.at3(c, y, xx);
                    dx.at3(c, 2 * y, 2 * xx) += g;
                    dx.at3(c, 2 * y, 2 * xx + 1) += g;
                    dx.at3(c, 2 * y + 1, 2 * xx) += g;
                    dx.at3(c, 2 * y + 1, 2 * xx + 1) += g;
                }
    });
}

Var upsample_nearest2(const Var& x) {
    require(x.value().ndim() == 3, ErrorClass::internal, "upsample_nearest2 expects (C,H,W)");
    const int C = x.value().dim(0), H = x.value().dim(1), W = x.value().dim(2);
    Tensor out = Tensor::zeros({C, 2 * H, 2 * W});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < 2 * H; ++y)
            for (int xx = 0; xx < 2 * W; ++xx)
                out.at3(c, y, xx) = x.value().at3(c, y / 2, xx / 2);
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, C, H, W] {
        if (!xn->requires_grad) return;
        Tensor& dx = xn->grad_buf();
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < 2 * H; ++y)
                for (int xx = 0; xx < 2 * W; ++xx)
                    dx.at3(c, y / 2, xx / 2) += self->grad.at3(c, y, xx);
    });
}

Var concat_channels(const Var& a, const Var& b) {
    require(a.value().ndim() == 3 && b.value().ndim() == 3 &&
                a.value().dim(1) == b.value().dim(1) && a.value().dim(2) == b.value().dim(2),
            ErrorClass::internal, "concat_channels spatial mismatch");
    const int ca = a.value().dim(0), cb = b.value().dim(0);
    const int plane = a.value().dim(1) * a.value().dim(2);
    Tensor out = Tensor::zeros({ca + cb, a.value().dim(1), a.value().dim(2)});
    out.raw().head(static_cast<ptrdiff_t>(ca) * plane) = a.value().raw();
    out.raw().tail(static_cast<ptrdiff_t>(cb) * plane) = b.value().raw();
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* an = a.node().get();
    Node* bn = b.node().get();
    return finish(std::move(n), {a, b}, [self, an, bn, ca, cb, plane] {
        if (an->requires_grad)
            an->grad_buf().raw() += self->grad.raw().head(static_cast<ptrdiff_t>(ca) * plane);
        if (bn->requires_grad)
            bn->grad_buf().raw() += self->grad.raw().tail(static_cast<ptrdiff_t>(cb) * plane);
    });
}

Var crop(const Var& x, int y0, int x0, int h, int w) {
    require(x.value().ndim() == 3, ErrorClass::internal, "crop expects (C,H,W)");
    const int C = x.value().dim(0), H = x.value().dim(1), W = x.value().dim(2);
    require(y0 >= 0 && x0 >= 0 && h > 0 && w > 0 && y0 + h <= H && x0 + w <= W,
            ErrorClass::internal, "crop window out of bounds");
    Tensor out = Tensor::zeros({C, h, w});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                out.at3(c, y, xx) = x.value().at3(c, y0 + y, x0 + xx);
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, C, y0, x0, h, w] {
        if (!xn->requires_grad) return;
        Tensor& dx = xn->grad_buf();
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    dx.at3(c, y0 + y, x0 + xx) += self->grad.at3(c, y, xx);
    });
}

namespace {

struct LerpAxis {
    std::vector<int> i0, i1;
    std::vector<Scalar> f; // weight on i1
};

// half-pixel-center sampling grid for one axis
LerpAxis lerp_axis(int in_n, int out_n) {
    LerpAxis ax;
    ax.i0.resize(out_n);
    ax.i1.resize(out_n);
    ax.f.resize(out_n);
    const Scalar scale = static_cast<Scalar>(in_n) / out_n;
    for (int o = 0; o < out_n; ++o) {
        Scalar src = (o + 0.5) * scale - 0.5;
        src = std::min(std::max(src, 0.0), static_cast<Scalar>(in_n - 1));
        const int lo = static_cast<int>(std::floor(src));
        ax.i0[o] = lo;
        ax.i1[o] = std::min(lo + 1, in_n - 1);
        ax.f[o] = src - lo;
    }
    return ax;
}

} // namespace

Var resize_bilinear(const Var& x, int oh, int ow) {
    require(x.value().ndim() == 3, ErrorClass::internal, "resize_bilinear expects (C,H,W)");
    require(oh > 0 && ow > 0, ErrorClass::internal, "resize_bilinear target must be positive");
    const int C = x.value().dim(0), H = x.value().dim(1), W = x.value().dim(2);
    const LerpAxis ay = lerp_axis(H, oh);
    const LerpAxis axx = lerp_axis(W, ow);
    Tensor out = Tensor::zeros({C, oh, ow});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < oh; ++y)
            for (int xx = 0; xx < ow; ++xx) {
                const Scalar fy = ay.f[y], fx = axx.f[xx];
                out.at3(c, y, xx) =
                    (1 - fy) * (1 - fx) * x.value().at3(c, ay.i0[y], axx.i0[xx]) +
                    (1 - fy) * fx * x.value().at3(c, ay.i0[y], axx.i1[xx]) +
                    fy * (1 - fx) * x.value().at3(c, ay.i1[y], axx.i0[xx]) +
                    fy * fx * x.value().at3(c, ay.i1[y], axx.i1[xx]);
            }
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, C, oh, ow, ay, axx] {
        if (!xn->requires_grad) return;
        Tensor& dx = xn->grad_buf();
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < oh; ++y)
                for (int xx = 0; xx < ow; ++xx) {
                    const Scalar g = self->grad.at3(c, y, xx);
                    const Scalar fy = ay.f[y], fx = axx.f[xx];
                    dx.at3(c, ay.i0[y], axx.i0[xx]) += (1 - fy) * (1 - fx) * g;
                    dx.at3(c, ay.i0[y], axx.i1[xx]) += (1 - fy) * fx * g;
                    dx.at3(c, ay.i1[y], axx.i0[xx]) += fy * (1 - fx) * g;
                    dx.at3(c, ay.i1[y], axx.i1[xx]) += fy * fx * g;
                }
    });
}

Var warp_broadcast(const Var& z, const DenseBodyMap& map) {
    Tensor out = Tensor::zeros({static_cast<int>(z.value().dim(1)), map.height(), map.width()});
    {
        // value path shares the plain implementation in latent.cpp; inline here
        // to reuse the map reference without an extra copy
        const int N = z.value().dim(1);
        for (int y = 0; y < map.height(); ++y)
            for (int x = 0; x < map.width(); ++x) {
                const int p = map.part(y, x);
                if (p == 0) continue;
                require(p <= z.value().dim(0), ErrorClass::data,
                        "warp_broadcast: part index " + std::to_string(p) +
                            " exceeds latent rows " + std::to_string(z.value().dim(0)));
                for (int c = 0; c < N; ++c) out.at3(c, y, x) = z.value().at2(p - 1, c);
            }
    }
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* zn = z.node().get();
    GridI part = map.part;
    return finish(std::move(n), {z}, [self, zn, part = std::move(part)] {
        if (!zn->requires_grad) return;
        Tensor& dz = zn->grad_buf();
        const int N = zn->value.dim(1);
        for (int y = 0; y < part.rows(); ++y)
            for (int x = 0; x < part.cols(); ++x) {
                const int p = part(y, x);
                if (p == 0) continue;
                for (int c = 0; c < N; ++c) dz.at2(p - 1, c) += self->grad.at3(c, y, x);
            }
    });
}

Var warp_broadcast_noparts(const Var& z_flat, const DenseBodyMap& map) {
    require(z_flat.value().ndim() == 1, ErrorClass::internal,
            "warp_broadcast_noparts expects a flat latent vector");
    const int L = z_flat.value().dim(0);
    Tensor out = Tensor::zeros({L, map.height(), map.width()});
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            if (map.part(y, x) == 0) continue;
            for (int c = 0; c < L; ++c) out.at3(c, y, x) = z_flat.value().raw()[c];
        }
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* zn = z_flat.node().get();
    GridI part = map.part;
    return finish(std::move(n), {z_flat}, [self, zn, part = std::move(part), L] {
        if (!zn->requires_grad) return;
        ArrayX& dz = zn->grad_buf().raw();
        for (int y = 0; y < part.rows(); ++y)
            for (int x = 0; x < part.cols(); ++x) {
                if (part(y, x) == 0) continue;
                for (int c = 0; c < L; ++c) dz[c] += self->grad.at3(c, y, x);
            }
    });
}

Var reparam(const Var& mu, const Var& log_var, const Tensor& eps) {
    require(mu.value().same_dims(log_var.value()) && mu.value().same_dims(eps),
            ErrorClass::internal, "reparam shape mismatch");
    Tensor out(mu.value());
    out.raw() += (0.5 * log_var.value().raw()).exp() * eps.raw();
    auto n = make_node(std::move(out));
    Node* self = n.get();
    Node* mn = mu.node().get();
    Node* ln = log_var.node().get();
    Tensor eps_c(eps);
    return finish(std::move(n), {mu, log_var}, [self, mn, ln, eps_c = std::move(eps_c)] {
        if (mn->requires_grad) mn->grad_buf().raw() += self->grad.raw();
        if (ln->requires_grad)
            ln->grad_buf().raw() +=
                self->grad.raw() * eps_c.raw() * 0.5 * (0.5 * ln->value.raw()).exp();
    });
}

Var kl_std_normal(const Var& mu, const Var& log_var) {
    require(mu.value().same_dims(log_var.value()), ErrorClass::internal,
            "kl_std_normal shape mismatch");
    const Scalar kl = 0.5 * (mu.value().raw().square() + log_var.value().raw().exp() -
                             log_var.value().raw() - 1.0)
                                .sum();
    auto n = make_node(Tensor::scalar(kl));
    Node* self = n.get();
    Node* mn = mu.node().get();
    Node* ln = log_var.node().get();
    return finish(std::move(n), {mu, log_var}, [self, mn, ln] {
        const Scalar g = self->grad.raw()[0];
        if (mn->requires_grad) mn->grad_buf().raw() += g * mn->value.raw();
        if (ln->requires_grad)
            ln->grad_buf().raw() += g * 0.5 * (ln->value.raw().exp() - 1.0);
    });
}

Var l1_mean(const Var& a, const Var& b) {
    require(a.value().same_dims(b.value()), ErrorClass::internal, "l1_mean shape mismatch");
    const int n_el = a.value().size();
    const Scalar v = (a.value().raw() - b.value().raw()).abs().mean();
    auto n = make_node(Tensor::scalar(v));
    Node* self = n.get();
    Node* an = a.node().get();
    Node* bn = b.node().get();
    return finish(std::move(n), {a, b}, [self, an, bn, n_el] {
        const Scalar g = self->grad.raw()[0] / n_el;
        ArrayX s = (an->value.raw() - bn->value.raw()).sign();
        if (an->requires_grad) an->grad_buf().raw() += g * s;
        if (bn->requires_grad) bn->grad_buf().raw() -= g * s;
    });
}

Var l1_sum(const Var& a, const Var& b) {
    require(a.value().same_dims(b.value()), ErrorClass::internal, "l1_sum shape mismatch");
    const Scalar v = (a.value().raw() - b.value().raw()).abs().sum();
    auto n = make_node(Tensor::scalar(v));
    Node* self = n.get();
    Node* an = a.node().get();
    Node* bn = b.node().get();
    return finish(std::move(n), {a, b}, [self, an, bn] {
        const Scalar g = self->grad.raw()[0];
        ArrayX s = (an->value.raw() - bn->value.raw()).sign();
        if (an->requires_grad) an->grad_buf().raw() += g * s;
        if (bn->requires_grad) bn->grad_buf().raw() -= g * s;
    });
}

Var mse_to(const Var& x, Scalar target) {
    const int n_el = x.value().size();
    const Scalar v = (x.value().raw() - target).square().mean();
    auto n = make_node(Tensor::scalar(v));
    Node* self = n.get();
    Node* xn = x.node().get();
    return finish(std::move(n), {x}, [self, xn, target, n_el] {
        if (!xn->requires_grad) return;
        const Scalar g = self->grad.raw()[0];
        xn->grad_buf().raw() += g * 2.0 / n_el * (xn->value.raw() - target);
    });
}

Var dot_const(const Var& x, const Tensor& weights) {
    require(x.value().same_dims(weights), ErrorClass::internal, "dot_const shape mismatch");
    const Scalar v = (x.value().raw() * weights.raw()).sum();
    auto n = make_node(Tensor::scalar(v));
    Node* self = n.get();
    Node* xn = x.node().get();
    Tensor wc(weights);
    return finish(std::move(n), {x}, [self, xn, wc = std::move(wc)] {
        if (!xn->requires_grad) return;
        xn->grad_buf().raw() += self->grad.raw()[0] * wc.raw();
    });
}

Var wsum(const std::vector<std::pair<Var, Scalar>>& terms) {
    require(!terms.empty(), ErrorClass::internal, "wsum needs at least one term");
    Scalar v = 0;
    for (const auto& [t, w] : terms) {
        require(t.value().size() == 1, ErrorClass::internal, "wsum terms must be scalars");
        v += w * t.value().item();
    }
    auto n = make_node(Tensor::scalar(v));
    Node* self = n.get();
    bool need = false;
    for (const auto& [t, w] : terms) need = need || t.requires_grad();
    if (!need) return Var::wrap(std::move(n));
    n->requires_grad = true;
    std::vector<std::pair<Node*, Scalar>> ins;
    for (const auto& [t, w] : terms) {
        n->inputs.push_back(t.node());
        ins.emplace_back(t.node().get(), w);
    }
    n->backward_fn = [self, ins = std::move(ins)] {
        const Scalar g = self->grad.raw()[0];
        for (const auto& [t, w] : ins)
            if (t->requires_grad) t->grad_buf().raw()[0] += w * g;
    };
    return Var::wrap(std::move(n));
}

} // namespace posegen::ag
