#include "sleepssl/nn/layers.hpp"

#include <cmath>

namespace sleepssl::nn {

namespace {

void he_uniform(Tensor& w, int fan_in, Rng& rng) {
    const float limit = std::sqrt(6.0f / static_cast<float>(fan_in));
    std::uniform_real_distribution<float> u(-limit, limit);
    for (float& v : w.data) v = u(rng);
}

}  // namespace

// ---------------------------------------------------------------- Linear

Linear::Linear(int in_dim, int out_dim, Rng& rng)
    : weight("weight", {out_dim, in_dim}),
      bias("bias", {out_dim}),
      in_dim_(in_dim),
      out_dim_(out_dim) {
    he_uniform(weight.value, in_dim, rng);
}

Tensor Linear::forward(const Tensor& x, bool) {
    if (x.rank() != 2 || x.dim(1) != in_dim_)
        throw std::invalid_argument("linear: expected [N x " +
                                    std::to_string(in_dim_) + "], got " +
                                    x.shape_str());
    x_ = x;
    const int n = x.dim(0);
    Tensor y({n, out_dim_});
    y.mat2().noalias() = x.mat2() * weight.value.mat2().transpose();
    y.mat2().rowwise() += bias.value.mat(1, out_dim_).row(0);
    return y;
}

Tensor Linear::backward(const Tensor& gy) {
    const int n = x_.dim(0);
    weight.grad.mat2().noalias() += gy.mat2().transpose() * x_.mat2();
    // fixed-order accumulation: Eigen map reductions vary the summation
    // order with buffer alignment, which breaks bit reproducibility
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < out_dim_; ++c)
            bias.grad.data[static_cast<std::size_t>(c)] +=
                gy.data[static_cast<std::size_t>(r) * out_dim_ + c];
    Tensor dx({n, in_dim_});
    dx.mat2().noalias() = gy.mat2() * weight.value.mat2();
    return dx;
}

void Linear::collect(const std::string& p, std::vector<NamedParam>& out) {
    out.push_back({p + ".weight", &weight});
    out.push_back({p + ".bias", &bias});
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(int in_ch, int out_ch, int kernel, int stride, int pad,
               Rng& rng)
    : weight("weight", {out_ch, in_ch * kernel}),
      bias("bias", {out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      k_(kernel),
      stride_(stride),
      pad_(pad) {
    he_uniform(weight.value, in_ch * kernel, rng);
}

Tensor Conv1d::forward(const Tensor& x, bool) {
    if (x.rank() != 3 || x.dim(1) != in_ch_)
        throw std::invalid_argument("conv1d: expected [N," +
                                    std::to_string(in_ch_) + ",L], got " +
                                    x.shape_str());
    const int n = x.dim(0), len = x.dim(2);
    if (len + 2 * pad_ < k_)
        throw std::invalid_argument("conv1d: input shorter than kernel");
    out_len_ = (len + 2 * pad_ - k_) / stride_ + 1;
    in_shape_ = x.shape;

    col_ = Tensor({in_ch_ * k_, n * out_len_});
    auto cm = col_.mat2();
    for (int b = 0; b < n; ++b) {
        const float* xb = x.ptr() + static_cast<std::size_t>(b) * in_ch_ * len;
        for (int c = 0; c < in_ch_; ++c)
            for (int t = 0; t < k_; ++t) {
                const int row = c * k_ + t;
                for (int o = 0; o < out_len_; ++o) {
                    const int src = o * stride_ + t - pad_;
                    cm(row, b * out_len_ + o) =
                        (src >= 0 && src < len) ? xb[c * len + src] : 0.0f;
                }
            }
    }

    MatrixRM ym = weight.value.mat2() * cm;  // [out_ch x n*outL]
    Tensor y({n, out_ch_, out_len_});
    const float* bp = bias.value.ptr();
    for (int b = 0; b < n; ++b)
        for (int oc = 0; oc < out_ch_; ++oc)
            for (int o = 0; o < out_len_; ++o)
                y.data[(static_cast<std::size_t>(b) * out_ch_ + oc) * out_len_ +
                       o] = ym(oc, b * out_len_ + o) + bp[oc];
    return y;
}

Tensor Conv1d::backward(const Tensor& gy) {
    const int n = in_shape_[0], len = in_shape_[2];
    MatrixRM gm(out_ch_, n * out_len_);
    for (int b = 0; b < n; ++b)
        for (int oc = 0; oc < out_ch_; ++oc)
            for (int o = 0; o < out_len_; ++o)
                gm(oc, b * out_len_ + o) =
                    gy.data[(static_cast<std::size_t>(b) * out_ch_ + oc) *
                                out_len_ + o];

    weight.grad.mat2().noalias() += gm * col_.mat2().transpose();
    bias.grad.mat(1, out_ch_).noalias() += gm.rowwise().sum().transpose();

    MatrixRM dcol = weight.value.mat2().transpose() * gm;  // [C*k x n*outL]
    Tensor dx(in_shape_);
    for (int b = 0; b < n; ++b) {
        float* db = dx.ptr() + static_cast<std::size_t>(b) * in_ch_ * len;
        for (int c = 0; c < in_ch_; ++c)
            for (int t = 0; t < k_; ++t) {
                const int row = c * k_ + t;
                for (int o = 0; o < out_len_; ++o) {
                    const int src = o * stride_ + t - pad_;
                    if (src >= 0 && src < len)
                        db[c * len + src] += dcol(row, b * out_len_ + o);
                }
            }
    }
    return dx;
}

void Conv1d::collect(const std::string& p, std::vector<NamedParam>& out) {
    out.push_back({p + ".weight", &weight});
    out.push_back({p + ".bias", &bias});
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad,
               Rng& rng)
    : weight("weight", {out_ch, in_ch * kernel * kernel}),
      bias("bias", {out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      k_(kernel),
      stride_(stride),
      pad_(pad) {
    he_uniform(weight.value, in_ch * kernel * kernel, rng);
}

Tensor Conv2d::forward(const Tensor& x, bool) {
    if (x.rank() != 4 || x.dim(1) != in_ch_)
        throw std::invalid_argument("conv2d: expected [N," +
                                    std::to_string(in_ch_) + ",H,W], got " +
                                    x.shape_str());
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    if (h + 2 * pad_ < k_ || w + 2 * pad_ < k_)
        throw std::invalid_argument("conv2d: input smaller than kernel");
    out_h_ = (h + 2 * pad_ - k_) / stride_ + 1;
    out_w_ = (w + 2 * pad_ - k_) / stride_ + 1;
    in_shape_ = x.shape;
    const int ohw = out_h_ * out_w_;

    col_ = Tensor({in_ch_ * k_ * k_, n * ohw});
    auto cm = col_.mat2();
    for (int b = 0; b < n; ++b) {
        const float* xb =
            x.ptr() + static_cast<std::size_t>(b) * in_ch_ * h * w;
        for (int c = 0; c < in_ch_; ++c)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj) {
                    const int row = (c * k_ + ki) * k_ + kj;
                    for (int oi = 0; oi < out_h_; ++oi) {
                        const int si = oi * stride_ + ki - pad_;
                        for (int oj = 0; oj < out_w_; ++oj) {
                            const int sj = oj * stride_ + kj - pad_;
                            cm(row, b * ohw + oi * out_w_ + oj) =
                                (si >= 0 && si < h && sj >= 0 && sj < w)
                                    ? xb[(c * h + si) * w + sj]
                                    : 0.0f;
                        }
                    }
                }
    }

    MatrixRM ym = weight.value.mat2() * cm;
    Tensor y({n, out_ch_, out_h_, out_w_});
    const float* bp = bias.value.ptr();
    for (int b = 0; b < n; ++b)
        for (int oc = 0; oc < out_ch_; ++oc)
            for (int o = 0; o < ohw; ++o)
                y.data[(static_cast<std::size_t>(b) * out_ch_ + oc) * ohw + o] =
                    ym(oc, b * ohw + o) + bp[oc];
    return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
    const int n = in_shape_[0], h = in_shape_[2], w = in_shape_[3];
    const int ohw = out_h_ * out_w_;
    MatrixRM gm(out_ch_, n * ohw);
    for (int b = 0; b < n; ++b)
        for (int oc = 0; oc < out_ch_; ++oc)
            for (int o = 0; o < ohw; ++o)
                gm(oc, b * ohw + o) =
                    gy.data[(static_cast<std::size_t>(b) * out_ch_ + oc) * ohw +
                            o];

    weight.grad.mat2().noalias() += gm * col_.mat2().transpose();
    bias.grad.mat(1, out_ch_).noalias() += gm.rowwise().sum().transpose();

    MatrixRM dcol = weight.value.mat2().transpose() * gm;
    Tensor dx(in_shape_);
    for (int b = 0; b < n; ++b) {
        float* db = dx.ptr() + static_cast<std::size_t>(b) * in_ch_ * h * w;
        for (int c = 0; c < in_ch_; ++c)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj) {
                    const int row = (c * k_ + ki) * k_ + kj;
                    for (int oi = 0; oi < out_h_; ++oi) {
                        const int si = oi * stride_ + ki - pad_;
                        if (si < 0 || si >= h) continue;
                        for (int oj = 0; oj < out_w_; ++oj) {
                            const int sj = oj * stride_ + kj - pad_;
                            if (sj < 0 || sj >= w) continue;
                            db[(c * h + si) * w + sj] +=
                                dcol(row, b * ohw + oi * out_w_ + oj);
                        }
                    }
                }
    }
    return dx;
}

void Conv2d::collect(const std::string& p, std::vector<NamedParam>& out) {
    out.push_back({p + ".weight", &weight});
    out.push_back({p + ".bias", &bias});
}

// -------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(int channels, float momentum, float eps)
    : gamma("gamma", {channels}),
      beta("beta", {channels}),
      running_mean("running_mean", {channels}, /*train=*/false),
      running_var("running_var", {channels}, /*train=*/false),
      channels_(channels),
      momentum_(momentum),
      eps_(eps) {
    gamma.value.fill(1.0f);
    running_var.value.fill(1.0f);
}

Tensor BatchNorm::forward(const Tensor& x, bool train) {
    if (x.rank() < 2 || x.dim(1) != channels_)
        throw std::invalid_argument("batchnorm: channel mismatch for " +
                                    x.shape_str());
    const int n = x.dim(0);
    int spatial = 1;
    for (int i = 2; i < x.rank(); ++i) spatial *= x.dim(i);
    const int m = n * spatial;
    train_mode_ = train;
    in_shape_ = x.shape;

    if (train && m < 2)
        throw std::invalid_argument(
            "batchnorm: batch statistics degenerate with a single sample");

    xhat_ = Tensor(x.shape);
    inv_std_.assign(static_cast<std::size_t>(channels_), 0.0f);
    Tensor y(x.shape);

    for (int c = 0; c < channels_; ++c) {
        double mean, var;
        if (train) {
            double sum = 0, sq = 0;
            for (int b = 0; b < n; ++b) {
                const float* p = x.ptr() +
                                 (static_cast<std::size_t>(b) * channels_ + c) *
                                     spatial;
                for (int s = 0; s < spatial; ++s) {
                    sum += p[s];
                    sq += static_cast<double>(p[s]) * p[s];
                }
            }
            mean = sum / m;
            var = sq / m - mean * mean;
            if (var < 0) var = 0;
            running_mean.value.data[static_cast<std::size_t>(c)] =
                (1 - momentum_) * running_mean.value.data[c] +
                momentum_ * static_cast<float>(mean);
            running_var.value.data[static_cast<std::size_t>(c)] =
                (1 - momentum_) * running_var.value.data[c] +
                momentum_ * static_cast<float>(var);
        } else {
            mean = running_mean.value.data[static_cast<std::size_t>(c)];
            var = running_var.value.data[static_cast<std::size_t>(c)];
        }
        const float istd = 1.0f / std::sqrt(static_cast<float>(var) + eps_);
        inv_std_[static_cast<std::size_t>(c)] = istd;
        const float g = gamma.value.data[static_cast<std::size_t>(c)];
        const float bta = beta.value.data[static_cast<std::size_t>(c)];
        for (int b = 0; b < n; ++b) {
            const std::size_t off =
                (static_cast<std::size_t>(b) * channels_ + c) * spatial;
            for (int s = 0; s < spatial; ++s) {
                const float xh =
                    (x.data[off + s] - static_cast<float>(mean)) * istd;
                xhat_.data[off + s] = xh;
                y.data[off + s] = g * xh + bta;
            }
        }
    }
    return y;
}

Tensor BatchNorm::backward(const Tensor& gy) {
    const int n = in_shape_[0];
    int spatial = 1;
    for (std::size_t i = 2; i < in_shape_.size(); ++i)
        spatial *= in_shape_[i];
    const int m = n * spatial;
    Tensor dx(in_shape_);

    for (int c = 0; c < channels_; ++c) {
        double dg = 0, db = 0;
        for (int b = 0; b < n; ++b) {
            const std::size_t off =
                (static_cast<std::size_t>(b) * channels_ + c) * spatial;
            for (int s = 0; s < spatial; ++s) {
                dg += static_cast<double>(gy.data[off + s]) *
                      xhat_.data[off + s];
                db += gy.data[off + s];
            }
        }
        gamma.grad.data[static_cast<std::size_t>(c)] += static_cast<float>(dg);
        beta.grad.data[static_cast<std::size_t>(c)] += static_cast<float>(db);

        const float g = gamma.value.data[static_cast<std::size_t>(c)];
        const float istd = inv_std_[static_cast<std::size_t>(c)];
        if (train_mode_) {
            const float inv_m = 1.0f / static_cast<float>(m);
            for (int b = 0; b < n; ++b) {
                const std::size_t off =
                    (static_cast<std::size_t>(b) * channels_ + c) * spatial;
                for (int s = 0; s < spatial; ++s) {
                    const float dxhat = gy.data[off + s] * g;
                    dx.data[off + s] =
                        istd * (dxhat - inv_m * static_cast<float>(db) * g -
                                xhat_.data[off + s] * inv_m *
                                    static_cast<float>(dg) * g);
                }
            }
        } else {
            for (int b = 0; b < n; ++b) {
                const std::size_t off =
                    (static_cast<std::size_t>(b) * channels_ + c) * spatial;
                for (int s = 0; s < spatial; ++s)
                    dx.data[off + s] = gy.data[off + s] * g * istd;
            }
        }
    }
    return dx;
}

void BatchNorm::collect(const std::string& p, std::vector<NamedParam>& out) {
    out.push_back({p + ".gamma", &gamma});
    out.push_back({p + ".beta", &beta});
    out.push_back({p + ".running_mean", &running_mean});
    out.push_back({p + ".running_var", &running_var});
}

// ------------------------------------------------------------------ ReLU

Tensor ReLU::forward(const Tensor& x, bool) {
    mask_.assign(x.data.size(), 0);
    Tensor y = x;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        if (y.data[i] > 0)
            mask_[i] = 1;
        else
            y.data[i] = 0;
    }
    return y;
}

Tensor ReLU::backward(const Tensor& gy) {
    Tensor dx = gy;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
        if (!mask_[i]) dx.data[i] = 0;
    return dx;
}

// --------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, bool) {
    if (x.rank() < 3)
        throw std::invalid_argument("gap: expected rank >= 3, got " +
                                    x.shape_str());
    in_shape_ = x.shape;
    const int n = x.dim(0), c = x.dim(1);
    int spatial = 1;
    for (int i = 2; i < x.rank(); ++i) spatial *= x.dim(i);
    Tensor y({n, c});
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t off =
                (static_cast<std::size_t>(b) * c + ch) * spatial;
            double sum = 0;
            for (int s = 0; s < spatial; ++s) sum += x.data[off + s];
            y.data[static_cast<std::size_t>(b) * c + ch] =
                static_cast<float>(sum / spatial);
        }
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& gy) {
    const int n = in_shape_[0], c = in_shape_[1];
    int spatial = 1;
    for (std::size_t i = 2; i < in_shape_.size(); ++i)
        spatial *= in_shape_[i];
    Tensor dx(in_shape_);
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch) {
            const float g =
                gy.data[static_cast<std::size_t>(b) * c + ch] / spatial;
            const std::size_t off =
                (static_cast<std::size_t>(b) * c + ch) * spatial;
            for (int s = 0; s < spatial; ++s) dx.data[off + s] = g;
        }
    return dx;
}

// ------------------------------------------------------------ Sequential

Tensor Sequential::forward(const Tensor& x, bool train) {
    Tensor h = x;
    for (auto& l : layers_) h = l->forward(h, train);
    return h;
}

Tensor Sequential::backward(const Tensor& gy) {
    Tensor g = gy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
        g = (*it)->backward(g);
    return g;
}

void Sequential::collect(const std::string& p, std::vector<NamedParam>& out) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect(p + "." + std::to_string(i), out);
}

// ------------------------------------------------------------ ResBlock1d

ResBlock1d::ResBlock1d(int in_ch, int mid_ch, int out_ch, int kernel,
                       int stride, Rng& rng) {
    main_.add(std::make_unique<Conv1d>(in_ch, mid_ch, 1, 1, 0, rng));
    main_.add(std::make_unique<BatchNorm>(mid_ch));
    main_.add(std::make_unique<ReLU>());
    main_.add(std::make_unique<Conv1d>(mid_ch, mid_ch, kernel, stride,
                                       kernel / 2, rng));
    main_.add(std::make_unique<BatchNorm>(mid_ch));
    main_.add(std::make_unique<ReLU>());
    main_.add(std::make_unique<Conv1d>(mid_ch, out_ch, 1, 1, 0, rng));
    main_.add(std::make_unique<BatchNorm>(out_ch));
    if (in_ch != out_ch || stride != 1) {
        shortcut_ = std::make_unique<Sequential>();
        shortcut_->add(std::make_unique<Conv1d>(in_ch, out_ch, 1, stride, 0, rng));
        shortcut_->add(std::make_unique<BatchNorm>(out_ch));
    }
}

Tensor ResBlock1d::forward(const Tensor& x, bool train) {
    x_ = x;
    Tensor h = main_.forward(x, train);
    Tensor sc = shortcut_ ? shortcut_->forward(x, train) : x;
    if (!h.same_shape(sc))
        throw std::runtime_error("resblock1d: skip shape mismatch " +
                                 h.shape_str() + " vs " + sc.shape_str());
    for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] += sc.data[i];
    return out_relu_.forward(h, train);
}

Tensor ResBlock1d::backward(const Tensor& gy) {
    Tensor g = out_relu_.backward(gy);
    Tensor dx = main_.backward(g);
    Tensor dsc = shortcut_ ? shortcut_->backward(g) : g;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dsc.data[i];
    return dx;
}

void ResBlock1d::collect(const std::string& p, std::vector<NamedParam>& out) {
    main_.collect(p + ".main", out);
    if (shortcut_) shortcut_->collect(p + ".shortcut", out);
}

// ------------------------------------------------------------ ResBlock2d

ResBlock2d::ResBlock2d(int in_ch, int out_ch, int stride, Rng& rng) {
    main_.add(std::make_unique<Conv2d>(in_ch, out_ch, 3, stride, 1, rng));
    main_.add(std::make_unique<BatchNorm>(out_ch));
    main_.add(std::make_unique<ReLU>());
    main_.add(std::make_unique<Conv2d>(out_ch, out_ch, 3, 1, 1, rng));
    main_.add(std::make_unique<BatchNorm>(out_ch));
    if (in_ch != out_ch || stride != 1) {
        shortcut_ = std::make_unique<Sequential>();
        shortcut_->add(std::make_unique<Conv2d>(in_ch, out_ch, 1, stride, 0, rng));
        shortcut_->add(std::make_unique<BatchNorm>(out_ch));
    }
}

Tensor ResBlock2d::forward(const Tensor& x, bool train) {
    x_ = x;
    Tensor h = main_.forward(x, train);
    Tensor sc = shortcut_ ? shortcut_->forward(x, train) : x;
    if (!h.same_shape(sc))
        throw std::runtime_error("resblock2d: skip shape mismatch");
    for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] += sc.data[i];
    return out_relu_.forward(h, train);
}

Tensor ResBlock2d::backward(const Tensor& gy) {
    Tensor g = out_relu_.backward(gy);
    Tensor dx = main_.backward(g);
    Tensor dsc = shortcut_ ? shortcut_->backward(g) : g;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dsc.data[i];
    return dx;
}

void ResBlock2d::collect(const std::string& p, std::vector<NamedParam>& out) {
    main_.collect(p + ".main", out);
    if (shortcut_) shortcut_->collect(p + ".shortcut", out);
}

// --------------------------------------------------------------- helpers

std::vector<NamedParam> named_params(Layer& layer, const std::string& prefix) {
    std::vector<NamedParam> out;
    layer.collect(prefix.empty() ? "net" : prefix, out);
    return out;
}

std::vector<Param*> trainable_params(Layer& layer) {
    std::vector<Param*> out;
    for (auto& np : named_params(layer))
        if (np.param->trainable) out.push_back(np.param);
    return out;
}

std::int64_t parameter_count(Layer& layer) {
    std::int64_t n = 0;
    for (auto* p : trainable_params(layer)) n += p->value.size();
    return n;
}

void zero_grads(const std::vector<Param*>& params) {
    for (auto* p : params) p->grad.fill(0.0f);
}

}  // namespace sleepssl::nn
