#include "sleepssl/encoders/encoders.hpp"

#include <cmath>

namespace sleepssl {

using nn::BatchNorm;
using nn::Conv1d;
using nn::Conv2d;
using nn::GlobalAvgPool;
using nn::Linear;
using nn::ReLU;
using nn::ResBlock1d;
using nn::ResBlock2d;
using nn::Sequential;

EncoderConfig EncoderConfig::time_encoder(SizePreset preset) {
    EncoderConfig c;
    c.kind = EncoderKind::TIME;
    c.preset = preset;
    if (preset == SizePreset::DESK) {
        c.first_kernel = 31;
        c.body_kernel = 9;
    }
    return c;
}

EncoderConfig EncoderConfig::spectrogram_encoder(SizePreset preset) {
    EncoderConfig c;
    c.kind = EncoderKind::SPECTROGRAM;
    c.preset = preset;
    c.first_kernel = 3;
    c.body_kernel = 3;
    return c;
}

void EncoderConfig::validate() const {
    if (feature_dim <= 0)
        throw std::invalid_argument("encoder: feature_dim must be > 0");
    if (first_kernel % 2 == 0 || body_kernel % 2 == 0)
        throw std::invalid_argument("encoder: kernels must be odd");
    if (!(width_multiplier > 0))
        throw std::invalid_argument("encoder: width_multiplier must be > 0");
}

Tensor Encoder::forward(const Tensor& x, bool train) {
    Tensor in = x;
    if (cfg_.kind == EncoderKind::TIME) {
        if (in.rank() == 2)
            in.shape = {in.dim(0), 1, in.dim(1)};
        if (in.rank() != 3 || in.dim(1) != 1)
            throw std::invalid_argument("time encoder: expected [N,L], got " +
                                        x.shape_str());
        if (in.dim(2) < cfg_.first_kernel)
            throw std::invalid_argument(
                "time encoder: input shorter than first kernel");
    } else {
        if (in.rank() == 3)
            in.shape = {in.dim(0), 1, in.dim(1), in.dim(2)};
        if (in.rank() != 4 || in.dim(1) != 1)
            throw std::invalid_argument(
                "spectrogram encoder: expected [N,frames,bins], got " +
                x.shape_str());
    }
    return net_.forward(in, train);
}

Tensor Encoder::backward(const Tensor& grad_features) {
    return net_.backward(grad_features);
}

std::unique_ptr<Encoder> build_time_encoder(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    if (cfg.kind != EncoderKind::TIME)
        throw std::invalid_argument("build_time_encoder: wrong encoder kind");
    Sequential net;

    if (cfg.preset == SizePreset::PAPER) {
        // Bottleneck stages [3,4,6,3]; the base width is tuned so the total
        // trainable parameter count sits near 0.6M at width_multiplier 1.
        const int m = std::max(1, static_cast<int>(std::lround(
                                      8.0f * cfg.width_multiplier)));
        const int stem_out = 2 * m;
        net.add(std::make_unique<Conv1d>(1, stem_out, cfg.first_kernel, 2,
                                         cfg.first_kernel / 2, rng));
        net.add(std::make_unique<BatchNorm>(stem_out));
        net.add(std::make_unique<ReLU>());
        const int blocks[4] = {3, 4, 6, 3};
        int in_ch = stem_out;
        for (int s = 0; s < 4; ++s) {
            const int mid = m << s;
            const int out = 2 * mid;
            for (int b = 0; b < blocks[s]; ++b) {
                const int stride = (b == 0) ? 2 : 1;
                net.add(std::make_unique<ResBlock1d>(in_ch, mid, out,
                                                     cfg.body_kernel, stride,
                                                     rng));
                in_ch = out;
            }
        }
        net.add(std::make_unique<GlobalAvgPool>());
        net.add(std::make_unique<Linear>(in_ch, cfg.feature_dim, rng));
    } else {
        const int m = std::max(
            1, static_cast<int>(std::lround(8.0f * cfg.width_multiplier)));
        net.add(std::make_unique<Conv1d>(1, m, cfg.first_kernel, 6,
                                         cfg.first_kernel / 2, rng));
        net.add(std::make_unique<BatchNorm>(m));
        net.add(std::make_unique<ReLU>());
        net.add(std::make_unique<ResBlock1d>(m, m, 2 * m, cfg.body_kernel, 4,
                                             rng));
        net.add(std::make_unique<ResBlock1d>(2 * m, 2 * m, 4 * m,
                                             cfg.body_kernel, 4, rng));
        net.add(std::make_unique<GlobalAvgPool>());
        net.add(std::make_unique<Linear>(4 * m, cfg.feature_dim, rng));
    }
    return std::make_unique<Encoder>(cfg, std::move(net));
}

std::unique_ptr<Encoder> build_spectrogram_encoder(const EncoderConfig& cfg,
                                                   Rng& rng) {
    cfg.validate();
    if (cfg.kind != EncoderKind::SPECTROGRAM)
        throw std::invalid_argument(
            "build_spectrogram_encoder: wrong encoder kind");
    Sequential net;
    if (cfg.preset == SizePreset::PAPER) {
        net.add(std::make_unique<Conv2d>(1, 16, 3, 2, 1, rng));
        net.add(std::make_unique<BatchNorm>(16));
        net.add(std::make_unique<ReLU>());
        net.add(std::make_unique<ResBlock2d>(16, 32, 2, rng));
        net.add(std::make_unique<ResBlock2d>(32, 64, 2, rng));
        net.add(std::make_unique<ResBlock2d>(64, 128, 2, rng));
        net.add(std::make_unique<GlobalAvgPool>());
        net.add(std::make_unique<Linear>(128, cfg.feature_dim, rng));
    } else {
        net.add(std::make_unique<Conv2d>(1, 8, 3, 2, 1, rng));
        net.add(std::make_unique<BatchNorm>(8));
        net.add(std::make_unique<ReLU>());
        net.add(std::make_unique<ResBlock2d>(8, 8, 2, rng));
        net.add(std::make_unique<ResBlock2d>(8, 16, 2, rng));
        net.add(std::make_unique<GlobalAvgPool>());
        net.add(std::make_unique<Linear>(16, cfg.feature_dim, rng));
    }
    return std::make_unique<Encoder>(cfg, std::move(net));
}

std::unique_ptr<Sequential> build_projection_head(
    const ProjectionHeadConfig& cfg, Rng& rng) {
    if (cfg.in_dim <= 0 || cfg.hidden_dim <= 0 || cfg.out_dim <= 0)
        throw std::invalid_argument("projection head: dims must be positive");
    auto head = std::make_unique<Sequential>();
    head->add(std::make_unique<Linear>(cfg.in_dim, cfg.hidden_dim, rng));
    head->add(std::make_unique<BatchNorm>(cfg.hidden_dim));
    head->add(std::make_unique<ReLU>());
    head->add(std::make_unique<Linear>(cfg.hidden_dim, cfg.out_dim, rng));
    return head;
}

Tensor concat_features(const Tensor& t, const Tensor& s) {
    if (t.rank() != 2 || s.rank() != 2 || t.dim(0) != s.dim(0))
        throw std::invalid_argument("concat_features: incompatible shapes");
    const int n = t.dim(0), a = t.dim(1), b = s.dim(1);
    Tensor out({n, a + b});
    for (int i = 0; i < n; ++i) {
        std::copy_n(t.ptr() + static_cast<std::size_t>(i) * a, a,
                    out.ptr() + static_cast<std::size_t>(i) * (a + b));
        std::copy_n(s.ptr() + static_cast<std::size_t>(i) * b, b,
                    out.ptr() + static_cast<std::size_t>(i) * (a + b) + a);
    }
    return out;
}

std::pair<Tensor, Tensor> split_feature_grad(const Tensor& g, int left_dim) {
    const int n = g.dim(0), total = g.dim(1);
    const int right = total - left_dim;
    Tensor gl({n, left_dim}), gr({n, right});
    for (int i = 0; i < n; ++i) {
        std::copy_n(g.ptr() + static_cast<std::size_t>(i) * total, left_dim,
                    gl.ptr() + static_cast<std::size_t>(i) * left_dim);
        std::copy_n(g.ptr() + static_cast<std::size_t>(i) * total + left_dim,
                    right, gr.ptr() + static_cast<std::size_t>(i) * right);
    }
    return {std::move(gl), std::move(gr)};
}

Tensor make_time_batch(std::span<const EegEpoch> epochs) {
    if (epochs.empty())
        throw std::invalid_argument("make_time_batch: empty batch");
    const int n = static_cast<int>(epochs.size());
    const int len = static_cast<int>(epochs[0].length());
    Tensor out({n, len});
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(epochs[static_cast<std::size_t>(i)].length()) != len)
            throw std::invalid_argument("make_time_batch: ragged lengths");
        std::copy_n(epochs[static_cast<std::size_t>(i)].samples.data(), len,
                    out.ptr() + static_cast<std::size_t>(i) * len);
    }
    return out;
}

Tensor make_spec_batch(std::span<const Spectrogram> specs) {
    if (specs.empty())
        throw std::invalid_argument("make_spec_batch: empty batch");
    const int n = static_cast<int>(specs.size());
    const int f = specs[0].frames, b = specs[0].bins;
    Tensor out({n, f, b});
    for (int i = 0; i < n; ++i) {
        const auto& s = specs[static_cast<std::size_t>(i)];
        if (s.frames != f || s.bins != b)
            throw std::invalid_argument("make_spec_batch: ragged shapes");
        std::copy_n(s.magnitudes.data(), static_cast<std::size_t>(f) * b,
                    out.ptr() + static_cast<std::size_t>(i) * f * b);
    }
    return out;
}

}  // namespace sleepssl
