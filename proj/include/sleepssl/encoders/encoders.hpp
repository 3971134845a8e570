#pragma once

#include <memory>
#include <span>

#include "sleepssl/nn/layers.hpp"
#include "sleepssl/signal/types.hpp"

namespace sleepssl {

enum class EncoderKind { TIME, SPECTROGRAM };
enum class SizePreset { PAPER, DESK };

struct EncoderConfig {
    EncoderKind kind = EncoderKind::TIME;
    float width_multiplier = 1.0f;
    int first_kernel = 71;
    int body_kernel = 25;
    int feature_dim = 256;
    SizePreset preset = SizePreset::PAPER;

    static EncoderConfig time_encoder(SizePreset preset);
    static EncoderConfig spectrogram_encoder(SizePreset preset);

    void validate() const;
};

struct ProjectionHeadConfig {
    int in_dim = 256;
    int hidden_dim = 256;  // matches in_dim by default
    int out_dim = 128;
};

// A network plus the input-shape convention for its kind: TIME encoders take
// [N,L] (or [N,1,L]), SPECTROGRAM encoders take [N,frames,bins] (or
// [N,1,frames,bins]); both produce [N, feature_dim].
class Encoder {
  public:
    Encoder(EncoderConfig cfg, nn::Sequential net)
        : cfg_(cfg), net_(std::move(net)) {}

    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& grad_features);

    nn::Sequential& net() { return net_; }
    const EncoderConfig& config() const { return cfg_; }
    std::int64_t parameter_count() { return nn::parameter_count(net_); }

  private:
    EncoderConfig cfg_;
    nn::Sequential net_;
};

// Residual 1-D conv stack ending in global average pooling; PAPER preset
// lands in [0.5M, 0.7M] parameters, DESK stays under 0.1M.
std::unique_ptr<Encoder> build_time_encoder(const EncoderConfig& cfg, Rng& rng);

// Stacked 2-D conv blocks over the [frames x bins] magnitudes.
std::unique_ptr<Encoder> build_spectrogram_encoder(const EncoderConfig& cfg,
                                                   Rng& rng);

// Linear > BatchNorm > ReLU > Linear.
std::unique_ptr<nn::Sequential> build_projection_head(
    const ProjectionHeadConfig& cfg, Rng& rng);

// [N x a] ++ [N x b] -> [N x a+b], time features first.
Tensor concat_features(const Tensor& t, const Tensor& s);
// Splits a gradient over a concatenation back into the two halves.
std::pair<Tensor, Tensor> split_feature_grad(const Tensor& g, int left_dim);

// Batch builders: epochs -> [N, L]; spectrograms -> [N, frames, bins].
Tensor make_time_batch(std::span<const EegEpoch> epochs);
Tensor make_spec_batch(std::span<const Spectrogram> specs);

}  // namespace sleepssl
