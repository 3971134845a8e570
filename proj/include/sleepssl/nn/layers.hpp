#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sleepssl/rng.hpp"
#include "sleepssl/tensor.hpp"

namespace sleepssl::nn {

struct Param {
    Tensor value;
    Tensor grad;
    std::string local_name;
    bool trainable = true;

    Param() = default;
    Param(std::string n, std::vector<int> shape, bool train = true)
        : value(shape), grad(std::move(shape)), local_name(std::move(n)),
          trainable(train) {}
};

struct NamedParam {
    std::string name;
    Param* param;
};

// Explicit forward/backward layer. Each layer caches what its backward needs
// during forward; a layer instance is forwarded at most once per step.
// Parameter gradients accumulate, callers zero them between steps.
class Layer {
  public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool train) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual void collect(const std::string& prefix,
                         std::vector<NamedParam>& out) {}
};

class Linear : public Layer {
  public:
    Linear(int in_dim, int out_dim, Rng& rng);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix,
                 std::vector<NamedParam>& out) override;

    Param weight;  // [out x in]
    Param bias;    // [out]

  private:
    int in_dim_, out_dim_;
    Tensor x_;
};

class Conv1d : public Layer {
  public:
    Conv1d(int in_ch, int out_ch, int kernel, int stride, int pad, Rng& rng);
    Tensor forward(const Tensor& x, bool train) override;  // [N,C,L]
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix,
                 std::vector<NamedParam>& out) override;

    Param weight;  // [out_ch x in_ch*k]
    Param bias;    // [out_ch]

  private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    Tensor col_;  // [in_ch*k x N*outL]
    std::vector<int> in_shape_;
    int out_len_ = 0;
};

class Conv2d : public Layer {
  public:
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, Rng& rng);
    Tensor forward(const Tensor& x, bool train) override;  // [N,C,H,W]
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix,
                 std::vector<NamedParam>& out) override;

    Param weight;  // [out_ch x in_ch*k*k]
    Param bias;

  private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    Tensor col_;
    std::vector<int> in_shape_;
    int out_h_ = 0, out_w_ = 0;
};

// Normalizes per channel over every other axis. Accepts [N,C], [N,C,L] and
// [N,C,H,W]. Training mode with a single statistics sample throws.
class BatchNorm : public Layer {
  public:
    explicit BatchNorm(int channels, float momentum = 0.1f, float eps = 1e-5f);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix,
                 std::vector<NamedParam>& out) override;

    Param gamma, beta;
    Param running_mean, running_var;  // buffers, not optimized

  private:
    int channels_;
    float momentum_, eps_;
    bool train_mode_ = false;
    Tensor xhat_;
    std::vector<float> inv_std_;
    std::vector<int> in_shape_;
};

class ReLU : public Layer {
  public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;

  private:
    std::vector<char> mask_;
};

// [N,C,L] or [N,C,H,W] -> [N,C]
class GlobalAvgPool : public Layer {
  public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;

  private:
    std::vector<int> in_shape_;
};

class Sequential : public Layer {
  public:
    Sequential() = default;
    void add(std::unique_ptr<Layer> l) { layers_.push_back(std::move(l)); }
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix,
                 std::vector<NamedParam>& out) override;
    std::size_t size() const { return layers_.size(); }

  private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// 1-D bottleneck residual block: 1x1 reduce -> BN/ReLU -> kxk -> BN/ReLU ->
// 1x1 expand -> BN, plus projection shortcut when shape changes.
class ResBlock1d : public Layer {
  public:
    ResBlock1d(int in_ch, int mid_ch, int out_ch, int kernel, int stride,
               Rng& rng);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix,
                 std::vector<NamedParam>& out) override;

  private:
    Sequential main_;
    std::unique_ptr<Sequential> shortcut_;  // null for identity
    ReLU out_relu_;
    Tensor x_;
};

// 2-D basic residual block: 3x3 -> BN/ReLU -> 3x3 -> BN, projection shortcut
// when shape changes.
class ResBlock2d : public Layer {
  public:
    ResBlock2d(int in_ch, int out_ch, int stride, Rng& rng);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    void collect(const std::string& prefix,
                 std::vector<NamedParam>& out) override;

  private:
    Sequential main_;
    std::unique_ptr<Sequential> shortcut_;
    ReLU out_relu_;
    Tensor x_;
};

std::vector<NamedParam> named_params(Layer& layer,
                                     const std::string& prefix = "");
std::vector<Param*> trainable_params(Layer& layer);
std::int64_t parameter_count(Layer& layer);
void zero_grads(const std::vector<Param*>& params);

}  // namespace sleepssl::nn
