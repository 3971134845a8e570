#pragma once

#include <vector>

#include "sleepssl/nn/layers.hpp"

namespace sleepssl::nn {

// Adam with L2 weight decay folded into the gradient.
class Adam {
  public:
    Adam(std::vector<Param*> params, float lr, float beta1 = 0.9f,
         float beta2 = 0.99f, float weight_decay = 0.0f, float eps = 1e-8f);

    void step();
    float lr() const { return lr_; }
    void set_lr(float lr) { lr_ = lr; }
    const std::vector<Param*>& params() const { return params_; }

  private:
    std::vector<Param*> params_;
    std::vector<std::vector<float>> m_, v_;
    float lr_, beta1_, beta2_, weight_decay_, eps_;
    long t_ = 0;
};

// Reduce-on-plateau: after `patience` consecutive epochs without improvement
// the learning rate is multiplied by `factor` (so the drop happens on the
// patience+1-th bad epoch) and the counter resets.
class PlateauScheduler {
  public:
    PlateauScheduler(Adam& opt, float factor, int patience, float min_lr = 1e-7f)
        : opt_(opt), factor_(factor), patience_(patience), min_lr_(min_lr) {}

    // Returns true when the lr was reduced this epoch.
    bool observe(double metric);

  private:
    Adam& opt_;
    float factor_;
    int patience_;
    float min_lr_;
    double best_ = 1e300;
    int bad_epochs_ = 0;
};

}  // namespace sleepssl::nn
