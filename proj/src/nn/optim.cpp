#include "sleepssl/nn/optim.hpp"

#include <cmath>

namespace sleepssl::nn {

Adam::Adam(std::vector<Param*> params, float lr, float beta1, float beta2,
           float weight_decay, float eps)
    : params_(std::move(params)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      weight_decay_(weight_decay),
      eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto* p : params_) {
        m_.emplace_back(p->value.data.size(), 0.0f);
        v_.emplace_back(p->value.data.size(), 0.0f);
    }
}

void Adam::step() {
    ++t_;
    const float bc1 = 1.0f - std::pow(beta1_, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(beta2_, static_cast<float>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Param* p = params_[i];
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < p->value.data.size(); ++j) {
            float g = p->grad.data[j] + weight_decay_ * p->value.data[j];
            m[j] = beta1_ * m[j] + (1 - beta1_) * g;
            v[j] = beta2_ * v[j] + (1 - beta2_) * g * g;
            const float mhat = m[j] / bc1;
            const float vhat = v[j] / bc2;
            p->value.data[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

bool PlateauScheduler::observe(double metric) {
    if (metric < best_) {
        best_ = metric;
        bad_epochs_ = 0;
        return false;
    }
    ++bad_epochs_;
    if (bad_epochs_ > patience_) {
        const float next = std::max(min_lr_, opt_.lr() * factor_);
        const bool reduced = next < opt_.lr();
        opt_.set_lr(next);
        bad_epochs_ = 0;
        return reduced;
    }
    return false;
}

}  // namespace sleepssl::nn
