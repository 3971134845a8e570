#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sleepssl/datasets/types.hpp"
#include "sleepssl/encoders/encoders.hpp"
#include "sleepssl/nn/optim.hpp"
#include "sleepssl/objectives/losses.hpp"
#include "sleepssl/signal/augment.hpp"

namespace sleepssl {

enum class StrategyKind {
    SINGLE_TIME,
    SINGLE_SPEC,
    CMC,
    SIMPLE_FUSION,
    MULEEG,
    SUPERVISED,
    RANDOM_INIT,
};

const char* strategy_name(StrategyKind s);
// Accepts the lowercase CLI spellings; throws listing the valid names.
StrategyKind parse_strategy(const std::string& name);

struct PretrainConfig {
    StrategyKind strategy = StrategyKind::MULEEG;
    bool use_diverse = true;
    bool use_fusion = true;

    float lr = 3e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.99f;
    float weight_decay = 3e-5f;
    int epochs = 140;
    int batch_size = 256;
    float scheduler_factor = 0.2f;
    int scheduler_patience = 5;
    double tau = 1.0;
    double tau_d = 10.0;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    std::uint64_t seed = 0;
    SizePreset preset = SizePreset::PAPER;
    AugmentationConfig aug;

    // Full-scale defaults: 140 epochs at batch 256 for the self-supervised
    // strategies, 300 epochs with patience 10 when training supervised.
    static PretrainConfig paper(StrategyKind s = StrategyKind::MULEEG);
    // CI-scale: small encoders, short runs.
    static PretrainConfig desk(StrategyKind s = StrategyKind::MULEEG);

    void validate() const;
};

// Every network a strategy can own. Encoders are shared between the two
// augmented branches by construction; unused members stay null.
struct Models {
    std::unique_ptr<Encoder> e_t, e_s;
    std::unique_ptr<nn::Sequential> f1, f2;  // first head pair
    std::unique_ptr<nn::Sequential> g1, g2;  // spectrogram heads (mulEEG)
    std::unique_ptr<nn::Sequential> h1, h2;  // fusion heads (mulEEG)
    std::unique_ptr<nn::Linear> classifier;  // supervised only

    std::vector<nn::Param*> trainable();
    std::vector<nn::NamedParam> named();
};

Models build_models(const PretrainConfig& cfg);

// One optimizer step's worth of gradients for the strategy: augments the
// batch, runs both branches through the shared encoders, applies the
// strategy's contrastive objective and accumulates parameter gradients.
// Callers zero grads before and step the optimizer after.
LossBundle training_step(std::span<const EegEpoch> batch, Models& models,
                         const PretrainConfig& cfg, Rng& aug_rng);

struct Checkpoint {
    PretrainConfig cfg;
    std::string dir;  // holds best.bin, last.bin, loss.csv, config.json
    std::vector<double> loss_history;
};

// Self-supervised pretraining over the pretext subjects' epochs. Labels are
// never read; shuffled mini-batches, Adam, plateau scheduler on the epoch
// training loss, best + last weights written under out_dir. RANDOM_INIT just
// writes the seeded initialization. NaN loss aborts with diagnostics.
Checkpoint pretrain(const std::vector<SubjectRecord>& pretext,
                    const PretrainConfig& cfg, const std::string& out_dir);

// Supervised baseline: time encoder + linear classifier under cross entropy.
Checkpoint supervised_train(const std::vector<SubjectRecord>& train,
                            const PretrainConfig& cfg,
                            const std::string& out_dir);

// Rebuilds the strategy's networks from the stored config and loads weights
// ("best" or "last").
Models load_checkpoint_models(const Checkpoint& ckpt,
                              const std::string& which = "best");
// Reads config.json + loss.csv back from a checkpoint directory.
Checkpoint open_checkpoint(const std::string& dir);

// Softmax cross entropy over logits [N x 5]; writes dL/dlogits when asked.
double cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                     Tensor* grad);

}  // namespace sleepssl
