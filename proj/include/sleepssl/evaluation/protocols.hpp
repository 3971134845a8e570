#pragma once

#include <string>
#include <vector>

#include "sleepssl/evaluation/metrics.hpp"
#include "sleepssl/pretraining/pretrain.hpp"

namespace sleepssl {

enum class Protocol { LINEAR, FINETUNE, SEMI, KFOLD, TRANSFER };

const char* protocol_name(Protocol p);
Protocol parse_protocol(const std::string& name);

// Settings for fitting the downstream probe (optimizer family matches the
// supervised recipe, desk-scale epoch counts by default).
struct EvalConfig {
    float lr = 3e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.99f;
    float weight_decay = 3e-5f;
    int epochs = 40;
    int batch_size = 128;
    float scheduler_factor = 0.2f;
    int scheduler_patience = 10;
    std::uint64_t seed = 0;
    int folds = 5;
    int n_seeds = 3;
    std::vector<double> fractions = {0.01, 0.05, 0.10, 0.25, 0.50, 1.00};

    void validate() const;
};

struct EvalReport {
    Protocol protocol = Protocol::LINEAR;
    MetricSet mean;
    MetricSet stddev;  // all-zero when folds == 1
    int folds = 1;
    double fraction = 1.0;  // semi-supervised subsampling fraction
    std::string checkpoint;

    std::string to_json() const;
    static EvalReport from_json(const std::string& text);
};

// Trains only an affine 256 -> 5 classifier on frozen time-encoder features
// and scores the test group. Asserts subject disjointness and that the
// encoder weights stay bit-identical.
EvalReport linear_evaluate(const Checkpoint& ckpt,
                           const std::vector<SubjectRecord>& train,
                           const std::vector<SubjectRecord>& test,
                           const EvalConfig& cfg);

// Trains the time encoder together with the classifier.
EvalReport fine_tune(const Checkpoint& ckpt,
                     const std::vector<SubjectRecord>& train,
                     const std::vector<SubjectRecord>& test,
                     const EvalConfig& cfg);

// Fine-tunes on class-stratified epoch subsamples of the train group, one
// report per fraction aggregated over n_seeds. Fractions yielding fewer than
// 5 epochs are skipped with a warning on stderr; fraction 1.0 bypasses
// subsampling entirely.
std::vector<EvalReport> semi_supervised_curve(
    const Checkpoint& ckpt, const std::vector<double>& fractions,
    const std::vector<SubjectRecord>& train,
    const std::vector<SubjectRecord>& test, const EvalConfig& cfg);

// Deterministic subject-level k-fold linear evaluation over a pooled group;
// reports mean and per-fold standard deviation.
EvalReport kfold_evaluate(const Checkpoint& ckpt,
                          const std::vector<SubjectRecord>& pool,
                          const EvalConfig& cfg);

// Grids swept one axis at a time while the other two stay at the base
// config's values; each point pretrains (desk scale) and linear-evaluates.
struct SweepSpec {
    std::vector<double> tau_d = {0.1, 1.0, 5.0, 10.0};
    std::vector<double> lambda1 = {0.1, 0.5, 1.0, 2.0};
    std::vector<double> lambda2 = {0.1, 0.5, 1.0, 2.0};
};

// Writes "param,value,accuracy,kappa,macro_f1" rows; returns the CSV path.
std::string sensitivity_sweep(const SweepSpec& spec,
                              const PretrainConfig& base,
                              const std::vector<SubjectRecord>& pretext,
                              const std::vector<SubjectRecord>& train,
                              const std::vector<SubjectRecord>& test,
                              const EvalConfig& cfg,
                              const std::string& out_dir);

// Frozen time-encoder features for up to n_per_class labeled epochs per
// class, written as 256 feature columns + a label column. Classes with fewer
// epochs contribute all of them (with a warning).
std::string export_embeddings(const Checkpoint& ckpt,
                              const std::vector<SubjectRecord>& labeled,
                              int n_per_class, std::uint64_t seed,
                              const std::string& out_csv);

// Frozen eval-mode features for a set of epochs, chunked through the encoder.
Tensor encode_features(Encoder& enc, const std::vector<EegEpoch>& epochs,
                       int chunk = 256);

}  // namespace sleepssl
