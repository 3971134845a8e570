#include "sleepssl/evaluation/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "json.hpp"
#include "sleepssl/datasets/split.hpp"
#include "sleepssl/encoders/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sleepssl {

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::LINEAR: return "linear";
        case Protocol::FINETUNE: return "finetune";
        case Protocol::SEMI: return "semi";
        case Protocol::KFOLD: return "kfold";
        case Protocol::TRANSFER: return "transfer";
    }
    return "?";
}

Protocol parse_protocol(const std::string& name) {
    for (auto p : {Protocol::LINEAR, Protocol::FINETUNE, Protocol::SEMI,
                   Protocol::KFOLD, Protocol::TRANSFER})
        if (name == protocol_name(p)) return p;
    throw std::invalid_argument(
        "unknown protocol '" + name +
        "'; valid: linear finetune semi kfold transfer");
}

void EvalConfig::validate() const {
    if (!(lr > 0)) throw std::invalid_argument("eval lr must be > 0");
    if (epochs <= 0) throw std::invalid_argument("eval epochs must be > 0");
    if (batch_size < 2)
        throw std::invalid_argument("eval batch_size must be >= 2");
    if (folds < 2) throw std::invalid_argument("folds must be >= 2");
    if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
    for (double f : fractions)
        if (!(f > 0.0 && f <= 1.0))
            throw std::invalid_argument("fractions must be in (0,1]");
}

namespace {

std::vector<std::string> ids_of(const std::vector<SubjectRecord>& recs) {
    std::vector<std::string> ids;
    for (const auto& r : recs) ids.push_back(r.subject_id);
    return ids;
}

void gather_labeled(const std::vector<SubjectRecord>& recs,
                    std::vector<EegEpoch>& epochs, std::vector<int>& labels) {
    for (const auto& r : recs)
        for (const auto& e : r.epochs)
            if (e.has_label()) {
                epochs.push_back(e);
                labels.push_back(static_cast<int>(e.label()));
            }
    if (epochs.empty())
        throw std::invalid_argument("no labeled epochs in group");
}

std::vector<int> argmax_rows(const Tensor& logits) {
    std::vector<int> out;
    const int k = logits.dim(1);
    for (int r = 0; r < logits.dim(0); ++r) {
        int best = 0;
        for (int c = 1; c < k; ++c)
            if (logits.data[static_cast<std::size_t>(r) * k + c] >
                logits.data[static_cast<std::size_t>(r) * k + best])
                best = c;
        out.push_back(best);
    }
    return out;
}

Tensor rows_at(const Tensor& t, const std::vector<std::size_t>& idx) {
    const int d = t.dim(1);
    Tensor out({static_cast<int>(idx.size()), d});
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy_n(t.data.begin() +
                        static_cast<std::ptrdiff_t>(idx[r]) * d,
                    d, out.data.begin() + static_cast<std::ptrdiff_t>(r) * d);
    return out;
}

// Affine probe on fixed features, cross entropy + Adam + plateau scheduler.
std::unique_ptr<nn::Linear> train_probe(const Tensor& features,
                                        const std::vector<int>& labels,
                                        const EvalConfig& cfg) {
    Rng init = make_rng(cfg.seed, "probe-init");
    auto clf = std::make_unique<nn::Linear>(features.dim(1), kNumStages, init);
    auto params = nn::trainable_params(*clf);
    nn::Adam opt(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.weight_decay);
    nn::PlateauScheduler sched(opt, cfg.scheduler_factor,
                               cfg.scheduler_patience);

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuf = make_rng(cfg.seed, "probe-order",
                            static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuf);
        double sum = 0;
        std::int64_t seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bsz =
                std::min<std::size_t>(cfg.batch_size, order.size() - start);
            std::vector<std::size_t> idx(order.begin() +
                                             static_cast<std::ptrdiff_t>(start),
                                         order.begin() +
                                             static_cast<std::ptrdiff_t>(
                                                 start + bsz));
            std::vector<int> y;
            for (auto i : idx) y.push_back(labels[i]);
            nn::zero_grads(params);
            Tensor logits = clf->forward(rows_at(features, idx), true);
            Tensor g;
            sum += static_cast<double>(bsz) * cross_entropy(logits, y, &g);
            clf->backward(g);
            opt.step();
            seen += static_cast<std::int64_t>(bsz);
        }
        sched.observe(sum / static_cast<double>(seen));
    }
    return clf;
}

MetricSet mean_of(const std::vector<MetricSet>& ms) {
    MetricSet out;
    const double n = static_cast<double>(ms.size());
    for (const auto& m : ms) {
        out.accuracy += m.accuracy / n;
        out.kappa += m.kappa / n;
        out.macro_f1 += m.macro_f1 / n;
        for (int k = 0; k < kNumStages; ++k) {
            out.per_class_f1[static_cast<std::size_t>(k)] +=
                m.per_class_f1[static_cast<std::size_t>(k)] / n;
            for (int j = 0; j < kNumStages; ++j)
                out.confusion[static_cast<std::size_t>(k)]
                             [static_cast<std::size_t>(j)] +=
                    m.confusion[static_cast<std::size_t>(k)]
                               [static_cast<std::size_t>(j)];
        }
    }
    return out;
}

MetricSet std_of(const std::vector<MetricSet>& ms, const MetricSet& mean) {
    MetricSet out;
    if (ms.size() < 2) return out;
    const double n = static_cast<double>(ms.size()) - 1.0;
    for (const auto& m : ms) {
        out.accuracy += (m.accuracy - mean.accuracy) *
                        (m.accuracy - mean.accuracy) / n;
        out.kappa += (m.kappa - mean.kappa) * (m.kappa - mean.kappa) / n;
        out.macro_f1 +=
            (m.macro_f1 - mean.macro_f1) * (m.macro_f1 - mean.macro_f1) / n;
        for (int k = 0; k < kNumStages; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const double d = m.per_class_f1[uk] - mean.per_class_f1[uk];
            out.per_class_f1[uk] += d * d / n;
        }
    }
    out.accuracy = std::sqrt(out.accuracy);
    out.kappa = std::sqrt(out.kappa);
    out.macro_f1 = std::sqrt(out.macro_f1);
    for (auto& v : out.per_class_f1) v = std::sqrt(v);
    return out;
}

json metrics_to_json(const MetricSet& m) {
    json j;
    j["accuracy"] = m.accuracy;
    j["kappa"] = m.kappa;
    j["macro_f1"] = m.macro_f1;
    j["per_class_f1"] = m.per_class_f1;
    json conf = json::array();
    for (const auto& row : m.confusion) conf.push_back(row);
    j["confusion"] = conf;
    return j;
}

MetricSet metrics_from_json(const json& j) {
    MetricSet m;
    m.accuracy = j.at("accuracy").get<double>();
    m.kappa = j.at("kappa").get<double>();
    m.macro_f1 = j.at("macro_f1").get<double>();
    m.per_class_f1 = j.at("per_class_f1").get<std::array<double, kNumStages>>();
    const auto& conf = j.at("confusion");
    for (int r = 0; r < kNumStages; ++r)
        for (int c = 0; c < kNumStages; ++c)
            m.confusion[static_cast<std::size_t>(r)]
                       [static_cast<std::size_t>(c)] =
                conf.at(static_cast<std::size_t>(r))
                    .at(static_cast<std::size_t>(c))
                    .get<std::int64_t>();
    return m;
}

std::uint64_t encoder_digest(Models& m) {
    auto named = nn::named_params(m.e_t->net(), "e_t");
    return weights_digest(named);
}

// Joint encoder+classifier training used by fine_tune and the
// semi-supervised curve.
MetricSet fine_tune_once(const Checkpoint& ckpt,
                         const std::vector<EegEpoch>& train_epochs,
                         const std::vector<int>& train_labels,
                         const std::vector<EegEpoch>& test_epochs,
                         const std::vector<int>& test_labels,
                         const EvalConfig& cfg) {
    Models m = load_checkpoint_models(ckpt, "best");
    if (!m.e_t)
        throw std::runtime_error("checkpoint lacks a time encoder");
    Rng init = make_rng(cfg.seed, "probe-init");
    m.classifier = std::make_unique<nn::Linear>(
        m.e_t->config().feature_dim, kNumStages, init);

    std::vector<nn::Param*> params = nn::trainable_params(m.e_t->net());
    for (auto* p : nn::trainable_params(*m.classifier)) params.push_back(p);
    nn::Adam opt(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.weight_decay);
    nn::PlateauScheduler sched(opt, cfg.scheduler_factor,
                               cfg.scheduler_patience);

    std::vector<std::size_t> order(train_epochs.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuf = make_rng(cfg.seed, "probe-order",
                            static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuf);
        double sum = 0;
        std::int64_t seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bsz =
                std::min<std::size_t>(cfg.batch_size, order.size() - start);
            if (bsz < 2) break;
            std::vector<EegEpoch> batch;
            std::vector<int> y;
            for (std::size_t i = 0; i < bsz; ++i) {
                batch.push_back(train_epochs[order[start + i]]);
                y.push_back(train_labels[order[start + i]]);
            }
            nn::zero_grads(params);
            Tensor feats = m.e_t->forward(make_time_batch(batch), true);
            Tensor logits = m.classifier->forward(feats, true);
            Tensor g;
            const double loss = cross_entropy(logits, y, &g);
            if (!std::isfinite(loss))
                throw std::runtime_error("fine-tuning diverged");
            m.e_t->backward(m.classifier->backward(g));
            opt.step();
            sum += static_cast<double>(bsz) * loss;
            seen += static_cast<std::int64_t>(bsz);
        }
        if (seen > 0) sched.observe(sum / static_cast<double>(seen));
    }

    Tensor feats = encode_features(*m.e_t, test_epochs);
    Tensor logits = m.classifier->forward(feats, false);
    return compute_metrics(test_labels, argmax_rows(logits));
}

// Class-stratified epoch-level subsample; returns selected indices.
std::vector<std::size_t> stratified_subsample(const std::vector<int>& labels,
                                              double fraction, Rng& rng) {
    std::array<std::vector<std::size_t>, kNumStages> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    std::vector<std::size_t> keep;
    for (auto& bucket : by_class) {
        std::shuffle(bucket.begin(), bucket.end(), rng);
        const auto k = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(bucket.size())));
        keep.insert(keep.end(), bucket.begin(),
                    bucket.begin() + static_cast<std::ptrdiff_t>(
                                         std::min(k, bucket.size())));
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

}  // namespace

std::string EvalReport::to_json() const {
    json j;
    j["protocol"] = protocol_name(protocol);
    j["folds"] = folds;
    j["fraction"] = fraction;
    j["checkpoint"] = checkpoint;
    j["mean"] = metrics_to_json(mean);
    j["stddev"] = metrics_to_json(stddev);
    return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
    json j = json::parse(text);
    EvalReport r;
    r.protocol = parse_protocol(j.at("protocol").get<std::string>());
    r.folds = j.at("folds").get<int>();
    r.fraction = j.at("fraction").get<double>();
    r.checkpoint = j.at("checkpoint").get<std::string>();
    r.mean = metrics_from_json(j.at("mean"));
    r.stddev = metrics_from_json(j.at("stddev"));
    return r;
}

Tensor encode_features(Encoder& enc, const std::vector<EegEpoch>& epochs,
                       int chunk) {
    Tensor out;
    for (std::size_t start = 0; start < epochs.size();
         start += static_cast<std::size_t>(chunk)) {
        const std::size_t n =
            std::min<std::size_t>(chunk, epochs.size() - start);
        std::vector<EegEpoch> part(epochs.begin() +
                                       static_cast<std::ptrdiff_t>(start),
                                   epochs.begin() +
                                       static_cast<std::ptrdiff_t>(start + n));
        Tensor f = enc.forward(make_time_batch(part), false);
        if (out.data.empty()) {
            out = f;
            out.shape[0] = static_cast<int>(epochs.size());
            out.data.resize(static_cast<std::size_t>(epochs.size()) *
                            static_cast<std::size_t>(f.dim(1)));
        } else {
            std::copy(f.data.begin(), f.data.end(),
                      out.data.begin() +
                          static_cast<std::ptrdiff_t>(
                              start * static_cast<std::size_t>(f.dim(1))));
        }
    }
    check_finite(out, "encoded features");
    return out;
}

EvalReport linear_evaluate(const Checkpoint& ckpt,
                           const std::vector<SubjectRecord>& train,
                           const std::vector<SubjectRecord>& test,
                           const EvalConfig& cfg) {
    cfg.validate();
    ensure_subject_disjoint(ids_of(train), ids_of(test), "linear evaluation");

    Models m = load_checkpoint_models(ckpt, "best");
    if (!m.e_t)
        throw std::runtime_error("checkpoint lacks a time encoder");
    const std::uint64_t frozen = encoder_digest(m);

    std::vector<EegEpoch> train_e, test_e;
    std::vector<int> train_y, test_y;
    gather_labeled(train, train_e, train_y);
    gather_labeled(test, test_e, test_y);

    Tensor train_f = encode_features(*m.e_t, train_e);
    auto clf = train_probe(train_f, train_y, cfg);
    Tensor test_f = encode_features(*m.e_t, test_e);
    Tensor logits = clf->forward(test_f, false);

    if (encoder_digest(m) != frozen)
        throw std::logic_error("linear evaluation modified encoder weights");

    EvalReport r;
    r.protocol = Protocol::LINEAR;
    r.mean = compute_metrics(test_y, argmax_rows(logits));
    r.checkpoint = ckpt.dir;
    return r;
}

EvalReport fine_tune(const Checkpoint& ckpt,
                     const std::vector<SubjectRecord>& train,
                     const std::vector<SubjectRecord>& test,
                     const EvalConfig& cfg) {
    cfg.validate();
    ensure_subject_disjoint(ids_of(train), ids_of(test), "fine-tuning");

    std::vector<EegEpoch> train_e, test_e;
    std::vector<int> train_y, test_y;
    gather_labeled(train, train_e, train_y);
    gather_labeled(test, test_e, test_y);

    EvalReport r;
    r.protocol = Protocol::FINETUNE;
    r.mean = fine_tune_once(ckpt, train_e, train_y, test_e, test_y, cfg);
    r.checkpoint = ckpt.dir;
    return r;
}

std::vector<EvalReport> semi_supervised_curve(
    const Checkpoint& ckpt, const std::vector<double>& fractions,
    const std::vector<SubjectRecord>& train,
    const std::vector<SubjectRecord>& test, const EvalConfig& cfg) {
    cfg.validate();
    ensure_subject_disjoint(ids_of(train), ids_of(test), "semi-supervised");

    std::vector<EegEpoch> train_e, test_e;
    std::vector<int> train_y, test_y;
    gather_labeled(train, train_e, train_y);
    gather_labeled(test, test_e, test_y);

    std::vector<EvalReport> out;
    for (double fraction : fractions) {
        if (fraction * static_cast<double>(train_e.size()) < 5.0) {
            std::cerr << "warning: skipping fraction " << fraction
                      << " (< 5 training epochs)\n";
            continue;
        }
        std::vector<MetricSet> per_seed;
        for (int s = 0; s < cfg.n_seeds; ++s) {
            EvalConfig run_cfg = cfg;
            run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(s);
            if (fraction >= 1.0) {
                per_seed.push_back(fine_tune_once(ckpt, train_e, train_y,
                                                  test_e, test_y, run_cfg));
                continue;
            }
            Rng sub = make_rng(run_cfg.seed, "subsample");
            auto keep = stratified_subsample(train_y, fraction, sub);
            if (keep.size() < 5) {
                std::cerr << "warning: fraction " << fraction
                          << " kept only " << keep.size() << " epochs\n";
                continue;
            }
            std::vector<EegEpoch> sub_e;
            std::vector<int> sub_y;
            for (auto i : keep) {
                sub_e.push_back(train_e[i]);
                sub_y.push_back(train_y[i]);
            }
            per_seed.push_back(fine_tune_once(ckpt, sub_e, sub_y, test_e,
                                              test_y, run_cfg));
        }
        if (per_seed.empty()) continue;
        EvalReport r;
        r.protocol = Protocol::SEMI;
        r.folds = static_cast<int>(per_seed.size());
        r.fraction = fraction;
        r.mean = mean_of(per_seed);
        r.stddev = std_of(per_seed, r.mean);
        r.checkpoint = ckpt.dir;
        out.push_back(std::move(r));
    }
    return out;
}

EvalReport kfold_evaluate(const Checkpoint& ckpt,
                          const std::vector<SubjectRecord>& pool,
                          const EvalConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(pool.size()) < cfg.folds)
        throw std::invalid_argument("k-fold needs at least k subjects");

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuf = make_rng(cfg.seed, "folds");
    std::shuffle(order.begin(), order.end(), shuf);

    std::vector<MetricSet> per_fold;
    std::size_t cursor = 0;
    for (int f = 0; f < cfg.folds; ++f) {
        const std::size_t size =
            pool.size() / static_cast<std::size_t>(cfg.folds) +
            (static_cast<std::size_t>(f) <
                     pool.size() % static_cast<std::size_t>(cfg.folds)
                 ? 1
                 : 0);
        std::vector<SubjectRecord> test_group, train_group;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const bool in_test = i >= cursor && i < cursor + size;
            (in_test ? test_group : train_group).push_back(pool[order[i]]);
        }
        cursor += size;
        EvalConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, "fold-eval",
                                    static_cast<std::uint64_t>(f));
        per_fold.push_back(
            linear_evaluate(ckpt, train_group, test_group, fold_cfg).mean);
    }

    EvalReport r;
    r.protocol = Protocol::KFOLD;
    r.folds = cfg.folds;
    r.mean = mean_of(per_fold);
    r.stddev = std_of(per_fold, r.mean);
    r.checkpoint = ckpt.dir;
    return r;
}

std::string sensitivity_sweep(const SweepSpec& spec,
                              const PretrainConfig& base,
                              const std::vector<SubjectRecord>& pretext,
                              const std::vector<SubjectRecord>& train,
                              const std::vector<SubjectRecord>& test,
                              const EvalConfig& cfg,
                              const std::string& out_dir) {
    fs::create_directories(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "sweep.csv").string();
    std::ofstream csv(csv_path);
    csv << "param,value,accuracy,kappa,macro_f1\n";

    auto run_point = [&](const char* param, double value,
                         const PretrainConfig& point) {
        const std::string dir =
            (fs::path(out_dir) /
             (std::string(param) + "_" + std::to_string(value)))
                .string();
        Checkpoint ckpt = pretrain(pretext, point, dir);
        EvalReport rep = linear_evaluate(ckpt, train, test, cfg);
        csv << param << "," << value << "," << rep.mean.accuracy << ","
            << rep.mean.kappa << "," << rep.mean.macro_f1 << "\n";
        csv.flush();
    };

    for (double v : spec.tau_d) {
        PretrainConfig p = base;
        p.tau_d = v;
        run_point("tau_d", v, p);
    }
    for (double v : spec.lambda1) {
        PretrainConfig p = base;
        p.lambda1 = v;
        run_point("lambda1", v, p);
    }
    for (double v : spec.lambda2) {
        PretrainConfig p = base;
        p.lambda2 = v;
        run_point("lambda2", v, p);
    }
    return csv_path;
}

std::string export_embeddings(const Checkpoint& ckpt,
                              const std::vector<SubjectRecord>& labeled,
                              int n_per_class, std::uint64_t seed,
                              const std::string& out_csv) {
    if (n_per_class <= 0)
        throw std::invalid_argument("n_per_class must be > 0");
    Models m = load_checkpoint_models(ckpt, "best");
    if (!m.e_t)
        throw std::runtime_error("checkpoint lacks a time encoder");

    std::vector<EegEpoch> epochs;
    std::vector<int> labels;
    gather_labeled(labeled, epochs, labels);

    std::array<std::vector<std::size_t>, kNumStages> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);

    std::vector<std::size_t> keep;
    for (int k = 0; k < kNumStages; ++k) {
        auto& bucket = by_class[static_cast<std::size_t>(k)];
        Rng rng = make_rng(seed, "export", static_cast<std::uint64_t>(k));
        std::shuffle(bucket.begin(), bucket.end(), rng);
        if (bucket.size() < static_cast<std::size_t>(n_per_class))
            std::cerr << "warning: class " << stage_name(SleepStage(k))
                      << " has only " << bucket.size() << " epochs\n";
        const auto take =
            std::min<std::size_t>(bucket.size(),
                                  static_cast<std::size_t>(n_per_class));
        keep.insert(keep.end(), bucket.begin(),
                    bucket.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(keep.begin(), keep.end());

    std::vector<EegEpoch> selected;
    for (auto i : keep) selected.push_back(epochs[i]);
    Tensor feats = encode_features(*m.e_t, selected);

    if (fs::path(out_csv).has_parent_path())
        fs::create_directories(fs::path(out_csv).parent_path());
    std::ofstream os(out_csv);
    const int d = feats.dim(1);
    for (int c = 0; c < d; ++c) os << "f" << c << ",";
    os << "label\n";
    for (std::size_t r = 0; r < keep.size(); ++r) {
        for (int c = 0; c < d; ++c)
            os << feats.data[r * static_cast<std::size_t>(d) +
                             static_cast<std::size_t>(c)]
               << ",";
        os << labels[keep[r]] << "\n";
    }
    return out_csv;
}

}  // namespace sleepssl
