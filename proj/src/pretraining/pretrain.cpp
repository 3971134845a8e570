#include "sleepssl/pretraining/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "sleepssl/encoders/checkpoint.hpp"
#include "sleepssl/signal/stft.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sleepssl {

const char* strategy_name(StrategyKind s) {
    switch (s) {
        case StrategyKind::SINGLE_TIME: return "single_time";
        case StrategyKind::SINGLE_SPEC: return "single_spec";
        case StrategyKind::CMC: return "cmc";
        case StrategyKind::SIMPLE_FUSION: return "simple_fusion";
        case StrategyKind::MULEEG: return "muleeg";
        case StrategyKind::SUPERVISED: return "supervised";
        case StrategyKind::RANDOM_INIT: return "random_init";
    }
    return "?";
}

StrategyKind parse_strategy(const std::string& name) {
    static const std::pair<const char*, StrategyKind> kNames[] = {
        {"single_time", StrategyKind::SINGLE_TIME},
        {"single_spec", StrategyKind::SINGLE_SPEC},
        {"cmc", StrategyKind::CMC},
        {"simple_fusion", StrategyKind::SIMPLE_FUSION},
        {"muleeg", StrategyKind::MULEEG},
        {"supervised", StrategyKind::SUPERVISED},
        {"random_init", StrategyKind::RANDOM_INIT},
    };
    for (const auto& [n, k] : kNames)
        if (name == n) return k;
    std::string msg = "unknown strategy '" + name + "'; valid:";
    for (const auto& [n, k] : kNames) msg += std::string(" ") + n;
    throw std::invalid_argument(msg);
}

PretrainConfig PretrainConfig::paper(StrategyKind s) {
    PretrainConfig cfg;
    cfg.strategy = s;
    if (s == StrategyKind::SUPERVISED) {
        cfg.epochs = 300;
        cfg.scheduler_patience = 10;
    }
    return cfg;
}

PretrainConfig PretrainConfig::desk(StrategyKind s) {
    PretrainConfig cfg = paper(s);
    cfg.preset = SizePreset::DESK;
    cfg.epochs = s == StrategyKind::SUPERVISED ? 30 : 10;
    cfg.batch_size = 128;
    return cfg;
}

void PretrainConfig::validate() const {
    if (!(lr > 0)) throw std::invalid_argument("lr must be > 0");
    if (epochs <= 0) throw std::invalid_argument("epochs must be > 0");
    if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
    if (!(tau > 0) || !(tau_d > 0))
        throw std::invalid_argument("temperatures must be > 0");
    if (lambda1 < 0 || lambda2 < 0)
        throw std::invalid_argument("loss weights must be >= 0");
    if (!(scheduler_factor > 0 && scheduler_factor < 1))
        throw std::invalid_argument("scheduler_factor must be in (0,1)");
    if (scheduler_patience < 0)
        throw std::invalid_argument("scheduler_patience must be >= 0");
    if (weight_decay < 0) throw std::invalid_argument("weight_decay >= 0");
    aug.validate();
}

namespace {

void collect_from(nn::Layer* l, const std::string& prefix,
                  std::vector<nn::NamedParam>& out) {
    if (l) l->collect(prefix, out);
}

MatrixXd to_mat(const Tensor& t) {
    const int n = t.dim(0);
    const int d = static_cast<int>(t.size() / n);
    MatrixXd m(n, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c)
            m(r, c) = t.data[static_cast<std::size_t>(r) * d + c];
    return m;
}

Tensor to_tensor(const MatrixXd& m) {
    Tensor t({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            t.data[static_cast<std::size_t>(r) * m.cols() + c] =
                static_cast<float>(m(r, c));
    return t;
}

// Rows [start, start+n) of a tensor whose leading axis indexes rows.
Tensor slice_rows(const Tensor& t, int start, int n) {
    const std::size_t row = static_cast<std::size_t>(t.size() / t.dim(0));
    std::vector<int> shape = t.shape;
    shape[0] = n;
    Tensor out(shape);
    std::copy_n(t.data.begin() + static_cast<std::ptrdiff_t>(start * row),
                static_cast<std::size_t>(n) * row, out.data.begin());
    return out;
}

Tensor stack_rows(const Tensor& a, const Tensor& b) {
    std::vector<int> shape = a.shape;
    shape[0] = a.dim(0) + b.dim(0);
    Tensor out(shape);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
    return out;
}

void add_inplace(Tensor& a, const Tensor& b) {
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

Tensor spec_batch_of(const std::vector<EegEpoch>& epochs) {
    std::vector<Spectrogram> specs;
    specs.reserve(epochs.size());
    for (const auto& e : epochs) specs.push_back(stft_spectrogram(e));
    return make_spec_batch(specs);
}

void require(bool ok, const char* what) {
    if (!ok)
        throw std::runtime_error(std::string("strategy/model mismatch: ") +
                                 what);
}

}  // namespace

std::vector<nn::Param*> Models::trainable() {
    std::vector<nn::NamedParam> all = named();
    std::vector<nn::Param*> out;
    for (auto& np : all)
        if (np.param->trainable) out.push_back(np.param);
    return out;
}

std::vector<nn::NamedParam> Models::named() {
    std::vector<nn::NamedParam> out;
    collect_from(e_t ? &e_t->net() : nullptr, "e_t", out);
    collect_from(e_s ? &e_s->net() : nullptr, "e_s", out);
    collect_from(f1.get(), "f1", out);
    collect_from(f2.get(), "f2", out);
    collect_from(g1.get(), "g1", out);
    collect_from(g2.get(), "g2", out);
    collect_from(h1.get(), "h1", out);
    collect_from(h2.get(), "h2", out);
    collect_from(classifier.get(), "clf", out);
    return out;
}

Models build_models(const PretrainConfig& cfg) {
    Rng rng = make_rng(cfg.seed, "init");
    Models m;
    const auto time_cfg = EncoderConfig::time_encoder(cfg.preset);
    const auto spec_cfg = EncoderConfig::spectrogram_encoder(cfg.preset);
    const int fd = time_cfg.feature_dim;
    auto head = [&rng](int in_dim) {
        ProjectionHeadConfig hc;
        hc.in_dim = in_dim;
        hc.hidden_dim = in_dim;
        return build_projection_head(hc, rng);
    };

    switch (cfg.strategy) {
        case StrategyKind::SINGLE_TIME:
            m.e_t = build_time_encoder(time_cfg, rng);
            m.f1 = head(fd);
            m.f2 = head(fd);
            break;
        case StrategyKind::SINGLE_SPEC:
            m.e_s = build_spectrogram_encoder(spec_cfg, rng);
            m.f1 = head(fd);
            m.f2 = head(fd);
            break;
        case StrategyKind::CMC:
            m.e_t = build_time_encoder(time_cfg, rng);
            m.e_s = build_spectrogram_encoder(spec_cfg, rng);
            m.f1 = head(fd);
            m.f2 = head(fd);
            break;
        case StrategyKind::SIMPLE_FUSION:
            m.e_t = build_time_encoder(time_cfg, rng);
            m.e_s = build_spectrogram_encoder(spec_cfg, rng);
            m.f1 = head(2 * fd);
            m.f2 = head(2 * fd);
            break;
        case StrategyKind::MULEEG:
            m.e_t = build_time_encoder(time_cfg, rng);
            m.e_s = build_spectrogram_encoder(spec_cfg, rng);
            m.f1 = head(fd);
            m.f2 = head(fd);
            m.g1 = head(fd);
            m.g2 = head(fd);
            m.h1 = head(2 * fd);
            m.h2 = head(2 * fd);
            break;
        case StrategyKind::SUPERVISED:
            m.e_t = build_time_encoder(time_cfg, rng);
            m.classifier = std::make_unique<nn::Linear>(fd, kNumStages, rng);
            break;
        case StrategyKind::RANDOM_INIT:
            m.e_t = build_time_encoder(time_cfg, rng);
            m.e_s = build_spectrogram_encoder(spec_cfg, rng);
            break;
    }
    return m;
}

LossBundle training_step(std::span<const EegEpoch> batch, Models& models,
                         const PretrainConfig& cfg, Rng& aug_rng) {
    if (batch.size() < 2)
        throw std::invalid_argument("training_step needs a batch of >= 2");

    const int n = static_cast<int>(batch.size());
    std::vector<EegEpoch> t1, t2;
    t1.reserve(batch.size());
    t2.reserve(batch.size());
    for (const auto& e : batch) {
        t1.push_back(augment_t1(e, cfg.aug, aug_rng));
        t2.push_back(augment_t2(e, cfg.aug, aug_rng));
    }

    LossBundle out;
    out.lambda1 = cfg.lambda1;
    out.lambda2 = cfg.lambda2;
    out.tau = cfg.tau;
    out.tau_d = cfg.tau_d;

    switch (cfg.strategy) {
        case StrategyKind::SINGLE_TIME: {
            require(models.e_t && models.f1 && models.f2, "single_time");
            std::vector<EegEpoch> both = t1;
            both.insert(both.end(), t2.begin(), t2.end());
            Tensor feats = models.e_t->forward(make_time_batch(both), true);
            Tensor fa = slice_rows(feats, 0, n), fb = slice_rows(feats, n, n);
            Tensor za = models.f1->forward(fa, true);
            Tensor zb = models.f2->forward(fb, true);
            MatrixXd dza, dzb;
            out.l_tt = nt_xent_grad(to_mat(za), to_mat(zb), cfg.tau, &dza, &dzb);
            out.total = out.l_tt;
            Tensor ga = models.f1->backward(to_tensor(dza));
            Tensor gb = models.f2->backward(to_tensor(dzb));
            models.e_t->backward(stack_rows(ga, gb));
            break;
        }
        case StrategyKind::SINGLE_SPEC: {
            require(models.e_s && models.f1 && models.f2, "single_spec");
            std::vector<EegEpoch> both = t1;
            both.insert(both.end(), t2.begin(), t2.end());
            Tensor feats = models.e_s->forward(spec_batch_of(both), true);
            Tensor fa = slice_rows(feats, 0, n), fb = slice_rows(feats, n, n);
            Tensor za = models.f1->forward(fa, true);
            Tensor zb = models.f2->forward(fb, true);
            MatrixXd dza, dzb;
            out.l_ss = nt_xent_grad(to_mat(za), to_mat(zb), cfg.tau, &dza, &dzb);
            out.total = out.l_ss;
            Tensor ga = models.f1->backward(to_tensor(dza));
            Tensor gb = models.f2->backward(to_tensor(dzb));
            models.e_s->backward(stack_rows(ga, gb));
            break;
        }
        case StrategyKind::CMC: {
            require(models.e_t && models.e_s && models.f1 && models.f2, "cmc");
            require(!models.g1 && !models.h1, "cmc has no extra heads");
            Tensor ft = models.e_t->forward(make_time_batch(t1), true);
            Tensor fs = models.e_s->forward(spec_batch_of(t2), true);
            Tensor za = models.f1->forward(ft, true);
            Tensor zb = models.f2->forward(fs, true);
            MatrixXd dza, dzb;
            out.l_tt = nt_xent_grad(to_mat(za), to_mat(zb), cfg.tau, &dza, &dzb);
            out.total = out.l_tt;
            models.e_t->backward(models.f1->backward(to_tensor(dza)));
            models.e_s->backward(models.f2->backward(to_tensor(dzb)));
            break;
        }
        case StrategyKind::SIMPLE_FUSION: {
            require(models.e_t && models.e_s && models.f1 && models.f2,
                    "simple_fusion");
            std::vector<EegEpoch> both = t1;
            both.insert(both.end(), t2.begin(), t2.end());
            Tensor ft = models.e_t->forward(make_time_batch(both), true);
            Tensor fs = models.e_s->forward(spec_batch_of(both), true);
            const int fd = ft.dim(1);
            Tensor c1 = concat_features(slice_rows(ft, 0, n),
                                        slice_rows(fs, 0, n));
            Tensor c2 = concat_features(slice_rows(ft, n, n),
                                        slice_rows(fs, n, n));
            Tensor za = models.f1->forward(c1, true);
            Tensor zb = models.f2->forward(c2, true);
            MatrixXd dza, dzb;
            out.l_ff = nt_xent_grad(to_mat(za), to_mat(zb), cfg.tau, &dza, &dzb);
            out.total = out.l_ff;
            auto [gt1, gs1] = split_feature_grad(
                models.f1->backward(to_tensor(dza)), fd);
            auto [gt2, gs2] = split_feature_grad(
                models.f2->backward(to_tensor(dzb)), fd);
            models.e_t->backward(stack_rows(gt1, gt2));
            models.e_s->backward(stack_rows(gs1, gs2));
            break;
        }
        case StrategyKind::MULEEG: {
            require(models.e_t && models.e_s && models.f1 && models.f2 &&
                        models.g1 && models.g2 && models.h1 && models.h2,
                    "muleeg");
            std::vector<EegEpoch> both = t1;
            both.insert(both.end(), t2.begin(), t2.end());
            Tensor ft = models.e_t->forward(make_time_batch(both), true);
            Tensor fs = models.e_s->forward(spec_batch_of(both), true);
            const int fd = ft.dim(1);
            Tensor ft1 = slice_rows(ft, 0, n), ft2 = slice_rows(ft, n, n);
            Tensor fs1 = slice_rows(fs, 0, n), fs2 = slice_rows(fs, n, n);

            Tensor zf1 = models.f1->forward(ft1, true);
            Tensor zf2 = models.f2->forward(ft2, true);
            Tensor zg1 = models.g1->forward(fs1, true);
            Tensor zg2 = models.g2->forward(fs2, true);

            MatrixXd dtt1, dtt2, dss1, dss2;
            out.l_tt =
                nt_xent_grad(to_mat(zf1), to_mat(zf2), cfg.tau, &dtt1, &dtt2);
            out.l_ss =
                nt_xent_grad(to_mat(zg1), to_mat(zg2), cfg.tau, &dss1, &dss2);

            QuadrupleEmbedding qg;
            if (cfg.use_diverse) {
                QuadrupleEmbedding q{to_mat(zf1), to_mat(zf2), to_mat(zg1),
                                     to_mat(zg2)};
                out.l_d = diverse_loss_grad(q, cfg.tau_d, &qg);
            }

            auto head_grad = [&](const MatrixXd& d_nt,
                                 const MatrixXd* d_div) {
                MatrixXd g = cfg.lambda1 * d_nt;
                if (d_div) g += cfg.lambda2 * (*d_div);
                return to_tensor(g);
            };
            const bool dv = cfg.use_diverse;
            Tensor gft1 = models.f1->backward(
                head_grad(dtt1, dv ? &qg.z_t_i : nullptr));
            Tensor gft2 = models.f2->backward(
                head_grad(dtt2, dv ? &qg.z_t_j : nullptr));
            Tensor gfs1 = models.g1->backward(
                head_grad(dss1, dv ? &qg.z_s_i : nullptr));
            Tensor gfs2 = models.g2->backward(
                head_grad(dss2, dv ? &qg.z_s_j : nullptr));

            if (cfg.use_fusion) {
                Tensor zh1 = models.h1->forward(concat_features(ft1, fs1), true);
                Tensor zh2 = models.h2->forward(concat_features(ft2, fs2), true);
                MatrixXd dff1, dff2;
                out.l_ff = nt_xent_grad(to_mat(zh1), to_mat(zh2), cfg.tau,
                                        &dff1, &dff2);
                auto [ht1, hs1] = split_feature_grad(
                    models.h1->backward(to_tensor(cfg.lambda1 * dff1)), fd);
                auto [ht2, hs2] = split_feature_grad(
                    models.h2->backward(to_tensor(cfg.lambda1 * dff2)), fd);
                add_inplace(gft1, ht1);
                add_inplace(gft2, ht2);
                add_inplace(gfs1, hs1);
                add_inplace(gfs2, hs2);
            }

            out.total = total_loss(out.l_tt, out.l_ss, out.l_ff, out.l_d,
                                   cfg.lambda1, cfg.lambda2);
            models.e_t->backward(stack_rows(gft1, gft2));
            models.e_s->backward(stack_rows(gfs1, gfs2));
            break;
        }
        case StrategyKind::SUPERVISED:
        case StrategyKind::RANDOM_INIT:
            throw std::runtime_error(
                "strategy/model mismatch: no contrastive step for " +
                std::string(strategy_name(cfg.strategy)));
    }
    return out;
}

double cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                     Tensor* grad) {
    const int n = logits.dim(0), k = logits.dim(1);
    if (static_cast<std::size_t>(n) != labels.size())
        throw std::invalid_argument("cross_entropy: label count mismatch");
    if (grad) *grad = Tensor(logits.shape);
    double loss = 0;
    for (int r = 0; r < n; ++r) {
        const float* row = logits.ptr() + static_cast<std::size_t>(r) * k;
        double mx = row[0];
        for (int c = 1; c < k; ++c) mx = std::max(mx, double(row[c]));
        double z = 0;
        for (int c = 0; c < k; ++c) z += std::exp(row[c] - mx);
        loss += std::log(z) + mx - row[labels[static_cast<std::size_t>(r)]];
        if (grad)
            for (int c = 0; c < k; ++c) {
                double p = std::exp(row[c] - mx) / z;
                grad->data[static_cast<std::size_t>(r) * k + c] =
                    static_cast<float>(
                        (p - (c == labels[static_cast<std::size_t>(r)])) / n);
            }
    }
    return loss / n;
}

namespace {

json config_to_json(const PretrainConfig& c) {
    json j;
    j["strategy"] = strategy_name(c.strategy);
    j["use_diverse"] = c.use_diverse;
    j["use_fusion"] = c.use_fusion;
    j["lr"] = c.lr;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["weight_decay"] = c.weight_decay;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["scheduler_factor"] = c.scheduler_factor;
    j["scheduler_patience"] = c.scheduler_patience;
    j["tau"] = c.tau;
    j["tau_d"] = c.tau_d;
    j["lambda1"] = c.lambda1;
    j["lambda2"] = c.lambda2;
    j["seed"] = c.seed;
    j["preset"] = c.preset == SizePreset::PAPER ? "paper" : "desk";
    j["aug"] = {{"jitter_ratio", c.aug.jitter_ratio},
                {"mask_segments", c.aug.mask_segments},
                {"mask_max_fraction", c.aug.mask_max_fraction},
                {"flip_probability", c.aug.flip_probability},
                {"flip_sign_instead", c.aug.flip_sign_instead},
                {"scale_sigma", c.aug.scale_sigma}};
    return j;
}

PretrainConfig config_from_json(const json& j) {
    PretrainConfig c;
    c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    c.use_diverse = j.at("use_diverse").get<bool>();
    c.use_fusion = j.at("use_fusion").get<bool>();
    c.lr = j.at("lr").get<float>();
    c.beta1 = j.at("beta1").get<float>();
    c.beta2 = j.at("beta2").get<float>();
    c.weight_decay = j.at("weight_decay").get<float>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.scheduler_factor = j.at("scheduler_factor").get<float>();
    c.scheduler_patience = j.at("scheduler_patience").get<int>();
    c.tau = j.at("tau").get<double>();
    c.tau_d = j.at("tau_d").get<double>();
    c.lambda1 = j.at("lambda1").get<double>();
    c.lambda2 = j.at("lambda2").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.preset = j.at("preset").get<std::string>() == "paper" ? SizePreset::PAPER
                                                            : SizePreset::DESK;
    const auto& a = j.at("aug");
    c.aug.jitter_ratio = a.at("jitter_ratio").get<float>();
    c.aug.mask_segments = a.at("mask_segments").get<int>();
    c.aug.mask_max_fraction = a.at("mask_max_fraction").get<float>();
    c.aug.flip_probability = a.at("flip_probability").get<float>();
    c.aug.flip_sign_instead = a.at("flip_sign_instead").get<bool>();
    c.aug.scale_sigma = a.at("scale_sigma").get<float>();
    return c;
}

void write_config(const PretrainConfig& cfg, const std::string& dir) {
    std::ofstream os(fs::path(dir) / "config.json");
    os << config_to_json(cfg).dump(2) << "\n";
}

std::vector<EegEpoch> gather_epochs(const std::vector<SubjectRecord>& recs) {
    std::vector<EegEpoch> out;
    for (const auto& r : recs)
        out.insert(out.end(), r.epochs.begin(), r.epochs.end());
    return out;
}

}  // namespace

Checkpoint pretrain(const std::vector<SubjectRecord>& pretext,
                    const PretrainConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (cfg.strategy == StrategyKind::SUPERVISED)
        return supervised_train(pretext, cfg, out_dir);

    std::vector<EegEpoch> pool = gather_epochs(pretext);
    if (pool.empty())
        throw std::invalid_argument("pretrain: no epochs in pretext group");

    const std::uint64_t label_reads_before = label_access_count();
    fs::create_directories(out_dir);
    write_config(cfg, out_dir);

    Models models = build_models(cfg);
    Checkpoint ckpt{cfg, out_dir, {}};

    const std::string best_path = (fs::path(out_dir) / "best.bin").string();
    const std::string last_path = (fs::path(out_dir) / "last.bin").string();
    std::ofstream csv(fs::path(out_dir) / "loss.csv");
    csv << "epoch,l_tt,l_ss,l_ff,l_d,total,lr\n";

    if (cfg.strategy == StrategyKind::RANDOM_INIT) {
        auto named = models.named();
        save_weights(best_path, named);
        save_weights(last_path, named);
        return ckpt;
    }

    auto params = models.trainable();
    nn::Adam opt(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.weight_decay);
    nn::PlateauScheduler sched(opt, cfg.scheduler_factor,
                               cfg.scheduler_patience);

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng order_rng = make_rng(cfg.seed, "order", static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), order_rng);
        Rng aug_rng = make_rng(cfg.seed, "augment", static_cast<std::uint64_t>(epoch));

        LossBundle sums;
        std::int64_t seen = 0;
        for (std::size_t start = 0; start < pool.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bsz =
                std::min<std::size_t>(cfg.batch_size, pool.size() - start);
            if (bsz < 2) break;
            std::vector<EegEpoch> batch;
            batch.reserve(bsz);
            for (std::size_t i = 0; i < bsz; ++i)
                batch.push_back(pool[order[start + i]]);

            nn::zero_grads(params);
            LossBundle b = training_step(batch, models, cfg, aug_rng);
            if (!std::isfinite(b.total))
                throw std::runtime_error(
                    "pretraining diverged: non-finite loss at epoch " +
                    std::to_string(epoch) + " (strategy " +
                    strategy_name(cfg.strategy) + ")");
            opt.step();

            const auto w = static_cast<double>(bsz);
            sums.l_tt += w * b.l_tt;
            sums.l_ss += w * b.l_ss;
            sums.l_ff += w * b.l_ff;
            sums.l_d += w * b.l_d;
            sums.total += w * b.total;
            seen += static_cast<std::int64_t>(bsz);
        }
        if (seen == 0)
            throw std::invalid_argument("pretrain: too few epochs for a batch");

        const double total = sums.total / static_cast<double>(seen);
        csv << epoch << "," << sums.l_tt / seen << "," << sums.l_ss / seen
            << "," << sums.l_ff / seen << "," << sums.l_d / seen << ","
            << total << "," << opt.lr() << "\n";
        csv.flush();
        ckpt.loss_history.push_back(total);
        if (total < best) {
            best = total;
            save_weights(best_path, models.named());
        }
        sched.observe(total);
    }
    save_weights(last_path, models.named());

    if (label_access_count() != label_reads_before)
        throw std::logic_error("pretraining read stage labels");
    return ckpt;
}

Checkpoint supervised_train(const std::vector<SubjectRecord>& train,
                            const PretrainConfig& cfg,
                            const std::string& out_dir) {
    cfg.validate();
    PretrainConfig sup_cfg = cfg;
    sup_cfg.strategy = StrategyKind::SUPERVISED;

    std::vector<EegEpoch> pool;
    std::vector<int> labels;
    for (const auto& r : train)
        for (const auto& e : r.epochs)
            if (e.has_label()) {
                pool.push_back(e);
                labels.push_back(static_cast<int>(e.label()));
            }
    if (pool.empty())
        throw std::invalid_argument("supervised_train: no labeled epochs");

    fs::create_directories(out_dir);
    write_config(sup_cfg, out_dir);

    Models models = build_models(sup_cfg);
    auto params = models.trainable();
    nn::Adam opt(params, sup_cfg.lr, sup_cfg.beta1, sup_cfg.beta2,
                 sup_cfg.weight_decay);
    nn::PlateauScheduler sched(opt, sup_cfg.scheduler_factor,
                               sup_cfg.scheduler_patience);

    const std::string best_path = (fs::path(out_dir) / "best.bin").string();
    const std::string last_path = (fs::path(out_dir) / "last.bin").string();
    std::ofstream csv(fs::path(out_dir) / "loss.csv");
    csv << "epoch,l_tt,l_ss,l_ff,l_d,total,lr\n";

    Checkpoint ckpt{sup_cfg, out_dir, {}};
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();

    for (int epoch = 0; epoch < sup_cfg.epochs; ++epoch) {
        Rng order_rng = make_rng(sup_cfg.seed, "order", static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), order_rng);

        double sum = 0;
        std::int64_t seen = 0;
        for (std::size_t start = 0; start < pool.size();
             start += static_cast<std::size_t>(sup_cfg.batch_size)) {
            const std::size_t bsz =
                std::min<std::size_t>(sup_cfg.batch_size, pool.size() - start);
            if (bsz < 2) break;
            std::vector<EegEpoch> batch;
            std::vector<int> y;
            for (std::size_t i = 0; i < bsz; ++i) {
                batch.push_back(pool[order[start + i]]);
                y.push_back(labels[order[start + i]]);
            }
            nn::zero_grads(params);
            Tensor feats = models.e_t->forward(make_time_batch(batch), true);
            Tensor logits = models.classifier->forward(feats, true);
            Tensor dlogits;
            const double loss = cross_entropy(logits, y, &dlogits);
            if (!std::isfinite(loss))
                throw std::runtime_error(
                    "supervised training diverged at epoch " +
                    std::to_string(epoch));
            models.e_t->backward(models.classifier->backward(dlogits));
            opt.step();
            sum += static_cast<double>(bsz) * loss;
            seen += static_cast<std::int64_t>(bsz);
        }
        if (seen == 0)
            throw std::invalid_argument(
                "supervised_train: too few epochs for a batch");

        const double total = sum / static_cast<double>(seen);
        csv << epoch << ",0,0,0,0," << total << "," << opt.lr() << "\n";
        csv.flush();
        ckpt.loss_history.push_back(total);
        if (total < best) {
            best = total;
            save_weights(best_path, models.named());
        }
        sched.observe(total);
    }
    save_weights(last_path, models.named());
    return ckpt;
}

Models load_checkpoint_models(const Checkpoint& ckpt,
                              const std::string& which) {
    Models models = build_models(ckpt.cfg);
    auto named = models.named();
    load_weights((fs::path(ckpt.dir) / (which + ".bin")).string(), named);
    return models;
}

Checkpoint open_checkpoint(const std::string& dir) {
    std::ifstream is(fs::path(dir) / "config.json");
    if (!is)
        throw std::runtime_error("checkpoint config not found in " + dir);
    json j;
    is >> j;
    Checkpoint ckpt{config_from_json(j), dir, {}};

    std::ifstream csv(fs::path(dir) / "loss.csv");
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
        const auto last = line.rfind(',');
        const auto prev = line.rfind(',', last - 1);
        if (last == std::string::npos || prev == std::string::npos) continue;
        ckpt.loss_history.push_back(
            std::stod(line.substr(prev + 1, last - prev - 1)));
    }
    return ckpt;
}

}  // namespace sleepssl
