#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sleepssl/cli/config.hpp"
#include "sleepssl/cli/svgplot.hpp"
#include "sleepssl/datasets/cache.hpp"
#include "sleepssl/datasets/split.hpp"
#include "sleepssl/datasets/synth.hpp"
#include "sleepssl/evaluation/protocols.hpp"
#include "sleepssl/pretraining/pretrain.hpp"

namespace fs = std::filesystem;
using namespace sleepssl;

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) out.push_back(std::stod(cell));
    return out;
}

// Snapshot of the resolved option values, written next to the outputs so a
// run can be reproduced from its artifacts alone.
void write_provenance(const RunConfig& rc, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_effective_config(rc,
                           (fs::path(out_dir) / "effective_config.toml")
                               .string());
}

template <typename T>
std::string str_of(const T& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// "split.n_pretext" -> "--n-pretext": section prefixes are dropped and
// underscores become dashes, so effective_config.toml files can be fed
// straight back in via --config.
std::string flag_of(const std::string& key) {
    const auto dot = key.find('.');
    std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    for (auto& c : name)
        if (c == '_') c = '-';
    return "--" + name;
}

// Applies a --config file by appending its entries as flag tokens. Flags
// already present on the command line win over file values.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
    std::string path;
    for (auto it = args.begin(); it != args.end();) {
        if (*it == "--config") {
            if (std::next(it) == args.end())
                throw std::invalid_argument("--config needs a file path");
            path = *std::next(it);
            it = args.erase(it, it + 2);
        } else if (it->rfind("--config=", 0) == 0) {
            path = it->substr(9);
            it = args.erase(it);
        } else {
            ++it;
        }
    }
    if (path.empty()) return args;
    for (const auto& [key, val] : parse_toml_file(path).values) {
        const std::string flag = flag_of(key);
        const std::string negated = "--no-" + flag.substr(2);
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0 || a == negated ||
                a.rfind(negated + "=", 0) == 0) {
                given = true;
                break;
            }
        if (!given) args.push_back(flag + "=" + val);
    }
    return args;
}

struct SplitFlags {
    int n_pretext = -1;
    int n_train = 0;
    int n_test = 0;
    std::uint64_t split_seed = 0;

    void add_to(CLI::App* sub) {
        sub->add_option("--n-pretext", n_pretext,
                        "pretext subject count (-1: all remaining)");
        sub->add_option("--n-train", n_train, "train subject count");
        sub->add_option("--n-test", n_test, "test subject count");
        sub->add_option("--split-seed", split_seed,
                        "seed for the subject split shuffle");
    }

    void record(RunConfig& rc) const {
        rc.values["split.n_pretext"] = str_of(n_pretext);
        rc.values["split.n_train"] = str_of(n_train);
        rc.values["split.n_test"] = str_of(n_test);
        rc.values["split.split_seed"] = str_of(split_seed);
    }

    DatasetSplit resolve(const std::vector<SubjectRecord>& recs) const {
        std::vector<std::string> ids;
        for (const auto& r : recs) ids.push_back(r.subject_id);
        const int total = static_cast<int>(ids.size());
        const int pre =
            n_pretext >= 0 ? n_pretext : total - n_train - n_test;
        if (pre < 0)
            throw std::invalid_argument("split counts exceed subject count");
        return split_subjects(ids, pre, n_train, n_test, split_seed);
    }
};

std::vector<SubjectRecord> select_subjects(
    const std::vector<SubjectRecord>& recs,
    const std::vector<std::string>& ids) {
    std::vector<SubjectRecord> out;
    for (const auto& id : ids)
        for (const auto& r : recs)
            if (r.subject_id == id) out.push_back(r);
    return out;
}

int cmd_synth_data(int subjects, int epochs, std::uint64_t seed, int rate,
                   const std::string& out) {
    if (subjects <= 0)
        throw std::invalid_argument("--subjects must be positive");
    if (epochs <= 0)
        throw std::invalid_argument("--epochs must be positive");
    SynthConfig cfg{subjects, epochs, seed, rate};
    cache_write(synth_generate(cfg), out);
    RunConfig rc;
    rc.values = {{"subjects", str_of(subjects)},
                 {"epochs", str_of(epochs)},
                 {"seed", str_of(seed)},
                 {"rate", str_of(rate)},
                 {"out", out}};
    write_provenance(rc, out);
    std::cout << "wrote " << subjects << " subjects to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view self-supervised sleep staging pipeline"};
    app.require_subcommand(1);

    // ------------------------------------------------------------ synth-data
    auto* synth = app.add_subcommand("synth-data",
                                     "generate a synthetic EEG cache");
    int sd_subjects = 8, sd_epochs = 120, sd_rate = 100;
    std::uint64_t sd_seed = 0;
    std::string sd_out;
    synth->add_option("--subjects", sd_subjects, "number of subjects");
    synth->add_option("--epochs", sd_epochs, "30 s epochs per subject");
    synth->add_option("--seed", sd_seed, "generator seed");
    synth->add_option("--rate", sd_rate, "sample rate in Hz");
    synth->add_option("--out", sd_out, "output cache directory")->required();

    // -------------------------------------------------------------- pretrain
    auto* pre = app.add_subcommand("pretrain", "self-supervised pretraining");
    std::string pt_strategy = "muleeg", pt_data, pt_out, pt_preset = "desk";
    std::uint64_t pt_seed = 0;
    int pt_epochs = -1, pt_batch = -1;
    double pt_lr = -1, pt_tau = -1, pt_tau_d = -1, pt_l1 = -1, pt_l2 = -1;
    bool pt_diverse = true, pt_fusion = true;
    SplitFlags pt_split;
    pre->add_option("--strategy", pt_strategy,
                    "single_time|single_spec|cmc|simple_fusion|muleeg|"
                    "supervised|random_init");
    pre->add_option("--data", pt_data, "cache directory")->required();
    pre->add_option("--out", pt_out, "checkpoint directory")->required();
    pre->add_option("--preset", pt_preset, "paper|desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    pre->add_option("--seed", pt_seed, "run seed");
    pre->add_option("--epochs", pt_epochs, "training epochs");
    pre->add_option("--batch-size", pt_batch, "mini-batch size");
    pre->add_option("--lr", pt_lr, "initial learning rate");
    pre->add_option("--tau", pt_tau, "contrastive temperature");
    pre->add_option("--tau-d", pt_tau_d, "diverse-loss temperature");
    pre->add_option("--lambda1", pt_l1, "contrastive loss weight");
    pre->add_option("--lambda2", pt_l2, "diverse loss weight");
    pre->add_flag("--diverse,!--no-diverse", pt_diverse,
                  "toggle the diverse loss term");
    pre->add_flag("--fusion,!--no-fusion", pt_fusion,
                  "toggle the fused-feature contrastive term");
    pt_split.add_to(pre);

    // -------------------------------------------------------------- evaluate
    auto* ev = app.add_subcommand("evaluate", "downstream evaluation");
    std::string ev_protocol = "linear", ev_ckpt, ev_data, ev_out;
    std::string ev_fractions = "0.01,0.05,0.10,0.25,0.50,1.00";
    std::uint64_t ev_seed = 0;
    int ev_epochs = 40, ev_batch = 128, ev_folds = 5, ev_nseeds = 3;
    double ev_lr = 3e-4;
    SplitFlags ev_split;
    ev->add_option("--protocol", ev_protocol, "linear|finetune|semi|kfold")
        ->check(CLI::IsMember({"linear", "finetune", "semi", "kfold"}));
    ev->add_option("--ckpt", ev_ckpt, "checkpoint directory")->required();
    ev->add_option("--data", ev_data, "cache directory")->required();
    ev->add_option("--out", ev_out, "report directory")->required();
    ev->add_option("--seed", ev_seed, "probe seed");
    ev->add_option("--epochs", ev_epochs, "probe training epochs");
    ev->add_option("--batch-size", ev_batch, "probe batch size");
    ev->add_option("--lr", ev_lr, "probe learning rate");
    ev->add_option("--folds", ev_folds, "k for k-fold");
    ev->add_option("--n-seeds", ev_nseeds, "seeds per semi fraction");
    ev->add_option("--fractions", ev_fractions, "semi label fractions");
    ev_split.add_to(ev);

    // ----------------------------------------------------------------- sweep
    auto* sw = app.add_subcommand("sweep", "loss hyperparameter sensitivity");
    std::string sw_data, sw_out;
    std::string sw_tau_d = "0.1,1,5,10", sw_l1 = "0.1,0.5,1,2",
                sw_l2 = "0.1,0.5,1,2";
    std::uint64_t sw_seed = 0;
    int sw_epochs = -1, sw_eval_epochs = 40;
    SplitFlags sw_split;
    sw->add_option("--data", sw_data, "cache directory")->required();
    sw->add_option("--out", sw_out, "sweep output directory")->required();
    sw->add_option("--tau-d-grid", sw_tau_d, "diverse temperatures");
    sw->add_option("--lambda1-grid", sw_l1, "contrastive weights");
    sw->add_option("--lambda2-grid", sw_l2, "diverse weights");
    sw->add_option("--seed", sw_seed, "run seed");
    sw->add_option("--epochs", sw_epochs, "pretrain epochs per point");
    sw->add_option("--eval-epochs", sw_eval_epochs, "probe epochs");
    sw_split.add_to(sw);

    // ----------------------------------------------------- export-embeddings
    auto* ex = app.add_subcommand("export-embeddings",
                                  "frozen encoder features as csv");
    std::string ex_ckpt, ex_data, ex_out;
    int ex_per_class = 1000;
    std::uint64_t ex_seed = 0;
    ex->add_option("--ckpt", ex_ckpt, "checkpoint directory")->required();
    ex->add_option("--data", ex_data, "cache directory")->required();
    ex->add_option("--out", ex_out, "output csv path")->required();
    ex->add_option("--n-per-class", ex_per_class, "epochs per class");
    ex->add_option("--seed", ex_seed, "sampling seed");

    // ------------------------------------------------------------------ plot
    auto* pl = app.add_subcommand("plot", "render a csv as an svg chart");
    std::string pl_csv, pl_out, pl_title;
    pl->add_option("--csv", pl_csv, "input csv")->required();
    pl->add_option("--out", pl_out, "output svg path")->required();
    pl->add_option("--title", pl_title, "chart title");

    std::string config_path;  // consumed by merge_config_file before parsing
    for (auto* sub : {synth, pre, ev, sw, ex, pl})
        sub->add_option("--config", config_path,
                        "TOML config file (command-line flags win)");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config_file(args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error category=usage: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error category=runtime: " << e.what() << "\n";
        return 1;
    }
    try {
        std::reverse(args.begin(), args.end());  // CLI11 consumes back-first
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (synth->parsed())
            return cmd_synth_data(sd_subjects, sd_epochs, sd_seed, sd_rate,
                                  sd_out);

        if (pre->parsed()) {
            const StrategyKind strategy = parse_strategy(pt_strategy);
            PretrainConfig cfg = pt_preset == "paper"
                                     ? PretrainConfig::paper(strategy)
                                     : PretrainConfig::desk(strategy);
            cfg.seed = pt_seed;
            cfg.use_diverse = pt_diverse;
            cfg.use_fusion = pt_fusion;
            if (pt_epochs > 0) cfg.epochs = pt_epochs;
            if (pt_batch > 0) cfg.batch_size = pt_batch;
            if (pt_lr > 0) cfg.lr = static_cast<float>(pt_lr);
            if (pt_tau > 0) cfg.tau = pt_tau;
            if (pt_tau_d > 0) cfg.tau_d = pt_tau_d;
            if (pt_l1 >= 0) cfg.lambda1 = pt_l1;
            if (pt_l2 >= 0) cfg.lambda2 = pt_l2;

            auto recs = cache_read(pt_data);
            auto split = pt_split.resolve(recs);
            auto pretext = select_subjects(recs, split.pretext);
            pretrain(pretext, cfg, pt_out);

            // record the pretext subjects so later protocols can prove
            // test-set disjointness against the encoder's training data
            std::ofstream ids(fs::path(pt_out) / "pretext_subjects.txt");
            for (const auto& id : split.pretext) ids << id << "\n";

            RunConfig rc;
            rc.values = {{"strategy", strategy_name(cfg.strategy)},
                         {"preset", pt_preset},
                         {"seed", str_of(cfg.seed)},
                         {"epochs", str_of(cfg.epochs)},
                         {"batch_size", str_of(cfg.batch_size)},
                         {"lr", str_of(cfg.lr)},
                         {"tau", str_of(cfg.tau)},
                         {"tau_d", str_of(cfg.tau_d)},
                         {"lambda1", str_of(cfg.lambda1)},
                         {"lambda2", str_of(cfg.lambda2)},
                         {"diverse", cfg.use_diverse ? "true" : "false"},
                         {"fusion", cfg.use_fusion ? "true" : "false"},
                         {"data", pt_data},
                         {"out", pt_out}};
            pt_split.record(rc);
            write_provenance(rc, pt_out);
            std::cout << "checkpoint written to " << pt_out << "\n";
            return 0;
        }

        if (ev->parsed()) {
            auto ckpt = open_checkpoint(ev_ckpt);
            auto recs = cache_read(ev_data);
            auto split = ev_split.resolve(recs);
            auto train = select_subjects(recs, split.train);
            auto test = select_subjects(recs, split.test);

            std::ifstream ids(fs::path(ev_ckpt) / "pretext_subjects.txt");
            if (ids) {
                std::vector<std::string> pretext_ids;
                std::string id;
                while (std::getline(ids, id))
                    if (!id.empty()) pretext_ids.push_back(id);
                ensure_subject_disjoint(pretext_ids, split.test,
                                        "evaluation against pretext data");
            }

            EvalConfig cfg;
            cfg.seed = ev_seed;
            cfg.epochs = ev_epochs;
            cfg.batch_size = ev_batch;
            cfg.lr = static_cast<float>(ev_lr);
            cfg.folds = ev_folds;
            cfg.n_seeds = ev_nseeds;
            cfg.fractions = parse_list(ev_fractions);

            fs::create_directories(ev_out);
            const Protocol protocol = parse_protocol(ev_protocol);
            std::ofstream report(fs::path(ev_out) / "report.json");
            if (protocol == Protocol::LINEAR) {
                report << linear_evaluate(ckpt, train, test, cfg).to_json();
            } else if (protocol == Protocol::FINETUNE) {
                report << fine_tune(ckpt, train, test, cfg).to_json();
            } else if (protocol == Protocol::SEMI) {
                auto reps = semi_supervised_curve(ckpt, cfg.fractions, train,
                                                  test, cfg);
                std::ofstream csv(fs::path(ev_out) / "semi.csv");
                csv << "fraction,accuracy,kappa,macro_f1\n";
                report << "[\n";
                for (std::size_t i = 0; i < reps.size(); ++i) {
                    csv << reps[i].fraction << "," << reps[i].mean.accuracy
                        << "," << reps[i].mean.kappa << ","
                        << reps[i].mean.macro_f1 << "\n";
                    report << reps[i].to_json()
                           << (i + 1 < reps.size() ? "," : "") << "\n";
                }
                report << "]\n";
            } else {
                auto pool = train;
                pool.insert(pool.end(), test.begin(), test.end());
                report << kfold_evaluate(ckpt, pool, cfg).to_json();
            }
            RunConfig rc;
            rc.values = {{"protocol", ev_protocol},
                         {"ckpt", ev_ckpt},
                         {"data", ev_data},
                         {"out", ev_out},
                         {"seed", str_of(cfg.seed)},
                         {"epochs", str_of(cfg.epochs)},
                         {"batch_size", str_of(cfg.batch_size)},
                         {"lr", str_of(cfg.lr)},
                         {"folds", str_of(cfg.folds)},
                         {"n_seeds", str_of(cfg.n_seeds)},
                         {"fractions", ev_fractions}};
            ev_split.record(rc);
            write_provenance(rc, ev_out);
            std::cout << "report written to " << ev_out << "\n";
            return 0;
        }

        if (sw->parsed()) {
            auto recs = cache_read(sw_data);
            auto split = sw_split.resolve(recs);
            PretrainConfig base = PretrainConfig::desk(StrategyKind::MULEEG);
            base.seed = sw_seed;
            if (sw_epochs > 0) base.epochs = sw_epochs;
            SweepSpec spec;
            spec.tau_d = parse_list(sw_tau_d);
            spec.lambda1 = parse_list(sw_l1);
            spec.lambda2 = parse_list(sw_l2);
            EvalConfig cfg;
            cfg.seed = sw_seed;
            cfg.epochs = sw_eval_epochs;
            const std::string csv = sensitivity_sweep(
                spec, base, select_subjects(recs, split.pretext),
                select_subjects(recs, split.train),
                select_subjects(recs, split.test), cfg, sw_out);
            RunConfig rc;
            rc.values = {{"data", sw_data},
                         {"out", sw_out},
                         {"seed", str_of(sw_seed)},
                         {"epochs", str_of(base.epochs)},
                         {"eval_epochs", str_of(sw_eval_epochs)},
                         {"tau_d_grid", sw_tau_d},
                         {"lambda1_grid", sw_l1},
                         {"lambda2_grid", sw_l2}};
            sw_split.record(rc);
            write_provenance(rc, sw_out);
            std::cout << "sweep table written to " << csv << "\n";
            return 0;
        }

        if (ex->parsed()) {
            auto ckpt = open_checkpoint(ex_ckpt);
            auto recs = cache_read(ex_data);
            const std::string csv = export_embeddings(ckpt, recs,
                                                      ex_per_class, ex_seed,
                                                      ex_out);
            std::cout << "embeddings written to " << csv << "\n";
            return 0;
        }

        if (pl->parsed()) {
            plot_csv(pl_csv, pl_out, pl_title);
            std::cout << "chart written to " << pl_out << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error category=usage: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "error category=internal: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error category=runtime: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
