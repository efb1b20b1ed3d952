#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dse/cluster.hpp"
#include "dse/corpus.hpp"
#include "dse/error.hpp"
#include "dse/eval.hpp"
#include "dse/index.hpp"
#include "dse/taskgen.hpp"
#include "dse/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dse::DataError("cannot write " + path.string());
    out << content;
}

// ---- config files -----------------------------------------------------------

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Reads a flat key=value file; keys mirror long flag names without the
/// leading dashes. Later duplicates win, `#` starts a comment.
std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw dse::ConfigError("cannot open config file " + file);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string text = trim(line);
        if (text.empty()) continue;
        std::size_t eq = text.find('=');
        if (eq == std::string::npos || trim(text.substr(0, eq)).empty())
            throw dse::ConfigError(file + " line " + std::to_string(line_no) +
                                   ": expected key=value");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const auto& kv) { return kv.first == key; });
        if (it != entries.end())
            it->second = value;
        else
            entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

/// Expands `--config FILE` on a subcommand into the flags the file supplies.
/// Flags already present on the command line keep their values.
void apply_config_file(const CLI::App& app, std::vector<std::string>& args) {
    const CLI::App* sub = nullptr;
    std::size_t sub_pos = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            sub = app.get_subcommand_no_throw(args[i]);
            sub_pos = i;
            break;
        }
    }
    if (sub == nullptr) return;

    std::string config_path;
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty()) return;

    auto on_command_line = [&](const std::string& flag) {
        for (std::size_t i = sub_pos + 1; i < args.size(); ++i)
            if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
        return false;
    };

    std::vector<std::string> injected;
    for (const auto& [key, value] : read_flat_config(config_path)) {
        if (key == "config") continue;
        std::string flag = "--" + key;
        const CLI::Option* op = sub->get_option_no_throw(flag);
        if (op == nullptr)
            throw dse::ConfigError(config_path + ": unknown key '" + key + "' for command '" +
                                   sub->get_name() + "'");
        if (on_command_line(flag)) continue;
        injected.push_back(flag);
        if (op->get_expected_max() > 1) {
            std::istringstream parts(value);
            std::string token;
            while (parts >> token) injected.push_back(token);
        } else {
            injected.push_back(value);
        }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(),
                injected.end());
}

// ---- index ----------------------------------------------------------------

struct IndexOpts {
    std::string corpus, out, config;
};

void run_index(const IndexOpts& o) {
    dse::Corpus corpus = dse::ingest_jsonl(o.corpus);
    dse::InvertedIndex index = dse::build_index(corpus);
    dse::save_index(index, o.out);
    std::cout << "indexed " << corpus.size() << " documents -> " << o.out << "\n";
}

// ---- generate ---------------------------------------------------------------

struct GenerateOpts {
    std::string corpus, index, topic, out, config;
    int n_plus = 50;
    std::size_t u_size = 20000;
    std::string variant = "case-control";
    std::string selector = "bm25";
    std::string bias = "none";
    int n_minus = 0;
    std::uint64_t seed = 1;
};

void run_generate(const GenerateOpts& o) {
    dse::Corpus corpus = dse::ingest_jsonl(o.corpus);
    dse::Topic topic = dse::Topic::parse(o.topic);

    dse::GenParams params;
    params.n_plus = o.n_plus;
    params.u_size = o.u_size;
    params.selector = dse::selector_from_string(o.selector);
    params.seed = o.seed;
    params.n_minus = o.n_minus;
    params.bias = dse::BiasSpec::parse(o.bias);

    dse::TaskVariant variant = dse::task_variant_from_string(o.variant);
    dse::InvertedIndex index;
    bool need_index = params.selector == dse::Selector::bm25;
    if (need_index) {
        if (o.index.empty())
            throw dse::ConfigError("--index is required with the bm25 selector");
        index = dse::load_index(o.index);
    }

    dse::DseTask task = variant == dse::TaskVariant::case_control
                            ? dse::generate_case_control(corpus, topic, params,
                                                         need_index ? &index : nullptr)
                            : dse::generate_censoring(corpus, topic, params, index);
    dse::verify_task(task, corpus);
    dse::save_task(task, corpus, o.out);

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", task.meta.u_precision_pct);
    std::cout << "task [" << topic.display() << "] -> " << o.out << "\n"
              << "  unlabeled pool precision " << buf << "%";
    std::snprintf(buf, sizeof buf, "%.2f", task.meta.u_recall_pct);
    std::cout << ", recall " << buf << "%\n"
              << "  splits: " << task.lp_train.size() << " P / " << task.u_train.size()
              << " U / " << task.n_train.size() << " N train, " << task.test.size()
              << " test\n";
}

// ---- train ------------------------------------------------------------------

struct TrainOpts {
    std::string task, out, config;
    std::string mode = "nnpu";
    std::string prior = "ber";
    int batch_size = 64;
    bool proportional = true;
    std::string alpha = "auto";
    double pnu_gamma = 0.5;
    double nn_beta = 0.0;
    double nn_gamma = 1.0;
    std::string arch = "linear";
    double lr = 0.001;
    std::uint64_t seed = 1;
};

double parse_prior(const std::string& prior, const dse::TrainData& data) {
    if (prior == "ber") return 0.5;
    if (prior == "true") {
        if (data.true_prior_u < 0.0)
            throw dse::ConfigError("--prior true needs task metadata with a known true prior");
        return data.true_prior_u;
    }
    try {
        std::size_t used = 0;
        double v = std::stod(prior, &used);
        if (used != prior.size()) throw std::invalid_argument(prior);
        return v;
    } catch (const std::exception&) {
        throw dse::ConfigError("--prior must be ber, true or a number, got " + prior);
    }
}

void run_train(const TrainOpts& o) {
    dse::TaskBundle bundle = dse::load_task(o.task);
    dse::ArchConfig arch;
    arch.arch = dse::arch_from_string(o.arch);
    dse::Vocabulary vocab = dse::build_task_vocab(bundle);
    dse::TrainData data = dse::from_task(bundle, vocab, arch);

    dse::TrainConfig config;
    config.mode = dse::train_mode_from_string(o.mode);
    config.learning_rate = o.lr;
    config.batch_size = o.batch_size;
    config.proportional = o.proportional;
    config.seed = o.seed;
    config.risk.prior = parse_prior(o.prior, data);
    config.risk.nn_beta = o.nn_beta;
    config.risk.nn_gamma = o.nn_gamma;
    config.risk.pnu_gamma = o.pnu_gamma;
    if (o.alpha == "auto") {
        config.alpha_auto = true;
    } else {
        config.alpha_auto = false;
        try {
            std::size_t used = 0;
            config.risk.alpha = std::stod(o.alpha, &used);
            if (used != o.alpha.size()) throw std::invalid_argument(o.alpha);
        } catch (const std::exception&) {
            throw dse::ConfigError("--alpha must be auto or a number, got " + o.alpha);
        }
    }

    dse::TrainResult result = dse::train(data, arch, config);
    dse::save_run(o.out, config, arch, result, &vocab);

    const auto& h = result.history;
    std::cout << "trained " << o.mode << " for " << h.epochs.size() << " epochs (best epoch "
              << h.epochs[h.best_epoch].epoch << ", validation risk ";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", h.best_valid_risk);
    std::cout << buf << ") -> " << o.out << "\n";
}

// ---- eval -------------------------------------------------------------------

struct EvalOpts {
    std::vector<std::string> runs;
    std::string task;
    std::string baseline; // empty, topk, all-positive, copkmeans, ensemble
    std::string config;
};

std::string method_name(const dse::TrainConfig& config, const dse::TaskMeta& meta) {
    if (config.mode == dse::TrainMode::oracle) return "oracle";
    std::string prefix = meta.selector == dse::Selector::bm25 ? "bm25+" : "rand+";
    return prefix + dse::to_string(config.mode);
}

void write_summary(const fs::path& dir, const std::string& method, const std::string& topic,
                   double f1) {
    json j;
    j["f1"] = f1;
    j["method"] = method;
    j["topic"] = topic;
    write_file(dir / "summary.json", j.dump(2) + "\n");
}

/// Test-split documents of the ranking, in rank order, as +1/-1 truths.
std::vector<int> ranked_test_truth(const dse::TaskBundle& bundle) {
    std::unordered_map<std::string, int> truth;
    for (const auto& r : bundle.test) truth[r.id] = r.truth == 1 ? +1 : -1;
    std::vector<int> ranked;
    for (const auto& sd : bundle.meta.ranking) {
        auto it = truth.find(sd.id);
        if (it != truth.end()) ranked.push_back(it->second);
    }
    if (ranked.empty())
        throw dse::DataError("task has no ranking over test documents (random-selector tasks "
                             "have no retrieval order)");
    return ranked;
}

void eval_model(const fs::path& run_dir, const dse::RunBundle& run, const dse::TaskBundle& bundle,
                const dse::TrainData& data) {
    std::vector<double> scores = dse::score_all(run.params, data.test_x);
    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] > 0.0 ? +1 : -1;
    dse::ConfusionCounts counts = dse::confusion(preds, data.test_y);
    dse::MetricReport report = dse::metrics(counts);
    write_file(run_dir / "metrics.json", dse::metrics_json(counts, report));

    std::string scores_csv = "id,score,truth\n";
    char buf[64];
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
        scores_csv += bundle.test[i].id;
        scores_csv += ',';
        scores_csv += buf;
        scores_csv += ',';
        scores_csv += std::to_string(data.test_y[i]);
        scores_csv += '\n';
    }
    write_file(run_dir / "scores.csv", scores_csv);
    write_file(run_dir / "score_histogram.csv",
               dse::histogram_csv(dse::score_histogram(scores, data.test_y, 20)));
    write_summary(run_dir, method_name(run.config, bundle.meta),
                  dse::Topic{bundle.meta.topic_terms}.display(), report.f1);

    std::snprintf(buf, sizeof buf, "%.4f", report.f1);
    std::cout << "test F1 " << buf;
    std::snprintf(buf, sizeof buf, "%.4f", report.ber);
    std::cout << ", BER " << buf << " -> " << (run_dir / "metrics.json").string() << "\n";
}

void eval_topk(const fs::path& run_dir, const dse::TaskBundle& bundle) {
    std::vector<int> ranked = ranked_test_truth(bundle);
    std::size_t lp = 0;
    for (const auto& r : bundle.train)
        if (r.pu == 'P') ++lp;
    for (const auto& r : bundle.valid)
        if (r.pu == 'P') ++lp;
    std::size_t k_min = std::max<std::size_t>(1, lp);
    dse::TopkCurve curve = dse::topk_ir_baseline(ranked, k_min, 5000);
    write_file(run_dir / "topk.csv", dse::topk_csv(curve));
    json j;
    j["k_max"] = curve.k.back();
    j["k_min"] = curve.k.front();
    j["mean_f1"] = curve.mean_f1;
    j["std_f1"] = curve.std_f1;
    write_file(run_dir / "topk.json", j.dump(2) + "\n");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", curve.mean_f1);
    std::cout << "top-k baseline mean F1 " << buf;
    std::snprintf(buf, sizeof buf, "%.4f", curve.std_f1);
    std::cout << " (std " << buf << ") over k in [" << curve.k.front() << ", " << curve.k.back()
              << "]\n";
}

void eval_all_positive(const fs::path& run_dir, const dse::TrainData& data) {
    dse::MetricReport report = dse::all_positive_baseline(data.test_y);
    std::vector<int> preds(data.test_y.size(), 1);
    dse::ConfusionCounts counts = dse::confusion(preds, data.test_y);
    write_file(run_dir / "all_positive.json", dse::metrics_json(counts, report));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", report.f1);
    std::cout << "all-positive baseline F1 " << buf << "\n";
}

void eval_copkmeans(const fs::path& run_dir, const dse::TaskBundle& bundle) {
    // Cluster the labeled positives together with the truth-labeled test pool;
    // the cluster capturing the positives is predicted positive.
    std::vector<dse::Document> docs;
    std::vector<std::size_t> lp_indices;
    std::vector<int> truth;
    auto add = [&](const dse::TaskRecord& r, bool is_lp) {
        dse::Document d;
        d.id = r.id;
        d.title_tokens = dse::tokenize(r.title);
        d.abstract_tokens = dse::tokenize(r.abstract);
        if (is_lp) lp_indices.push_back(docs.size());
        docs.push_back(std::move(d));
    };
    for (const auto& r : bundle.train)
        if (r.pu == 'P') add(r, true);
    for (const auto& r : bundle.valid)
        if (r.pu == 'P') add(r, true);
    std::size_t test_offset = docs.size();
    for (const auto& r : bundle.test) {
        add(r, false);
        truth.push_back(r.truth == 1 ? +1 : -1);
    }

    std::vector<const dse::Document*> ptrs;
    ptrs.reserve(docs.size());
    for (const auto& d : docs) ptrs.push_back(&d);
    dse::Vocabulary vocab = dse::build_vocab(ptrs);
    std::vector<dse::SparseVec> points = dse::embed_tfidf(ptrs, vocab);

    dse::ConstraintSet constraints;
    for (std::size_t i = 1; i < lp_indices.size(); ++i)
        constraints.must_link.emplace_back(lp_indices[0], lp_indices[i]);
    dse::ClusterAssignment assignment = dse::cop_kmeans(points, constraints, 2, 1);
    std::vector<int> labels = dse::pu_from_clusters(assignment, lp_indices);

    std::vector<std::string> ids;
    ids.reserve(docs.size());
    for (const auto& d : docs) ids.push_back(d.id);
    write_file(run_dir / "copkmeans.tsv", dse::cluster_tsv(ids, assignment, labels));

    std::vector<int> test_preds(labels.begin() + static_cast<std::ptrdiff_t>(test_offset),
                                labels.end());
    dse::ConfusionCounts counts = dse::confusion(test_preds, truth);
    dse::MetricReport report = dse::metrics(counts);
    write_file(run_dir / "copkmeans.json", dse::metrics_json(counts, report));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", report.f1);
    std::cout << "cop-kmeans baseline F1 " << buf << "\n";
}

void eval_ensemble(const std::vector<std::string>& run_dirs, const dse::TaskBundle& bundle) {
    if (run_dirs.size() < 2)
        throw dse::ConfigError("--baseline ensemble needs at least two --run directories");
    std::vector<std::vector<double>> member_scores;
    std::vector<int> truth;
    for (const auto& dir : run_dirs) {
        dse::RunBundle run = dse::load_run(dir);
        if (!run.vocab) throw dse::DataError("run " + dir + " has no stored vocabulary");
        dse::TrainData data = dse::from_task(bundle, *run.vocab, run.arch);
        member_scores.push_back(dse::score_all(run.params, data.test_x));
        if (truth.empty()) truth = data.test_y;
    }
    std::vector<double> weights(member_scores.size(), 1.0);
    std::vector<double> combined = dse::ensemble_scores(member_scores, weights);
    std::vector<int> preds(combined.size());
    for (std::size_t i = 0; i < combined.size(); ++i) preds[i] = combined[i] > 0.0 ? +1 : -1;
    dse::ConfusionCounts counts = dse::confusion(preds, truth);
    dse::MetricReport report = dse::metrics(counts);
    write_file(fs::path(run_dirs[0]) / "ensemble.json", dse::metrics_json(counts, report));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", report.f1);
    std::cout << "ensemble of " << run_dirs.size() << " runs: F1 " << buf << "\n";
}

void run_eval(const EvalOpts& o) {
    if (o.runs.empty()) throw dse::ConfigError("--run is required");
    dse::TaskBundle bundle = dse::load_task(o.task);
    fs::path run_dir = o.runs[0];

    if (o.baseline.empty()) {
        if (o.runs.size() != 1)
            throw dse::ConfigError("model evaluation takes exactly one --run");
        dse::RunBundle run = dse::load_run(run_dir);
        if (!run.vocab) throw dse::DataError("run " + run_dir.string() + " has no stored vocabulary");
        dse::TrainData data = dse::from_task(bundle, *run.vocab, run.arch);
        eval_model(run_dir, run, bundle, data);
    } else if (o.baseline == "topk") {
        eval_topk(run_dir, bundle);
    } else if (o.baseline == "all-positive") {
        dse::RunBundle run = dse::load_run(run_dir);
        if (!run.vocab) throw dse::DataError("run " + run_dir.string() + " has no stored vocabulary");
        dse::TrainData data = dse::from_task(bundle, *run.vocab, run.arch);
        eval_all_positive(run_dir, data);
    } else if (o.baseline == "copkmeans") {
        eval_copkmeans(run_dir, bundle);
    } else if (o.baseline == "ensemble") {
        eval_ensemble(o.runs, bundle);
    } else {
        throw dse::ConfigError("unknown baseline: " + o.baseline +
                               " (expected topk, all-positive, copkmeans or ensemble)");
    }
}

// ---- report -----------------------------------------------------------------

struct ReportOpts {
    std::vector<std::string> runs;
    std::string format = "table";
    std::string config;
};

void run_report(const ReportOpts& o) {
    if (o.runs.empty()) throw dse::ConfigError("--runs is required");
    std::vector<dse::RunSummary> summaries;
    for (const auto& dir : o.runs) {
        fs::path file = fs::path(dir) / "summary.json";
        std::ifstream in(file);
        if (!in) throw dse::DataError("missing " + file.string() + " (run `dse eval` first)");
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw dse::DataError("invalid JSON in " + file.string());
        dse::RunSummary s;
        try {
            s.method = j.at("method").get<std::string>();
            s.topic = j.at("topic").get<std::string>();
            s.f1 = j.at("f1").get<double>();
        } catch (const json::exception& e) {
            throw dse::DataError(file.string() + ": " + e.what());
        }
        summaries.push_back(std::move(s));
    }
    dse::ReportTable table = dse::aggregate_report(summaries);
    if (o.format == "table")
        std::cout << dse::render_table(table);
    else if (o.format == "csv")
        std::cout << dse::render_csv(table);
    else
        throw dse::ConfigError("unknown format: " + o.format + " (expected table or csv)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Document set expansion: retrieval-seeded PU classification"};
    app.require_subcommand(1);

    IndexOpts index_opts;
    auto* index_cmd = app.add_subcommand("index", "Build a BM25 index snapshot from a corpus");
    index_cmd->add_option("--corpus", index_opts.corpus, "Corpus JSONL file")->required();
    index_cmd->add_option("--out", index_opts.out, "Index snapshot path")->required();
    index_cmd->add_option("--config", index_opts.config, "Flat key=value file with flag defaults");
    index_cmd->callback([&] { run_index(index_opts); });

    GenerateOpts gen_opts;
    auto* gen_cmd = app.add_subcommand("generate", "Generate an expansion task from a topic");
    gen_cmd->add_option("--corpus", gen_opts.corpus, "Corpus JSONL file")->required();
    gen_cmd->add_option("--index", gen_opts.index, "Index snapshot (bm25 selector)");
    gen_cmd->add_option("--topic", gen_opts.topic, "Label conjunction, e.g. \"a+b\"")->required();
    gen_cmd->add_option("--n-plus", gen_opts.n_plus, "Labeled positives in the training split");
    gen_cmd->add_option("--u-size", gen_opts.u_size, "Unlabeled pool size");
    gen_cmd->add_option("--variant", gen_opts.variant, "case-control or censoring");
    gen_cmd->add_option("--selector", gen_opts.selector, "bm25 or random");
    gen_cmd->add_option("--bias", gen_opts.bias, "none or max-chars:N");
    gen_cmd->add_option("--n-minus", gen_opts.n_minus, "Labeled negatives (0 = none)");
    gen_cmd->add_option("--seed", gen_opts.seed, "Generation seed");
    gen_cmd->add_option("--out", gen_opts.out, "Task directory")->required();
    gen_cmd->add_option("--config", gen_opts.config, "Flat key=value file with flag defaults");
    gen_cmd->callback([&] { run_generate(gen_opts); });

    TrainOpts train_opts;
    auto* train_cmd = app.add_subcommand("train", "Train a classifier on a task");
    train_cmd->add_option("--task", train_opts.task, "Task directory")->required();
    train_cmd->add_option("--mode", train_opts.mode, "pn, naive, upu, nnpu, pnu or oracle");
    train_cmd->add_option("--prior", train_opts.prior, "ber, true or a number");
    train_cmd->add_option("--batch-size", train_opts.batch_size, "Batch size");
    train_cmd->add_option("--proportional", train_opts.proportional,
                          "Proportional per-class batching (true/false)");
    train_cmd->add_option("--alpha", train_opts.alpha,
                          "auto (from the batch plan) or an explicit multiplier");
    train_cmd->add_option("--pnu-gamma", train_opts.pnu_gamma, "PN share of the PNU blend");
    train_cmd->add_option("--nn-beta", train_opts.nn_beta, "Negative-risk floor");
    train_cmd->add_option("--nn-gamma", train_opts.nn_gamma, "Correction step scale");
    train_cmd->add_option("--arch", train_opts.arch, "linear or conv");
    train_cmd->add_option("--lr", train_opts.lr, "Learning rate");
    train_cmd->add_option("--seed", train_opts.seed, "Training seed");
    train_cmd->add_option("--out", train_opts.out, "Run directory")->required();
    train_cmd->add_option("--config", train_opts.config, "Flat key=value file with flag defaults");
    train_cmd->callback([&] { run_train(train_opts); });

    EvalOpts eval_opts;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a run or a baseline on a task");
    eval_cmd->add_option("--run", eval_opts.runs, "Run directory (repeatable for ensembles)")
        ->required();
    eval_cmd->add_option("--task", eval_opts.task, "Task directory")->required();
    eval_cmd->add_option("--baseline", eval_opts.baseline,
                         "topk, all-positive, copkmeans or ensemble");
    eval_cmd->add_option("--config", eval_opts.config, "Flat key=value file with flag defaults");
    eval_cmd->callback([&] { run_eval(eval_opts); });

    ReportOpts report_opts;
    auto* report_cmd = app.add_subcommand("report", "Aggregate run summaries into a table");
    report_cmd->add_option("--runs", report_opts.runs, "Run directories")->required();
    report_cmd->add_option("--format", report_opts.format, "table or csv");
    report_cmd->add_option("--config", report_opts.config, "Flat key=value file with flag defaults");
    report_cmd->callback([&] { run_report(report_opts); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        apply_config_file(app, args);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const dse::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dse::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const dse::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
