#include "dse/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>

#include "dse/error.hpp"
#include "dse/sampler.hpp"
#include "json.hpp"

namespace dse {

using nlohmann::json;

namespace {
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;
constexpr std::uint64_t kValidationSeed = 0x76616c6964617465ULL;
} // namespace

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "pn") return TrainMode::pn;
    if (s == "naive") return TrainMode::naive;
    if (s == "upu") return TrainMode::upu;
    if (s == "nnpu") return TrainMode::nnpu;
    if (s == "pnu") return TrainMode::pnu;
    if (s == "oracle") return TrainMode::oracle;
    throw ConfigError("unknown training mode: " + s);
}

std::string to_string(TrainMode mode) {
    switch (mode) {
    case TrainMode::pn: return "pn";
    case TrainMode::naive: return "naive";
    case TrainMode::upu: return "upu";
    case TrainMode::nnpu: return "nnpu";
    case TrainMode::pnu: return "pnu";
    case TrainMode::oracle: return "oracle";
    }
    return "?";
}

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw ConfigError("unknown optimizer: " + s);
}

std::string to_string(Optimizer opt) { return opt == Optimizer::sgd ? "sgd" : "adam"; }

std::string to_string(Arch arch) { return arch == Arch::linear_bow ? "linear" : "conv"; }

Arch arch_from_string(const std::string& s) {
    if (s == "linear") return Arch::linear_bow;
    if (s == "conv") return Arch::conv;
    throw ConfigError("unknown architecture: " + s + " (expected linear or conv)");
}

void TrainConfig::validate() const {
    // learning_rate 0 is legal: it trains nothing but exercises the loop.
    if (learning_rate < 0.0) throw ConfigError("learning_rate must be non-negative");
    if (!std::isfinite(learning_rate)) throw ConfigError("learning_rate must be finite");
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (patience < 0 || patience > max_epochs)
        throw ConfigError("patience must lie in [0, max_epochs]");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    risk.validate();
}

Vocabulary build_task_vocab(const TaskBundle& bundle, std::uint64_t min_count,
                            std::size_t max_size) {
    std::vector<Document> docs;
    docs.reserve(bundle.train.size());
    for (const auto& r : bundle.train) {
        Document d;
        d.title_tokens = tokenize(r.title);
        d.abstract_tokens = tokenize(r.abstract);
        docs.push_back(std::move(d));
    }
    std::vector<const Document*> ptrs;
    ptrs.reserve(docs.size());
    for (const auto& d : docs) ptrs.push_back(&d);
    return build_vocab(ptrs, min_count, max_size);
}

namespace {

int truth_sign(int record_truth) {
    if (record_truth == 1) return +1;
    if (record_truth == 0) return -1;
    return 0;
}

Instance encode_record(const TaskRecord& r, const Vocabulary& vocab, const ArchConfig& config) {
    Document d;
    d.title_tokens = tokenize(r.title);
    d.abstract_tokens = tokenize(r.abstract);
    return encode(d, vocab, config);
}

PuSplit split_from_records(const std::vector<TaskRecord>& records, const Vocabulary& vocab,
                           const ArchConfig& config) {
    PuSplit out;
    for (const auto& r : records) {
        Instance inst = encode_record(r, vocab, config);
        switch (r.pu) {
        case 'P':
            out.p.push_back(std::move(inst));
            out.p_truth.push_back(truth_sign(r.truth));
            break;
        case 'N':
            out.n.push_back(std::move(inst));
            out.n_truth.push_back(truth_sign(r.truth));
            break;
        default:
            out.u.push_back(std::move(inst));
            out.u_truth.push_back(truth_sign(r.truth));
            break;
        }
    }
    return out;
}

} // namespace

TrainData from_task(const TaskBundle& bundle, const Vocabulary& vocab, const ArchConfig& config) {
    TrainData data;
    data.train = split_from_records(bundle.train, vocab, config);
    data.valid = split_from_records(bundle.valid, vocab, config);
    data.test_x.reserve(bundle.test.size());
    data.test_y.reserve(bundle.test.size());
    for (const auto& r : bundle.test) {
        data.test_x.push_back(encode_record(r, vocab, config));
        data.test_y.push_back(r.truth == 1 ? +1 : -1);
    }
    if (bundle.meta.oracle_labels) data.true_prior_u = bundle.meta.true_prior_u;
    data.vocab_size = vocab.size();
    return data;
}

namespace {

PuSplit split_from_synthetic(const SyntheticPuSet& set) {
    PuSplit out;
    for (const auto& s : set.p) {
        out.p.push_back(dense_instance(s.x));
        out.p_truth.push_back(+1);
    }
    for (const auto& s : set.u) {
        out.u.push_back(dense_instance(s.x));
        out.u_truth.push_back(s.label);
    }
    for (const auto& s : set.n) {
        out.n.push_back(dense_instance(s.x));
        out.n_truth.push_back(-1);
    }
    return out;
}

} // namespace

TrainData from_synthetic(const SyntheticPuSpec& spec) {
    TrainData data;
    data.train = split_from_synthetic(generate_synthetic(spec));

    SyntheticPuSpec vspec = spec;
    vspec.n_p = spec.n_p > 0 ? std::max<std::size_t>(1, spec.n_p / 2) : 0;
    vspec.n_u = spec.n_u > 0 ? std::max<std::size_t>(1, spec.n_u / 2) : 0;
    vspec.n_n = spec.n_n > 0 ? std::max<std::size_t>(1, spec.n_n / 2) : 0;
    vspec.seed = mix_seed(spec.seed, 101);
    data.valid = split_from_synthetic(generate_synthetic(vspec));

    SyntheticPuSpec tspec = spec;
    tspec.n_p = 0;
    tspec.n_n = 0;
    tspec.n_u = std::max<std::size_t>(spec.n_u, 1000);
    tspec.seed = mix_seed(spec.seed, 102);
    SyntheticPuSet test = generate_synthetic(tspec);
    for (const auto& s : test.u) {
        data.test_x.push_back(dense_instance(s.x));
        data.test_y.push_back(s.label);
    }

    data.true_prior_u = spec.prior;
    data.vocab_size = 2;
    return data;
}

namespace {

/// Pools and estimator actually optimized, after the training mode has been
/// applied (class selection; oracle retagging by true label).
struct EffectiveProblem {
    PuSplit train, valid;
    RiskConfig risk;
};

void retag_by_truth(const PuSplit& in, PuSplit& out, const char* split_name) {
    auto push = [&](const std::vector<Instance>& xs, const std::vector<int>& truth) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (truth[i] == 0)
                throw ConfigError(std::string("oracle mode needs true labels on the ") + split_name +
                                  " split");
            if (truth[i] > 0) {
                out.p.push_back(xs[i]);
                out.p_truth.push_back(+1);
            } else {
                out.n.push_back(xs[i]);
                out.n_truth.push_back(-1);
            }
        }
    };
    push(in.p, in.p_truth);
    push(in.u, in.u_truth);
    push(in.n, in.n_truth);
}

EffectiveProblem make_effective(const TrainData& data, const TrainConfig& config) {
    EffectiveProblem eff;
    eff.risk = config.risk;
    switch (config.mode) {
    case TrainMode::pn:
        eff.risk.mode = RiskMode::pn;
        eff.train.p = data.train.p;
        eff.train.n = data.train.n;
        eff.valid.p = data.valid.p;
        eff.valid.n = data.valid.n;
        break;
    case TrainMode::naive:
        eff.risk.mode = RiskMode::naive;
        eff.train.p = data.train.p;
        eff.train.u = data.train.u;
        eff.valid.p = data.valid.p;
        eff.valid.u = data.valid.u;
        break;
    case TrainMode::upu:
    case TrainMode::nnpu:
        eff.risk.mode = config.mode == TrainMode::upu ? RiskMode::upu : RiskMode::nnpu;
        eff.train.p = data.train.p;
        eff.train.u = data.train.u;
        eff.valid.p = data.valid.p;
        eff.valid.u = data.valid.u;
        break;
    case TrainMode::pnu:
        eff.risk.mode = RiskMode::pnu;
        eff.train = data.train;
        eff.valid = data.valid;
        break;
    case TrainMode::oracle: {
        eff.risk.mode = RiskMode::pn;
        retag_by_truth(data.train, eff.train, "train");
        retag_by_truth(data.valid, eff.valid, "valid");
        std::size_t total = eff.train.p.size() + eff.train.n.size();
        if (total == 0) throw ConfigError("oracle mode found no training examples");
        eff.risk.prior = static_cast<double>(eff.train.p.size()) / static_cast<double>(total);
        break;
    }
    }
    auto need = [&](const std::vector<Instance>& pool, const char* what) {
        if (pool.empty())
            throw ConfigError("mode " + to_string(config.mode) + " needs " + what + " examples");
    };
    need(eff.train.p, "positive");
    if (config.mode == TrainMode::pn || config.mode == TrainMode::oracle ||
        config.mode == TrainMode::pnu)
        need(eff.train.n, "negative");
    if (config.mode != TrainMode::pn && config.mode != TrainMode::oracle)
        need(eff.train.u, "unlabeled");
    if (eff.valid.size() == 0) throw ConfigError("validation split is empty");
    if (eff.valid.p.empty()) throw ConfigError("validation split has no positives");
    return eff;
}

struct BatchEval {
    RiskOutput out;
};

RiskOutput eval_batch(const ModelParams& params, const PuSplit& pool, const Batch& batch,
                      const RiskConfig& risk, bool allow_empty) {
    std::vector<double> sp, su, sn;
    sp.reserve(batch.p.size());
    su.reserve(batch.u.size());
    sn.reserve(batch.n.size());
    for (auto i : batch.p) sp.push_back(forward(params, pool.p[i]));
    for (auto i : batch.u) su.push_back(forward(params, pool.u[i]));
    for (auto i : batch.n) sn.push_back(forward(params, pool.n[i]));
    return evaluate_risk(risk, sp, su, sn, Loss::sigmoid, allow_empty);
}

void accumulate_batch_gradient(const ModelParams& params, const PuSplit& pool, const Batch& batch,
                               const RiskOutput& out, std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < batch.p.size(); ++i)
        accumulate_gradient(params, pool.p[batch.p[i]], out.coeff_p[i], grad);
    for (std::size_t i = 0; i < batch.u.size(); ++i)
        accumulate_gradient(params, pool.u[batch.u[i]], out.coeff_u[i], grad);
    for (std::size_t i = 0; i < batch.n.size(); ++i)
        accumulate_gradient(params, pool.n[batch.n[i]], out.coeff_n[i], grad);
}

class AdamState {
public:
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t_;
        double bc1 = 1.0 - std::pow(b1, t_);
        double bc2 = 1.0 - std::pow(b2, t_);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
            theta[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps);
        }
    }

private:
    std::vector<double> m_, v_;
    int t_ = 0;
};

double f1_proxy(const ModelParams& params, const PuSplit& split) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& x : split.p) {
        if (predict(params, x) > 0)
            ++tp;
        else
            ++fn;
    }
    for (const auto& x : split.u)
        if (predict(params, x) > 0) ++fp;
    for (const auto& x : split.n)
        if (predict(params, x) > 0) ++fp;
    double denom = static_cast<double>(2 * tp + fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

void check_finite_params(const ModelParams& params, int epoch) {
    for (double v : params.values)
        if (!std::isfinite(v))
            throw NumericError("non-finite parameter after epoch " + std::to_string(epoch));
}

double validate_impl(const ModelParams& params, const PuSplit& valid, const RiskConfig& risk,
                     int batch_size, bool proportional) {
    if (valid.size() == 0) throw DataError("validation split is empty");
    int vb = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                                    valid.size()));
    std::vector<Batch> batches;
    if (proportional) {
        BatchPlan plan = make_plan(valid.p.size(), valid.u.size(), valid.n.size(), vb);
        batches = epoch_batches(valid.p.size(), valid.u.size(), valid.n.size(), plan,
                                kValidationSeed);
    } else {
        batches = uniform_batches(valid.p.size(), valid.u.size(), valid.n.size(), vb,
                                  kValidationSeed);
    }
    double sum = 0.0;
    for (const auto& b : batches) {
        RiskOutput out = eval_batch(params, valid, b, risk, !proportional);
        if (!std::isfinite(out.reported_risk)) throw NumericError("non-finite validation risk");
        sum += out.reported_risk;
    }
    return sum / static_cast<double>(batches.size());
}

} // namespace

double validate(const ModelParams& params, const PuSplit& valid, const RiskConfig& risk,
                int batch_size, bool proportional) {
    return validate_impl(params, valid, risk, batch_size, proportional);
}

TrainResult train(const TrainData& data, const ArchConfig& arch, const TrainConfig& config) {
    config.validate();
    arch.validate();
    auto t0 = std::chrono::steady_clock::now();

    EffectiveProblem eff = make_effective(data, config);

    double plan_alpha = 1.0;
    // A batch larger than the split degenerates to full-batch updates, the
    // same clamp validation applies.
    int train_batch = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), eff.train.size()));

    std::unique_ptr<ProportionalStream> prop;
    std::unique_ptr<UniformStream> uni;
    if (config.proportional) {
        BatchPlan plan =
            make_plan(eff.train.p.size(), eff.train.u.size(), eff.train.n.size(), train_batch);
        plan_alpha = plan.alpha;
        if (config.alpha_auto) {
            // The plan realizes the positive upweighting through sampling
            // frequency, so the risk itself stays unweighted.
            eff.risk.alpha = 1.0;
        }
        prop = std::make_unique<ProportionalStream>(eff.train.p.size(), eff.train.u.size(),
                                                    eff.train.n.size(), plan,
                                                    mix_seed(config.seed, kBatchStream));
    } else {
        uni = std::make_unique<UniformStream>(eff.train.p.size(), eff.train.u.size(),
                                              eff.train.n.size(), train_batch,
                                              mix_seed(config.seed, kBatchStream));
    }

    ModelParams params = init_model(arch, data.vocab_size, mix_seed(config.seed, kInitStream));
    std::vector<double> grad(params.parameter_count(), 0.0);
    AdamState adam(params.parameter_count());

    TrainResult result;
    result.history.plan_alpha = plan_alpha;
    ModelParams best = params;
    double best_valid = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    int stall = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::vector<Batch> batches = prop ? prop->next_epoch() : uni->next_epoch();
        double risk_sum = 0.0;
        int batch_no = 0;
        for (const auto& b : batches) {
            ++batch_no;
            RiskOutput out = eval_batch(params, eff.train, b, eff.risk, !config.proportional);
            if (!std::isfinite(out.reported_risk) || !std::isfinite(out.grad_objective))
                throw NumericError("non-finite training risk at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_no));
            risk_sum += out.reported_risk;
            accumulate_batch_gradient(params, eff.train, b, out, grad);
            if (config.optimizer == Optimizer::adam) {
                adam.step(params.values, grad, config.learning_rate);
            } else {
                for (std::size_t i = 0; i < params.values.size(); ++i)
                    params.values[i] -= config.learning_rate * grad[i];
            }
        }
        check_finite_params(params, epoch);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_risk = risk_sum / static_cast<double>(batches.size());
        rec.valid_risk =
            validate_impl(params, eff.valid, eff.risk, config.batch_size, config.proportional);
        rec.valid_f1_proxy = f1_proxy(params, eff.valid);
        result.history.epochs.push_back(rec);

        if (rec.valid_risk < best_valid) {
            best_valid = rec.valid_risk;
            best = params;
            best_idx = result.history.epochs.size() - 1;
            stall = 0;
        } else {
            ++stall;
            if (stall >= std::max(config.patience, 1)) break;
        }
    }

    result.params = std::move(best);
    result.history.best_epoch = best_idx;
    result.history.best_valid_risk = best_valid;
    result.history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

TuneOutcome tune(const TrainData& data, const std::vector<TuneCell>& grid) {
    if (grid.empty()) throw ConfigError("tuning grid is empty");
    TuneOutcome outcome;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        TrainResult r = train(data, grid[i].arch, grid[i].config);
        double v = r.history.best_valid_risk;
        outcome.valid_risks.push_back(v);
        if (v < best) {
            best = v;
            outcome.best_index = i;
            outcome.best = std::move(r);
        }
    }
    return outcome;
}

namespace {

json arch_to_json(const ArchConfig& arch) {
    json j;
    j["arch"] = to_string(arch.arch);
    j["embedding_dim"] = arch.embedding_dim;
    j["title_filters"] = arch.title_filters;
    j["abstract_filters"] = arch.abstract_filters;
    j["windows"] = arch.windows;
    j["max_abstract_tokens"] = arch.max_abstract_tokens;
    j["dense_dim"] = arch.dense_dim;
    return j;
}

ArchConfig arch_from_json(const json& j) {
    ArchConfig arch;
    arch.arch = arch_from_string(j.at("arch").get<std::string>());
    arch.embedding_dim = j.at("embedding_dim").get<int>();
    arch.title_filters = j.at("title_filters").get<int>();
    arch.abstract_filters = j.at("abstract_filters").get<int>();
    arch.windows = j.at("windows").get<std::vector<int>>();
    arch.max_abstract_tokens = j.at("max_abstract_tokens").get<int>();
    arch.dense_dim = j.at("dense_dim").get<int>();
    return arch;
}

json risk_to_json(const RiskConfig& risk) {
    json j;
    j["mode"] = to_string(risk.mode);
    j["prior"] = risk.prior;
    j["alpha"] = risk.alpha;
    j["nn_beta"] = risk.nn_beta;
    j["nn_gamma"] = risk.nn_gamma;
    j["pnu_gamma"] = risk.pnu_gamma;
    j["pnu_nn"] = risk.pnu_nn;
    return j;
}

RiskConfig risk_from_json(const json& j) {
    RiskConfig risk;
    risk.mode = risk_mode_from_string(j.at("mode").get<std::string>());
    risk.prior = j.at("prior").get<double>();
    risk.alpha = j.at("alpha").get<double>();
    risk.nn_beta = j.at("nn_beta").get<double>();
    risk.nn_gamma = j.at("nn_gamma").get<double>();
    risk.pnu_gamma = j.at("pnu_gamma").get<double>();
    risk.pnu_nn = j.at("pnu_nn").get<bool>();
    return risk;
}

} // namespace

void save_run(const std::filesystem::path& dir, const TrainConfig& config, const ArchConfig& arch,
              const TrainResult& result, const Vocabulary* vocab) {
    std::filesystem::create_directories(dir);

    json j;
    j["mode"] = to_string(config.mode);
    j["optimizer"] = to_string(config.optimizer);
    j["learning_rate"] = config.learning_rate;
    j["max_epochs"] = config.max_epochs;
    j["patience"] = config.patience;
    j["batch_size"] = config.batch_size;
    j["proportional"] = config.proportional;
    j["alpha_auto"] = config.alpha_auto;
    j["plan_alpha"] = result.history.plan_alpha;
    j["seed"] = config.seed;
    j["risk"] = risk_to_json(config.risk);
    j["model"] = arch_to_json(arch);
    std::ofstream cfg(dir / "config.json", std::ios::binary);
    if (!cfg) throw DataError("cannot write " + (dir / "config.json").string());
    cfg << j.dump(2) << '\n';

    std::ofstream hist(dir / "history.csv", std::ios::binary);
    if (!hist) throw DataError("cannot write " + (dir / "history.csv").string());
    hist << "epoch,train_risk,valid_risk\n";
    char buf[64];
    for (const auto& rec : result.history.epochs) {
        hist << rec.epoch << ',';
        std::snprintf(buf, sizeof buf, "%.17g", rec.train_risk);
        hist << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", rec.valid_risk);
        hist << buf << '\n';
    }

    save_model(result.params, dir / "model.bin");
    if (vocab != nullptr) save_vocab(*vocab, dir / "vocab.txt");
}

RunBundle load_run(const std::filesystem::path& dir) {
    std::ifstream in(dir / "config.json");
    if (!in) throw DataError("cannot open " + (dir / "config.json").string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("invalid JSON in " + (dir / "config.json").string());

    RunBundle bundle;
    try {
        bundle.config.mode = train_mode_from_string(j.at("mode").get<std::string>());
        bundle.config.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
        bundle.config.learning_rate = j.at("learning_rate").get<double>();
        bundle.config.max_epochs = j.at("max_epochs").get<int>();
        bundle.config.patience = j.at("patience").get<int>();
        bundle.config.batch_size = j.at("batch_size").get<int>();
        bundle.config.proportional = j.at("proportional").get<bool>();
        bundle.config.alpha_auto = j.at("alpha_auto").get<bool>();
        bundle.config.seed = j.at("seed").get<std::uint64_t>();
        bundle.config.risk = risk_from_json(j.at("risk"));
        bundle.arch = arch_from_json(j.at("model"));
    } catch (const json::exception& e) {
        throw DataError((dir / "config.json").string() + ": " + e.what());
    }
    bundle.params = load_model(dir / "model.bin");
    if (std::filesystem::exists(dir / "vocab.txt")) bundle.vocab = load_vocab(dir / "vocab.txt");
    return bundle;
}

} // namespace dse
