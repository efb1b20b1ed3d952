#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dse/model.hpp"
#include "dse/risk.hpp"
#include "dse/taskgen.hpp"

namespace dse {

/// Training regimes. The first five map onto the risk estimators; oracle
/// retags every training example with its true label and runs supervised
/// training as an upper-bound reference.
enum class TrainMode { pn, naive, upu, nnpu, pnu, oracle };

TrainMode train_mode_from_string(const std::string& s);
std::string to_string(TrainMode mode);

enum class Optimizer { sgd, adam };

Optimizer optimizer_from_string(const std::string& s);
std::string to_string(Optimizer opt);

struct TrainConfig {
    TrainMode mode = TrainMode::nnpu;
    Optimizer optimizer = Optimizer::adam; // beta1 0.9, beta2 0.999, eps 1e-8
    double learning_rate = 0.001;
    int max_epochs = 100;
    int patience = 10; // consecutive epochs without validation improvement
    int batch_size = 64;
    bool proportional = true;
    /// When set and proportional batching is on, the sampling frequency
    /// already realizes the positive upweighting, so the risk keeps alpha 1
    /// and the plan's implied alpha is only recorded. When cleared,
    /// risk.alpha is applied as an explicit multiplier.
    bool alpha_auto = true;
    RiskConfig risk;
    std::uint64_t seed = 1;

    void validate() const;
};

/// One split of encoded examples grouped by PU role. truth vectors align
/// with the instance vectors; entries are +1/-1, or 0 when unknown.
struct PuSplit {
    std::vector<Instance> p, u, n;
    std::vector<int> p_truth, u_truth, n_truth;

    std::size_t size() const { return p.size() + u.size() + n.size(); }
};

struct TrainData {
    PuSplit train, valid;
    std::vector<Instance> test_x;
    std::vector<int> test_y;        // +1/-1
    double true_prior_u = -1.0;     // negative when unknown
    std::size_t vocab_size = 2;     // pad + unk only for dense-input data
};

std::string to_string(Arch arch);
Arch arch_from_string(const std::string& s);

Vocabulary build_task_vocab(const TaskBundle& bundle, std::uint64_t min_count = 1,
                            std::size_t max_size = 50000);
TrainData from_task(const TaskBundle& bundle, const Vocabulary& vocab, const ArchConfig& config);

/// Expands one spec into train/valid/test: validation draws half-sized
/// pools, test draws labeled points from the unlabeled marginal. Instances
/// use the dense input path; pair with ArchConfig{dense_dim = spec.dim}.
TrainData from_synthetic(const SyntheticPuSpec& spec);

struct EpochRecord {
    int epoch = 0; // 1-based
    double train_risk = 0.0;
    double valid_risk = 0.0;
    double valid_f1_proxy = 0.0; // F1 against PU tags (P positive, U/N negative)
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0; // index into epochs
    double best_valid_risk = 0.0;
    double plan_alpha = 1.0; // positive upweighting implied by the batch plan
    double wall_seconds = 0.0;
};

struct TrainResult {
    ModelParams params; // snapshot from the best validation epoch
    TrainHistory history;
};

TrainResult train(const TrainData& data, const ArchConfig& arch, const TrainConfig& config);

/// Mean reported risk over one deterministic pass of validation batches,
/// shaped like the training batches (proportional plan or uniform slices).
double validate(const ModelParams& params, const PuSplit& valid, const RiskConfig& risk,
                int batch_size, bool proportional);

struct TuneCell {
    ArchConfig arch;
    TrainConfig config;
};

struct TuneOutcome {
    std::size_t best_index = 0;
    std::vector<double> valid_risks; // best-epoch validation risk per cell
    TrainResult best;
};

/// Trains every cell and returns the argmin of best-epoch validation risk;
/// ties keep the earliest cell.
TuneOutcome tune(const TrainData& data, const std::vector<TuneCell>& grid);

// --- run directory ---------------------------------------------------------

/// Writes config.json, history.csv (epoch,train_risk,valid_risk), model.bin
/// and, when given, vocab.txt.
void save_run(const std::filesystem::path& dir, const TrainConfig& config, const ArchConfig& arch,
              const TrainResult& result, const Vocabulary* vocab = nullptr);

struct RunBundle {
    TrainConfig config;
    ArchConfig arch;
    ModelParams params;
    std::optional<Vocabulary> vocab;
};

RunBundle load_run(const std::filesystem::path& dir);

} // namespace dse
