#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dse/model.hpp"

namespace dse {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

/// Labels are +1/-1; lengths must match.
ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truth);

struct MetricReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double ber = 0.0; // (FP/(TN+FP) + FN/(FN+TP)) / 2, empty terms contribute 0
    double auc = 0.0; // 1.5 - 2 * ber; can exceed 1 for hard decisions
    bool auc_above_one = false;
};

/// 0/0 ratios resolve to 0 throughout.
MetricReport metrics(const ConfusionCounts& counts);

std::vector<double> score_all(const ModelParams& params, const std::vector<Instance>& xs);
std::vector<int> predict_all(const ModelParams& params, const std::vector<Instance>& xs,
                             double threshold = 0.0);

struct TopkCurve {
    std::vector<std::size_t> k;
    std::vector<double> f1;
    double mean_f1 = 0.0;
    double std_f1 = 0.0; // population std over the k range
};

/// Retrieval baseline: mark the top-k ranked documents positive for every k
/// in [k_min, min(k_max, n)]. ranked_truth holds +1/-1 in ranking order.
TopkCurve topk_ir_baseline(std::span<const int> ranked_truth, std::size_t k_min, std::size_t k_max);

/// Everything predicted positive.
MetricReport all_positive_baseline(std::span<const int> truth);

/// Weighted mean of member scores. Needs >= 2 members of equal length and
/// non-negative weights that are not all zero.
std::vector<double> ensemble_scores(const std::vector<std::vector<double>>& member_scores,
                                    std::span<const double> weights);

/// Normalized absolute F1 differences between two systems measured on the
/// same grid of labeled-set sizes: |a - b| / (a + b), with 0/0 -> 0.
std::vector<double> scaling_curve(const std::vector<std::pair<int, double>>& system,
                                  const std::vector<std::pair<int, double>>& reference);

struct ScoreHistogram {
    double lo = 0.0, hi = 0.0, width = 0.0;
    std::vector<std::size_t> positive, negative; // counts per bucket
};

/// Equal-width buckets over [min score, max score], one count vector per
/// class. All-equal scores occupy the single first bucket.
ScoreHistogram score_histogram(std::span<const double> scores, std::span<const int> truth,
                               std::size_t buckets);

// --- serialization ---------------------------------------------------------

/// Flat JSON object with counts and metrics; key order is fixed, so equal
/// inputs serialize byte-identically.
std::string metrics_json(const ConfusionCounts& counts, const MetricReport& report);

std::string topk_csv(const TopkCurve& curve);
std::string histogram_csv(const ScoreHistogram& hist);

// --- summary table ---------------------------------------------------------

struct RunSummary {
    std::string method;
    std::string topic;
    double f1 = 0.0; // in [0, 1]
};

struct ReportCell {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t runs = 0;
};

/// method-by-topic grid; rows and columns ordered by first appearance, with
/// a trailing Avg column averaging the per-topic means.
struct ReportTable {
    std::vector<std::string> methods;
    std::vector<std::string> topics;
    std::vector<std::vector<ReportCell>> cells; // [method][topic]
};

ReportTable aggregate_report(const std::vector<RunSummary>& runs);

/// Fixed-width text table; F1 shown as 100 * f1 with two decimals, plus
/// "± std" when a cell aggregates several runs.
std::string render_table(const ReportTable& table);
std::string render_csv(const ReportTable& table);

} // namespace dse
