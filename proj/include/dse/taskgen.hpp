#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dse/corpus.hpp"
#include "dse/index.hpp"
#include "dse/rng.hpp"

namespace dse {

/// A conjunction of label terms; a document matches when it carries all of
/// them.
struct Topic {
    std::vector<std::string> terms;

    static Topic parse(const std::string& plus_joined); // "a+b" -> {a, b}
    bool matches(const Document& doc) const;
    std::string display() const; // "a + b"
};

enum class TaskVariant { case_control, censoring };
enum class Selector { bm25, random };

std::string to_string(TaskVariant v);
std::string to_string(Selector s);
TaskVariant task_variant_from_string(const std::string& s);
Selector selector_from_string(const std::string& s);

/// Optional predicate applied when sampling known negatives; max_chars keeps
/// only documents whose raw abstract is shorter than the threshold, modeling
/// a collection bias in the negative pool.
struct BiasSpec {
    enum class Kind { none, max_chars } kind = Kind::none;
    std::size_t threshold = 0;

    static BiasSpec parse(const std::string& s); // "none" or "max-chars:N"
    std::string display() const;
};

struct SplitParts {
    std::vector<std::string> train;
    std::vector<std::string> valid;
    std::vector<std::string> leftover; // at most one id under the default fraction
};

/// Shuffles the pool and carves out the validation share. With the default
/// fraction of 1/3 the sizes satisfy |valid| == floor(|train| / 2) exactly;
/// at most one element is set aside to keep that relation and is returned in
/// leftover. Either part ending up empty is an error.
SplitParts split_pool(std::vector<std::string> pool, Rng& rng, double valid_fraction = 1.0 / 3.0);

struct TaskMeta {
    std::vector<std::string> topic_terms;
    TaskVariant variant = TaskVariant::case_control;
    Selector selector = Selector::bm25;
    std::uint64_t seed = 0;
    BiasSpec bias;
    std::size_t corpus_docs = 0;
    std::size_t topic_positives = 0; // in the whole corpus
    double u_precision_pct = 0.0;    // % of train+valid unlabeled docs that are positive
    double u_recall_pct = 0.0;       // % of non-LP positives captured in train+valid unlabeled
    double true_prior_u = 0.0;       // u_precision_pct / 100
    bool oracle_labels = true;       // train/valid records carry true labels
    std::vector<ScoredDoc> ranking;  // retrieval order behind the unlabeled pool (bm25 only)
};

/// A generated expansion task. All members are document ids; texts live in
/// the corpus and are copied out only when the task is saved.
struct DseTask {
    std::vector<std::string> lp_train, lp_valid;
    std::vector<std::string> u_train, u_valid;
    std::vector<std::string> n_train, n_valid;
    std::vector<std::pair<std::string, int>> test; // (id, 0/1 truth)
    TaskMeta meta;
};

struct GenParams {
    int n_plus = 50;        // labeled positives in the training split
    std::size_t u_size = 20000; // retrieval depth for the unlabeled pool
    Selector selector = Selector::bm25;
    std::uint64_t seed = 0;
    int n_minus = 0;        // labeled negatives in the training split (0 = none)
    BiasSpec bias;
    MltParams mlt;
};

/// Case-control construction: LP is a random draw of topic positives, the
/// unlabeled pool is retrieved fresh from the corpus (excluding LP), so U
/// follows the retrieval distribution rather than containing all positives.
/// Half of the pool is reserved as the truth-labeled test split; the rest is
/// split 2:1 into train/valid.
DseTask generate_case_control(const Corpus& corpus, const Topic& topic, const GenParams& params,
                              const InvertedIndex* index);

/// Censoring construction: the unlabeled pool is [all positives except LP;
/// retrieved negatives], so every unlabeled positive is guaranteed present
/// and labels are censored rather than re-sampled.
DseTask generate_censoring(const Corpus& corpus, const Topic& topic, const GenParams& params,
                           const InvertedIndex& index);

/// Uniform sample of topic negatives passing the bias predicate, excluding
/// the given ids. Errors when fewer than n qualify.
std::vector<std::string> sample_biased_negatives(const Corpus& corpus, const Topic& topic,
                                                 std::size_t n, const BiasSpec& bias, Rng& rng,
                                                 const std::unordered_set<std::string>& exclude);

struct TaskStats {
    std::size_t u_size = 0;
    std::size_t u_positives = 0;
    double precision_pct = 0.0;
    double recall_pct = 0.0;
};

/// Positive share of the task's train+valid unlabeled pool, as percentages.
TaskStats task_stats(const DseTask& task, const Corpus& corpus);

/// Sanity checks: disjoint splits, LP purity, size relations. Throws
/// DataError describing the first violation.
void verify_task(const DseTask& task, const Corpus& corpus);

// --- persistence ---------------------------------------------------------

struct TaskRecord {
    std::string id;
    std::string title;
    std::string abstract;
    char pu = 'U';  // 'P', 'U' or 'N'
    int truth = -1; // 0/1, -1 when withheld
};

struct TaskBundle {
    TaskMeta meta;
    std::vector<TaskRecord> train, valid, test;
};

/// Writes train/valid/test.jsonl plus meta.json into dir (created if needed).
void save_task(const DseTask& task, const Corpus& corpus, const std::filesystem::path& dir);
TaskBundle load_task(const std::filesystem::path& dir);

// --- synthetic vector data ------------------------------------------------

/// Two-Gaussian generator for estimator and trainer studies. Covariances are
/// full matrices (row-major d*d) and must be positive definite.
struct SyntheticPuSpec {
    double prior = 0.5; // P(y = +1) in the unlabeled marginal
    int dim = 5;
    std::vector<double> mean_pos, mean_neg; // size dim
    std::vector<double> cov_pos, cov_neg;   // row-major dim*dim
    std::size_t n_p = 100;
    std::size_t n_u = 1000;
    std::size_t n_n = 0;
    std::uint64_t seed = 0;

    static SyntheticPuSpec isotropic(double prior, int dim, double separation, double sigma = 1.0);
};

struct SyntheticSample {
    std::vector<double> x;
    int label = 0; // +1 / -1, known for every sample including unlabeled ones
};

struct SyntheticPuSet {
    std::vector<SyntheticSample> p, u, n;
};

SyntheticPuSet generate_synthetic(const SyntheticPuSpec& spec);

} // namespace dse
