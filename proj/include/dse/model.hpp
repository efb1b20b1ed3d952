#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dse/corpus.hpp"

namespace dse {

/// Token ids are dense in [0, size()). Id 0 is padding, id 1 absorbs every
/// out-of-vocabulary token; real tokens start at id 2 ordered by descending
/// count (ties lexicographic).
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    Vocabulary() = default;
    Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts);

    int id_of(const std::string& token) const;
    std::vector<int> encode(const std::vector<std::string>& tokens) const;
    std::size_t size() const { return tokens_.size() + 2; } // including pad/unk

    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::string, int> ids_;
};

/// Counts title+abstract tokens over the documents, drops tokens below
/// min_count and keeps at most max_size (by count, ties lexicographic).
Vocabulary build_vocab(const std::vector<const Document*>& docs, std::uint64_t min_count = 1,
                       std::size_t max_size = 50000);

/// Token-per-line "<token>\t<count>" file; line order defines the ids.
void save_vocab(const Vocabulary& vocab, const std::filesystem::path& file);
Vocabulary load_vocab(const std::filesystem::path& file);

enum class Arch { linear_bow, conv };

struct ArchConfig {
    Arch arch = Arch::linear_bow;
    int embedding_dim = 50;
    int title_filters = 20;    // split evenly across window sizes
    int abstract_filters = 40;
    std::vector<int> windows = {3, 5};
    int max_abstract_tokens = 600; // longer abstracts are truncated, never dropped
    int dense_dim = 0;             // >0 enables the precomputed-embedding input path

    void validate() const;
};

/// Model input. Either token ids per field, or a fixed dense vector that
/// bypasses the token pathway entirely (used for precomputed embeddings and
/// synthetic vector data).
struct Instance {
    std::vector<int> title_ids;
    std::vector<int> abstract_ids;
    std::vector<double> dense;
};

Instance encode(const Document& doc, const Vocabulary& vocab, const ArchConfig& config);
Instance dense_instance(std::vector<double> values);

/// All trainable parameters in one flat array. Offsets are fixed by
/// (config, vocab_size), so gradients align element-for-element.
struct ModelParams {
    ArchConfig config;
    std::size_t vocab_size = 0;
    std::vector<double> values;

    std::size_t parameter_count() const { return values.size(); }
};

/// Uniform [-0.05, 0.05] weights, all biases zero.
ModelParams init_model(const ArchConfig& config, std::size_t vocab_size, std::uint64_t seed);

double forward(const ModelParams& params, const Instance& inst);
double forward(const ModelParams& params, const Document& doc, const Vocabulary& vocab);

/// Adds upstream * d(score)/d(theta) into grad (same length as values).
void accumulate_gradient(const ModelParams& params, const Instance& inst, double upstream,
                         std::span<double> grad);

struct ScoredGradient {
    double score = 0.0;
    std::vector<double> gradient;
};

ScoredGradient backward(const ModelParams& params, const Instance& inst, double upstream = 1.0);

/// +1 if score > threshold, else -1.
int predict(const ModelParams& params, const Instance& inst, double threshold = 0.0);
int predict(const ModelParams& params, const Document& doc, const Vocabulary& vocab,
            double threshold = 0.0);

/// Versioned binary snapshot: header, architecture, vocab size, raw doubles.
void save_model(const ModelParams& params, const std::filesystem::path& file);
ModelParams load_model(const std::filesystem::path& file);

} // namespace dse
