#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dse/corpus.hpp"

namespace dse {

enum class Field { title, abstract };

struct Posting {
    std::uint32_t doc = 0; // position in doc_ids
    std::uint32_t tf = 0;
};

struct FieldIndex {
    std::unordered_map<std::string, std::vector<Posting>> postings;
    std::vector<std::uint32_t> doc_len;
    double avg_len = 0.0;

    std::size_t doc_freq(const std::string& term) const {
        auto it = postings.find(term);
        return it == postings.end() ? 0 : it->second.size();
    }
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Per-field inverted index over title and abstract tokens.
struct InvertedIndex {
    std::vector<std::string> doc_ids; // corpus order
    std::unordered_map<std::string, std::uint32_t> id_to_pos;
    FieldIndex title;
    FieldIndex abstract;
    Bm25Params bm25;

    std::size_t doc_count() const { return doc_ids.size(); }
    const FieldIndex& field(Field f) const { return f == Field::title ? title : abstract; }

    /// ln(1 + (N - df + 0.5) / (df + 0.5)); non-negative for every df <= N.
    double idf(Field f, const std::string& term) const;
};

InvertedIndex build_index(const Corpus& corpus, const Bm25Params& params = {});

struct WeightedTerm {
    std::string term;
    double weight = 1.0;
};

/// A per-field weighted boolean-OR query with a coverage floor. A document
/// qualifies only if it matches at least ceil(minimum_should_match * C) of
/// the C distinct (field, term) clauses; each matching clause contributes
/// weight * idf * saturated-tf, and each field's sum is scaled by its boost.
struct Query {
    std::vector<WeightedTerm> title_terms;
    std::vector<WeightedTerm> abstract_terms;
    double title_boost = 2.0;
    double abstract_boost = 1.0;
    double minimum_should_match = 0.2;

    std::size_t clause_count() const { return title_terms.size() + abstract_terms.size(); }
};

struct MltParams {
    std::size_t max_query_terms = 25; // per field
    std::uint32_t min_term_freq = 2;  // pooled tf floor
    std::size_t min_doc_freq = 5;     // corpus df floor
    double minimum_should_match = 0.2;
    double title_boost = 2.0;
    double abstract_boost = 1.0;
};

/// Pools the example documents into one pseudo-document per field, keeps
/// terms passing the tf/df floors, ranks them by pooled-tf * idf and keeps
/// the top max_query_terms per field (ties broken lexicographically).
/// All kept terms get weight 1. Throws DataError when no term qualifies.
Query build_mlt_query(const InvertedIndex& index, const Corpus& corpus,
                      const std::vector<std::string>& example_ids, const MltParams& params = {});

/// BM25 score of one document, 0 if it fails minimum_should_match.
double bm25_score(const InvertedIndex& index, const Query& query, const std::string& doc_id);

struct ScoredDoc {
    std::string id;
    double score = 0.0;
};

/// Top-k qualifying documents, descending score, ties by ascending doc id.
std::vector<ScoredDoc> retrieve(const InvertedIndex& index, const Query& query, std::size_t top_k);

/// Binary snapshot with a versioned header; load rejects unknown versions.
void save_index(const InvertedIndex& index, const std::filesystem::path& file);
InvertedIndex load_index(const std::filesystem::path& file);

/// TSV rows "rank\tdoc_id\tscore" for external tooling.
std::string retrieval_tsv(const std::vector<ScoredDoc>& results);

} // namespace dse
