#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dse {

/// One corpus record. Raw title/abstract text is kept verbatim so exports
/// round-trip and character-level predicates (e.g. abstract length filters)
/// see the original string; token views are derived once at construction.
struct Document {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<std::string> title_tokens;
    std::vector<std::string> abstract_tokens;
    std::vector<std::string> labels; // sorted, unique

    bool has_label(const std::string& label) const;
};

struct Corpus {
    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> id_to_pos;
    std::map<std::string, std::vector<std::size_t>> label_index;

    std::size_t size() const { return docs.size(); }
    const Document& by_id(const std::string& id) const;
    bool contains(const std::string& id) const { return id_to_pos.count(id) > 0; }
};

/// Lowercases and splits on every non-alphanumeric byte, dropping empty
/// pieces. "HIV-Infections, in Adults." -> ["hiv","infections","in","adults"].
std::vector<std::string> tokenize(std::string_view text);

/// Builds a corpus from already-parsed documents; derives the token views
/// from the raw text, validates ids and rebuilds the label index. Throws
/// DataError on duplicate or empty ids.
Corpus make_corpus(std::vector<Document> docs);

/// Reads JSON-lines records {"id","title","abstract","labels"}. Malformed
/// records and duplicate ids raise DataError naming the offending line;
/// an empty file is an error.
Corpus ingest_jsonl(const std::filesystem::path& file);
Corpus ingest_jsonl_text(const std::string& text, const std::string& origin);

/// Writes one compact JSON object per line with keys in sorted order, so
/// ingest(export(c)) == c and export is byte-stable.
std::string export_jsonl(const Corpus& corpus);
void export_jsonl(const Corpus& corpus, const std::filesystem::path& file);

struct FieldLengthStats {
    std::size_t min = 0, max = 0;
    double p25 = 0, median = 0, p75 = 0, mean = 0;
};

struct CorpusStats {
    std::size_t doc_count = 0;
    std::size_t label_count = 0;
    FieldLengthStats title, abstract;
};

CorpusStats corpus_stats(const Corpus& corpus);

} // namespace dse
