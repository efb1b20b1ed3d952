#include "dse/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "dse/error.hpp"
#include "json.hpp"

namespace dse {

using nlohmann::json;

bool Document::has_label(const std::string& label) const {
    return std::binary_search(labels.begin(), labels.end(), label);
}

const Document& Corpus::by_id(const std::string& id) const {
    auto it = id_to_pos.find(id);
    if (it == id_to_pos.end()) throw DataError("unknown document id: " + id);
    return docs[it->second];
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

Corpus make_corpus(std::vector<Document> docs) {
    Corpus corpus;
    corpus.docs = std::move(docs);
    corpus.id_to_pos.reserve(corpus.docs.size());
    for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
        Document& d = corpus.docs[i];
        if (d.id.empty()) throw DataError("document at position " + std::to_string(i) + " has an empty id");
        d.title_tokens = tokenize(d.title);
        d.abstract_tokens = tokenize(d.abstract);
        std::sort(d.labels.begin(), d.labels.end());
        d.labels.erase(std::unique(d.labels.begin(), d.labels.end()), d.labels.end());
        auto [it, inserted] = corpus.id_to_pos.emplace(d.id, i);
        (void)it;
        if (!inserted) throw DataError("duplicate document id: " + d.id);
        for (const auto& label : d.labels) corpus.label_index[label].push_back(i);
    }
    if (corpus.docs.empty()) throw DataError("empty corpus");
    return corpus;
}

namespace {

Document parse_record(const json& j, std::size_t line_no) {
    auto fail = [line_no](const std::string& what) -> DataError {
        return DataError("line " + std::to_string(line_no) + ": " + what);
    };
    if (!j.is_object()) throw fail("record is not a JSON object");
    Document d;
    if (!j.contains("id") || !j.at("id").is_string()) throw fail("missing or non-string \"id\"");
    d.id = j.at("id").get<std::string>();
    if (d.id.empty()) throw fail("empty \"id\"");
    if (!j.contains("title") || !j.at("title").is_string())
        throw fail("record " + d.id + ": missing or non-string \"title\"");
    d.title = j.at("title").get<std::string>();
    if (!j.contains("abstract") || !j.at("abstract").is_string())
        throw fail("record " + d.id + ": missing or non-string \"abstract\"");
    d.abstract = j.at("abstract").get<std::string>();
    if (d.abstract.empty()) throw fail("record " + d.id + ": empty \"abstract\"");
    if (!j.contains("labels") || !j.at("labels").is_array())
        throw fail("record " + d.id + ": missing or non-array \"labels\"");
    for (const auto& l : j.at("labels")) {
        if (!l.is_string()) throw fail("record " + d.id + ": non-string label");
        d.labels.push_back(l.get<std::string>());
    }
    return d;
}

} // namespace

Corpus ingest_jsonl_text(const std::string& text, const std::string& origin) {
    std::vector<Document> docs;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DataError(origin + ", line " + std::to_string(line_no) + ": invalid JSON");
        try {
            docs.push_back(parse_record(j, line_no));
        } catch (const DataError& e) {
            throw DataError(origin + ", " + e.what());
        }
    }
    if (docs.empty()) throw DataError(origin + ": empty corpus");
    try {
        return make_corpus(std::move(docs));
    } catch (const DataError& e) {
        throw DataError(origin + ": " + e.what());
    }
}

Corpus ingest_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open corpus file: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_jsonl_text(buf.str(), file.string());
}

std::string export_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.docs) {
        json j;
        j["abstract"] = d.abstract;
        j["id"] = d.id;
        j["labels"] = d.labels;
        j["title"] = d.title;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void export_jsonl(const Corpus& corpus, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file: " + file.string());
    out << export_jsonl(corpus);
}

namespace {

FieldLengthStats length_stats(std::vector<std::size_t> lengths) {
    FieldLengthStats s;
    if (lengths.empty()) return s;
    std::sort(lengths.begin(), lengths.end());
    auto pct = [&](double q) {
        double pos = q * static_cast<double>(lengths.size() - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, lengths.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return static_cast<double>(lengths[lo]) * (1.0 - frac) + static_cast<double>(lengths[hi]) * frac;
    };
    s.min = lengths.front();
    s.max = lengths.back();
    s.p25 = pct(0.25);
    s.median = pct(0.5);
    s.p75 = pct(0.75);
    double total = 0;
    for (auto v : lengths) total += static_cast<double>(v);
    s.mean = total / static_cast<double>(lengths.size());
    return s;
}

} // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats s;
    s.doc_count = corpus.size();
    s.label_count = corpus.label_index.size();
    std::vector<std::size_t> title_len, abstract_len;
    title_len.reserve(corpus.size());
    abstract_len.reserve(corpus.size());
    for (const auto& d : corpus.docs) {
        title_len.push_back(d.title_tokens.size());
        abstract_len.push_back(d.abstract_tokens.size());
    }
    s.title = length_stats(std::move(title_len));
    s.abstract = length_stats(std::move(abstract_len));
    return s;
}

} // namespace dse
