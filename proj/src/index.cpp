#include "dse/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dse/error.hpp"

namespace dse {

double InvertedIndex::idf(Field f, const std::string& term) const {
    double n = static_cast<double>(doc_count());
    double df = static_cast<double>(field(f).doc_freq(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

namespace {

void index_field(FieldIndex& fi, const std::vector<std::string>& tokens, std::uint32_t doc) {
    fi.doc_len.push_back(static_cast<std::uint32_t>(tokens.size()));
    std::map<std::string, std::uint32_t> counts;
    for (const auto& t : tokens) ++counts[t];
    for (const auto& [term, tf] : counts) fi.postings[term].push_back({doc, tf});
}

void finish_field(FieldIndex& fi) {
    double total = 0;
    for (auto len : fi.doc_len) total += len;
    fi.avg_len = fi.doc_len.empty() ? 0.0 : total / static_cast<double>(fi.doc_len.size());
}

} // namespace

InvertedIndex build_index(const Corpus& corpus, const Bm25Params& params) {
    InvertedIndex idx;
    idx.bm25 = params;
    idx.doc_ids.reserve(corpus.size());
    for (std::uint32_t i = 0; i < corpus.size(); ++i) {
        const Document& d = corpus.docs[i];
        idx.doc_ids.push_back(d.id);
        idx.id_to_pos.emplace(d.id, i);
        index_field(idx.title, d.title_tokens, i);
        index_field(idx.abstract, d.abstract_tokens, i);
    }
    finish_field(idx.title);
    finish_field(idx.abstract);
    return idx;
}

namespace {

std::uint32_t tf_in_doc(const FieldIndex& fi, const std::string& term, std::uint32_t doc) {
    auto it = fi.postings.find(term);
    if (it == fi.postings.end()) return 0;
    const auto& list = it->second;
    auto pos = std::lower_bound(list.begin(), list.end(), doc,
                                [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (pos != list.end() && pos->doc == doc) return pos->tf;
    return 0;
}

std::size_t msm_threshold(const Query& query) {
    return static_cast<std::size_t>(
        std::ceil(query.minimum_should_match * static_cast<double>(query.clause_count())));
}

double term_score(const InvertedIndex& index, Field f, const WeightedTerm& wt, std::uint32_t tf,
                  std::uint32_t doc_len) {
    if (tf == 0) return 0.0;
    const FieldIndex& fi = index.field(f);
    double k1 = index.bm25.k1;
    double b = index.bm25.b;
    double norm = 1.0 - b + b * (fi.avg_len > 0 ? static_cast<double>(doc_len) / fi.avg_len : 0.0);
    double sat = static_cast<double>(tf) * (k1 + 1.0) / (static_cast<double>(tf) + k1 * norm);
    return wt.weight * index.idf(f, wt.term) * sat;
}

} // namespace

double bm25_score(const InvertedIndex& index, const Query& query, const std::string& doc_id) {
    auto it = index.id_to_pos.find(doc_id);
    if (it == index.id_to_pos.end()) throw DataError("unknown document id: " + doc_id);
    std::uint32_t doc = it->second;

    std::size_t matched = 0;
    double score = 0.0;
    for (Field f : {Field::title, Field::abstract}) {
        const auto& terms = f == Field::title ? query.title_terms : query.abstract_terms;
        double boost = f == Field::title ? query.title_boost : query.abstract_boost;
        const FieldIndex& fi = index.field(f);
        double field_sum = 0.0;
        for (const auto& wt : terms) {
            std::uint32_t tf = tf_in_doc(fi, wt.term, doc);
            if (tf == 0) continue;
            ++matched;
            field_sum += term_score(index, f, wt, tf, fi.doc_len[doc]);
        }
        score += boost * field_sum;
    }
    if (matched < msm_threshold(query)) return 0.0;
    return score;
}

Query build_mlt_query(const InvertedIndex& index, const Corpus& corpus,
                      const std::vector<std::string>& example_ids, const MltParams& params) {
    if (example_ids.empty()) throw DataError("more-like-this needs at least one example document");

    Query query;
    query.title_boost = params.title_boost;
    query.abstract_boost = params.abstract_boost;
    query.minimum_should_match = params.minimum_should_match;

    for (Field f : {Field::title, Field::abstract}) {
        std::map<std::string, std::uint32_t> pooled;
        for (const auto& id : example_ids) {
            const Document& d = corpus.by_id(id);
            const auto& toks = f == Field::title ? d.title_tokens : d.abstract_tokens;
            for (const auto& t : toks) ++pooled[t];
        }
        struct Candidate {
            std::string term;
            double score;
        };
        std::vector<Candidate> cands;
        for (const auto& [term, tf] : pooled) {
            if (tf < params.min_term_freq) continue;
            if (index.field(f).doc_freq(term) < params.min_doc_freq) continue;
            cands.push_back({term, static_cast<double>(tf) * index.idf(f, term)});
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.term < b.term;
        });
        if (cands.size() > params.max_query_terms) cands.resize(params.max_query_terms);
        auto& out = f == Field::title ? query.title_terms : query.abstract_terms;
        for (auto& c : cands) out.push_back({std::move(c.term), 1.0});
    }

    if (query.clause_count() == 0)
        throw DataError("more-like-this produced no query terms; lower min_term_freq/min_doc_freq");
    return query;
}

std::vector<ScoredDoc> retrieve(const InvertedIndex& index, const Query& query, std::size_t top_k) {
    if (query.clause_count() == 0) throw DataError("empty query");

    // One pass over the postings of every clause: count matched clauses and
    // accumulate boosted term scores per document.
    std::vector<std::uint32_t> matched(index.doc_count(), 0);
    std::vector<double> score(index.doc_count(), 0.0);
    for (Field f : {Field::title, Field::abstract}) {
        const auto& terms = f == Field::title ? query.title_terms : query.abstract_terms;
        double boost = f == Field::title ? query.title_boost : query.abstract_boost;
        const FieldIndex& fi = index.field(f);
        for (const auto& wt : terms) {
            auto it = fi.postings.find(wt.term);
            if (it == fi.postings.end()) continue;
            for (const Posting& p : it->second) {
                ++matched[p.doc];
                score[p.doc] += boost * term_score(index, f, wt, p.tf, fi.doc_len[p.doc]);
            }
        }
    }

    std::size_t need = msm_threshold(query);
    std::vector<std::uint32_t> hits;
    for (std::uint32_t d = 0; d < index.doc_count(); ++d) {
        if (matched[d] >= need && matched[d] > 0) hits.push_back(d);
    }
    std::sort(hits.begin(), hits.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return index.doc_ids[a] < index.doc_ids[b];
    });
    if (hits.size() > top_k) hits.resize(top_k);

    std::vector<ScoredDoc> out;
    out.reserve(hits.size());
    for (auto d : hits) out.push_back({index.doc_ids[d], score[d]});
    return out;
}

std::string retrieval_tsv(const std::vector<ScoredDoc>& results) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < results.size(); ++i)
        out << (i + 1) << '\t' << results[i].id << '\t' << results[i].score << '\n';
    return out.str();
}

namespace {

constexpr char kMagic[8] = {'D', 'S', 'E', 'I', 'D', 'X', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw DataError("index snapshot truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(out, v);
}

double get_f64(std::istream& in) {
    std::uint64_t v = get_u64(in);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

void put_str(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
    std::uint64_t n = get_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw DataError("index snapshot truncated");
    return s;
}

void save_field(std::ostream& out, const FieldIndex& fi) {
    put_u64(out, fi.doc_len.size());
    for (auto len : fi.doc_len) put_u64(out, len);
    // Terms are sorted so the snapshot bytes do not depend on hash order.
    std::vector<const std::string*> terms;
    terms.reserve(fi.postings.size());
    for (const auto& [term, _] : fi.postings) terms.push_back(&term);
    std::sort(terms.begin(), terms.end(), [](const auto* a, const auto* b) { return *a < *b; });
    put_u64(out, terms.size());
    for (const auto* term : terms) {
        put_str(out, *term);
        const auto& list = fi.postings.at(*term);
        put_u64(out, list.size());
        for (const Posting& p : list) {
            put_u64(out, p.doc);
            put_u64(out, p.tf);
        }
    }
}

void load_field(std::istream& in, FieldIndex& fi) {
    std::uint64_t n_docs = get_u64(in);
    fi.doc_len.resize(n_docs);
    for (auto& len : fi.doc_len) len = static_cast<std::uint32_t>(get_u64(in));
    std::uint64_t n_terms = get_u64(in);
    for (std::uint64_t i = 0; i < n_terms; ++i) {
        std::string term = get_str(in);
        std::uint64_t n_post = get_u64(in);
        auto& list = fi.postings[term];
        list.resize(n_post);
        for (auto& p : list) {
            p.doc = static_cast<std::uint32_t>(get_u64(in));
            p.tf = static_cast<std::uint32_t>(get_u64(in));
        }
    }
    finish_field(fi);
}

} // namespace

void save_index(const InvertedIndex& index, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write index snapshot: " + file.string());
    out.write(kMagic, sizeof(kMagic));
    put_f64(out, index.bm25.k1);
    put_f64(out, index.bm25.b);
    put_u64(out, index.doc_ids.size());
    for (const auto& id : index.doc_ids) put_str(out, id);
    save_field(out, index.title);
    save_field(out, index.abstract);
    if (!out) throw DataError("failed writing index snapshot: " + file.string());
}

InvertedIndex load_index(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open index snapshot: " + file.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("not an index snapshot (bad header): " + file.string());
    InvertedIndex idx;
    idx.bm25.k1 = get_f64(in);
    idx.bm25.b = get_f64(in);
    std::uint64_t n = get_u64(in);
    idx.doc_ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        idx.doc_ids.push_back(get_str(in));
        idx.id_to_pos.emplace(idx.doc_ids.back(), static_cast<std::uint32_t>(i));
    }
    load_field(in, idx.title);
    load_field(in, idx.abstract);
    if (idx.title.doc_len.size() != n || idx.abstract.doc_len.size() != n)
        throw DataError("index snapshot inconsistent: " + file.string());
    return idx;
}

} // namespace dse
