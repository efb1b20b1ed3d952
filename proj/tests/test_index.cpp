#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "dse/error.hpp"
#include "dse/index.hpp"
#include "dse/rng.hpp"
#include "test_util.hpp"

using namespace dse;
using dse::test::TempDir;
using dse::test::make_doc;

namespace {

// Three documents small enough to score by hand.
//   abstracts: d1 "rats rats drink water" (4) / d2 "mice eat cheese" (3) / d3 "rats sleep" (2)
//   titles:    d1 "rat biology" (2)       / d2 "mouse craft" (2)      / d3 "rat" (1)
Corpus hand_corpus() {
    return make_corpus({make_doc("d1", "rat biology", "rats rats drink water"),
                        make_doc("d2", "mouse craft", "mice eat cheese"),
                        make_doc("d3", "rat", "rats sleep")});
}

Query abstract_query(std::vector<std::string> terms) {
    Query q;
    for (auto& t : terms) q.abstract_terms.push_back({std::move(t), 1.0});
    return q;
}

// Okapi reference computed directly from raw token lists, bypassing the
// inverted index entirely.
double reference_score(const Corpus& corpus, const Query& query, std::size_t doc,
                       const Bm25Params& p) {
    const double n = static_cast<double>(corpus.size());
    auto field_tokens = [&](std::size_t d, bool title) -> const std::vector<std::string>& {
        return title ? corpus.docs[d].title_tokens : corpus.docs[d].abstract_tokens;
    };
    auto avg_len = [&](bool title) {
        double total = 0;
        for (std::size_t d = 0; d < corpus.size(); ++d)
            total += static_cast<double>(field_tokens(d, title).size());
        return corpus.size() ? total / n : 0.0;
    };
    std::size_t matched = 0;
    double score = 0.0;
    for (bool title : {true, false}) {
        const auto& terms = title ? query.title_terms : query.abstract_terms;
        double boost = title ? query.title_boost : query.abstract_boost;
        double avg = avg_len(title);
        for (const auto& wt : terms) {
            std::size_t tf = static_cast<std::size_t>(std::count(
                field_tokens(doc, title).begin(), field_tokens(doc, title).end(), wt.term));
            if (tf == 0) continue;
            ++matched;
            std::size_t df = 0;
            for (std::size_t d = 0; d < corpus.size(); ++d)
                if (std::count(field_tokens(d, title).begin(), field_tokens(d, title).end(),
                               wt.term) > 0)
                    ++df;
            double idf = std::log(1.0 + (n - static_cast<double>(df) + 0.5) /
                                            (static_cast<double>(df) + 0.5));
            double dl = static_cast<double>(field_tokens(doc, title).size());
            double norm = 1.0 - p.b + p.b * (avg > 0 ? dl / avg : 0.0);
            double tfd = static_cast<double>(tf);
            score += boost * wt.weight * idf * tfd * (p.k1 + 1.0) / (tfd + p.k1 * norm);
        }
    }
    std::size_t need = static_cast<std::size_t>(
        std::ceil(query.minimum_should_match * static_cast<double>(query.clause_count())));
    if (matched < std::max<std::size_t>(need, 1)) return 0.0;
    return score;
}

} // namespace

TEST_CASE("bm25 matches hand-computed scores on a single-term query") {
    Corpus c = hand_corpus();
    InvertedIndex idx = build_index(c);
    Query q = abstract_query({"rats"});

    // df("rats") = 2 of 3 -> idf = ln(1.6)
    CHECK(idx.idf(Field::abstract, "rats") == doctest::Approx(0.47000362924573563).epsilon(1e-12));
    // d1: tf 2, len 4 vs avg 3; d3: tf 1, len 2
    CHECK(bm25_score(idx, q, "d1") == doctest::Approx(0.5908617053374963).epsilon(1e-10));
    CHECK(bm25_score(idx, q, "d3") == doctest::Approx(0.5442147286003255).epsilon(1e-10));
    CHECK(bm25_score(idx, q, "d2") == 0.0);
}

TEST_CASE("title clauses are boosted and summed with abstract clauses") {
    Corpus c = hand_corpus();
    InvertedIndex idx = build_index(c);
    Query q = abstract_query({"rats"});
    q.title_terms.push_back({"rat", 1.0});

    CHECK(bm25_score(idx, q, "d1") == doctest::Approx(1.459775977892638).epsilon(1e-10));
    CHECK(bm25_score(idx, q, "d3") == doctest::Approx(1.6681364507096936).epsilon(1e-10));
    CHECK(bm25_score(idx, q, "d2") == 0.0);
}

TEST_CASE("idf of an unseen term stays finite and positive") {
    InvertedIndex idx = build_index(hand_corpus());
    CHECK(idx.idf(Field::abstract, "zebra") == doctest::Approx(std::log(8.0)).epsilon(1e-12));
    CHECK(idx.idf(Field::title, "zebra") > 0.0);
}

TEST_CASE("minimum_should_match gates low-coverage documents") {
    Corpus c = hand_corpus();
    InvertedIndex idx = build_index(c);

    // 5 clauses -> ceil(0.2 * 5) = 1 matching clause suffices
    Query loose = abstract_query({"water", "z1", "z2", "z3", "z4"});
    CHECK(bm25_score(idx, loose, "d1") > 0.0);

    // 6 clauses -> ceil(1.2) = 2 required; d1 matches only "water"
    Query strict = abstract_query({"water", "z1", "z2", "z3", "z4", "z5"});
    CHECK(bm25_score(idx, strict, "d1") == 0.0);
    // d3 matches rats+sleep -> qualifies
    Query two = abstract_query({"rats", "sleep", "z1", "z2", "z3", "z4"});
    CHECK(bm25_score(idx, two, "d3") > 0.0);
}

TEST_CASE("retrieve orders by descending score with ascending-id ties") {
    Corpus c = make_corpus({make_doc("b", "", "rats run"), make_doc("a", "", "rats run"),
                            make_doc("c", "", "rats rats run run"), make_doc("d", "", "mice")});
    InvertedIndex idx = build_index(c);
    auto hits = retrieve(idx, abstract_query({"rats"}), 10);

    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "c"); // highest tf
    CHECK(hits[1].id == "a"); // tie with b, ascending id
    CHECK(hits[2].id == "b");
    CHECK(hits[1].score == doctest::Approx(hits[2].score).epsilon(1e-15));

    auto top2 = retrieve(idx, abstract_query({"rats"}), 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[1].id == "a");

    CHECK_THROWS_AS(retrieve(idx, Query{}, 5), DataError);
}

TEST_CASE("retrieve agrees with a full-scan reference on random corpora") {
    Rng rng(0xb2u);
    const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "eps",  "zeta",
                                            "eta",   "theta", "iota", "kappa", "lam",  "mu",
                                            "nu",    "xi",    "omic", "pi",    "rho",  "sigma"};
    for (int round = 0; round < 8; ++round) {
        std::vector<Document> docs;
        for (int d = 0; d < 60; ++d) {
            auto draw = [&](std::size_t count) {
                std::string text;
                for (std::size_t i = 0; i < count; ++i) {
                    text += vocab[rng.below(vocab.size())];
                    text += ' ';
                }
                return text;
            };
            docs.push_back(make_doc("doc" + std::to_string(d), draw(2 + rng.below(4)),
                                    draw(5 + rng.below(12))));
        }
        Corpus c = make_corpus(std::move(docs));
        InvertedIndex idx = build_index(c);

        Query q;
        for (int i = 0; i < 3; ++i) q.abstract_terms.push_back({vocab[rng.below(vocab.size())], 1.0});
        q.title_terms.push_back({vocab[rng.below(vocab.size())], 1.0});
        std::set<std::string> seen;
        auto dedupe = [&](std::vector<WeightedTerm>& terms, const char* tag) {
            std::vector<WeightedTerm> out;
            for (auto& t : terms)
                if (seen.insert(std::string(tag) + t.term).second) out.push_back(t);
            terms = std::move(out);
        };
        dedupe(q.title_terms, "t:");
        dedupe(q.abstract_terms, "a:");

        // per-document score agreement
        for (std::size_t d = 0; d < c.size(); ++d) {
            double got = bm25_score(idx, q, c.docs[d].id);
            double want = reference_score(c, q, d, idx.bm25);
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }

        // full ranking agreement, including the tie rule
        auto hits = retrieve(idx, q, c.size());
        std::vector<ScoredDoc> want;
        for (std::size_t d = 0; d < c.size(); ++d) {
            double s = reference_score(c, q, d, idx.bm25);
            if (s > 0.0) want.push_back({c.docs[d].id, s});
        }
        std::sort(want.begin(), want.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        REQUIRE(hits.size() == want.size());
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].id == want[i].id);
            CHECK(hits[i].score == doctest::Approx(want[i].score).epsilon(1e-10));
        }
    }
}

TEST_CASE("more-like-this applies tf and df floors and ranks by pooled tf*idf") {
    // "common" passes both floors; "rare" fails the df floor; "single"
    // fails the pooled-tf floor.
    std::vector<Document> docs;
    docs.push_back(make_doc("e1", "", "common common filler single"));
    docs.push_back(make_doc("e2", "", "common rare filler"));
    for (int i = 0; i < 6; ++i)
        docs.push_back(make_doc("bg" + std::to_string(i), "", "common filler padding"));
    docs.push_back(make_doc("lone", "", "rare"));
    Corpus c = make_corpus(std::move(docs));
    InvertedIndex idx = build_index(c);

    MltParams p;
    p.min_term_freq = 2;
    p.min_doc_freq = 5;
    Query q = build_mlt_query(idx, c, {"e1", "e2"}, p);

    CHECK(q.title_terms.empty());
    std::set<std::string> terms;
    for (const auto& wt : q.abstract_terms) {
        terms.insert(wt.term);
        CHECK(wt.weight == 1.0);
    }
    CHECK(terms.count("common") == 1); // pooled tf 3, df 8
    CHECK(terms.count("filler") == 1); // pooled tf 2, df 8
    CHECK(terms.count("rare") == 0);   // df 2 < 5
    CHECK(terms.count("single") == 0); // pooled tf 1 < 2

    // pooled tf 3 beats pooled tf 2 at equal df
    REQUIRE(q.abstract_terms.size() == 2);
    CHECK(q.abstract_terms[0].term == "common");
    CHECK(q.abstract_terms[1].term == "filler");

    p.max_query_terms = 1;
    Query capped = build_mlt_query(idx, c, {"e1", "e2"}, p);
    REQUIRE(capped.abstract_terms.size() == 1);
    CHECK(capped.abstract_terms[0].term == "common");

    p.min_term_freq = 50;
    CHECK_THROWS_AS(build_mlt_query(idx, c, {"e1", "e2"}, p), DataError);
    CHECK_THROWS_AS(build_mlt_query(idx, c, {}, MltParams{}), DataError);
}

TEST_CASE("index snapshot round-trips and is byte-stable") {
    TempDir tmp;
    Corpus c = hand_corpus();
    InvertedIndex idx = build_index(c);
    auto f1 = tmp / "a.idx";
    auto f2 = tmp / "b.idx";
    save_index(idx, f1);
    save_index(idx, f2);

    std::ifstream in1(f1, std::ios::binary), in2(f2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(in1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK_FALSE(b1.empty());

    InvertedIndex back = load_index(f1);
    CHECK(back.doc_ids == idx.doc_ids);
    CHECK(back.abstract.avg_len == idx.abstract.avg_len);
    CHECK(back.title.doc_freq("rat") == 2);
    Query q = abstract_query({"rats"});
    CHECK(bm25_score(back, q, "d1") == bm25_score(idx, q, "d1"));
    auto before = retrieve(idx, q, 3);
    auto after = retrieve(back, q, 3);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i].id == after[i].id);
        CHECK(before[i].score == after[i].score);
    }

    CHECK_THROWS_AS(load_index(tmp / "missing.idx"), DataError);
}

TEST_CASE("retrieval_tsv lists rank, id and score") {
    std::vector<ScoredDoc> hits{{"a", 1.5}, {"b", 0.25}};
    std::string tsv = retrieval_tsv(hits);
    CHECK(tsv.find("1\ta\t") != std::string::npos);
    CHECK(tsv.find("2\tb\t") != std::string::npos);
}
