#include "doctest.h"

#include <algorithm>

#include "dse/index.hpp"
#include "dse/synthcorpus.hpp"
#include "dse/taskgen.hpp"

using namespace dse;

TEST_SUITE("synthcorpus") {

TEST_CASE("bundled corpus is ready for indexing and retrieval") {
    SynthCorpusParams params;
    params.docs = 800;
    Corpus c = make_synth_corpus(params);
    REQUIRE(c.size() == 800);

    for (const auto& d : c.docs) {
        REQUIRE_FALSE(d.id.empty());
        REQUIRE_FALSE(d.abstract.empty());
        REQUIRE_FALSE(d.title_tokens.empty());
        REQUIRE_FALSE(d.abstract_tokens.empty());
    }

    InvertedIndex index = build_index(c);
    CHECK(index.abstract.postings.size() > 100);
    CHECK(index.abstract.avg_len > 0.0);
}

TEST_CASE("advertised topics have positive support") {
    SynthCorpusParams params;
    params.docs = 2000;
    Corpus c = make_synth_corpus(params);
    for (const auto& name : synth_topics()) {
        Topic topic = Topic::parse(name);
        std::size_t hits = 0;
        for (const auto& d : c.docs) hits += topic.matches(d);
        CHECK(hits >= 20);
    }
}

TEST_CASE("same parameters reproduce the corpus byte for byte") {
    SynthCorpusParams params;
    params.docs = 300;
    params.seed = 42;
    std::string a = export_jsonl(make_synth_corpus(params));
    std::string b = export_jsonl(make_synth_corpus(params));
    CHECK(a == b);

    params.seed = 43;
    CHECK(export_jsonl(make_synth_corpus(params)) != a);
}

} // TEST_SUITE
