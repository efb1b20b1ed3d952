#include "dse/synthcorpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dse/error.hpp"
#include "dse/rng.hpp"

namespace dse {

namespace {

const std::vector<std::string> kLabels = {"cardio", "neuro",   "onco",    "immuno",
                                          "pedia",  "genet",   "imaging", "trial"};

// Correlated partner per label; both directions boost the pair's joint rate
// so conjunctions like cardio+imaging have topic-sized support.
const std::vector<int> kPartner = {6, 4, 5, 7, 1, 2, 0, 3};

const std::vector<double> kPrimaryWeight = {0.14, 0.13, 0.13, 0.12, 0.12, 0.12, 0.12, 0.12};

constexpr std::size_t kBackgroundWords = 2500;
constexpr std::size_t kSignalWordsPerLabel = 25;

std::string make_word(Rng& rng) {
    static const char* consonants = "bcdfghjklmnprstvwz";
    static const char* vowels = "aeiou";
    std::size_t syllables = 2 + rng.below(3);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
        w += consonants[rng.below(18)];
        w += vowels[rng.below(5)];
    }
    return w;
}

struct Lexicon {
    std::vector<std::string> background;
    std::vector<std::vector<std::string>> signal; // per label
    std::vector<double> zipf_cumulative;          // over background ranks
};

/// Word lists are derived from a fixed stream so every corpus, whatever its
/// seed, shares one lexicon; the seed only drives document sampling.
Lexicon build_lexicon() {
    Lexicon lex;
    Rng rng(0x6c657869636f6eULL);
    std::unordered_set<std::string> used;
    auto fresh = [&]() {
        for (;;) {
            std::string w = make_word(rng);
            if (used.insert(w).second) return w;
        }
    };
    lex.background.reserve(kBackgroundWords);
    for (std::size_t i = 0; i < kBackgroundWords; ++i) lex.background.push_back(fresh());
    lex.signal.resize(kLabels.size());
    for (auto& words : lex.signal) {
        words.reserve(kSignalWordsPerLabel);
        for (std::size_t i = 0; i < kSignalWordsPerLabel; ++i) words.push_back(fresh());
    }
    lex.zipf_cumulative.reserve(kBackgroundWords);
    double acc = 0.0;
    for (std::size_t r = 1; r <= kBackgroundWords; ++r) {
        acc += 1.0 / static_cast<double>(r);
        lex.zipf_cumulative.push_back(acc);
    }
    return lex;
}

const std::string& zipf_word(const Lexicon& lex, Rng& rng) {
    double r = rng.uniform() * lex.zipf_cumulative.back();
    auto it = std::lower_bound(lex.zipf_cumulative.begin(), lex.zipf_cumulative.end(), r);
    std::size_t idx = static_cast<std::size_t>(it - lex.zipf_cumulative.begin());
    if (idx >= lex.background.size()) idx = lex.background.size() - 1;
    return lex.background[idx];
}

std::vector<int> draw_labels(Rng& rng) {
    double r = rng.uniform();
    int primary = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < kPrimaryWeight.size(); ++i) {
        acc += kPrimaryWeight[i];
        if (r < acc) {
            primary = static_cast<int>(i);
            break;
        }
    }
    std::vector<int> labels{primary};
    if (rng.uniform() < 0.33) labels.push_back(kPartner[static_cast<std::size_t>(primary)]);
    if (rng.uniform() < 0.15) labels.push_back(static_cast<int>(rng.below(kLabels.size())));
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

} // namespace

Corpus make_synth_corpus(const SynthCorpusParams& params) {
    if (params.docs == 0) throw ConfigError("synthetic corpus needs at least one document");
    static const Lexicon lex = build_lexicon();
    Rng rng(params.seed);

    std::vector<Document> docs;
    docs.reserve(params.docs);
    int id_width = static_cast<int>(std::to_string(params.docs - 1).size());

    for (std::size_t i = 0; i < params.docs; ++i) {
        std::vector<int> labels = draw_labels(rng);

        auto signal_word = [&]() -> const std::string& {
            std::size_t li = labels[rng.below(labels.size())];
            const auto& words = lex.signal[static_cast<std::size_t>(li)];
            return words[rng.below(words.size())];
        };

        std::vector<std::string> title;
        std::size_t title_len = 5 + rng.below(5);
        for (std::size_t t = 0; t < title_len; ++t)
            title.push_back(rng.uniform() < 0.5 ? signal_word() : zipf_word(lex, rng));

        std::vector<std::string> abstract;
        double len = 90.0 + 25.0 * rng.normal();
        std::size_t abstract_len =
            static_cast<std::size_t>(std::clamp(len, 40.0, 220.0));
        for (std::size_t t = 0; t < abstract_len; ++t)
            abstract.push_back(rng.uniform() < 0.22 ? signal_word() : zipf_word(lex, rng));

        Document d;
        std::string num = std::to_string(i);
        d.id = "S" + std::string(static_cast<std::size_t>(id_width) - num.size(), '0') + num;
        d.title = join(title);
        d.abstract = join(abstract);
        for (int li : labels) d.labels.push_back(kLabels[static_cast<std::size_t>(li)]);
        docs.push_back(std::move(d));
    }
    return make_corpus(std::move(docs));
}

std::vector<std::string> synth_topics() {
    return {"cardio+imaging", "genet+onco", "neuro+pedia"};
}

std::vector<std::string> synth_labels() { return kLabels; }

} // namespace dse
