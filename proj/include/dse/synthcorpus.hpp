#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dse/corpus.hpp"

namespace dse {

/// Parameters for the bundled synthetic literature corpus: multi-label
/// pseudo-abstracts with correlated label pairs and per-label signal
/// vocabularies, so label conjunctions behave like fine-grained topics that
/// both retrieval and classification can pick up.
struct SynthCorpusParams {
    std::size_t docs = 20000;
    std::uint64_t seed = 7;
};

Corpus make_synth_corpus(const SynthCorpusParams& params);

/// Label conjunctions with strong support under the default label
/// correlations; suitable as generated-task topics.
std::vector<std::string> synth_topics();

/// The corpus label inventory.
std::vector<std::string> synth_labels();

} // namespace dse
