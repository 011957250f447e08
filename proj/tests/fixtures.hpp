#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "extsumm/corpus.hpp"
#include "extsumm/model.hpp"
#include "extsumm/topics.hpp"

namespace extsumm::testfix {

// Raw article record, mirroring the JSON-Lines corpus schema.
struct RawRecord {
    std::string id;
    std::string title;
    std::string abstract_text;
    std::vector<std::pair<std::string, std::string>> sections;
};

void write_corpus_jsonl(const std::vector<RawRecord>& records,
                        const std::filesystem::path& path);

// Corpus with abstract sentences copied verbatim into the bodies (the planted
// positives) surrounded by filler sentences drawn from a shared lexicon that
// dominates the document's token frequencies. Per document: 5 positives of 23
// words each (115 words total) and `fillers_per_doc` fillers of >= 20 words,
// so a 125-word budget holds exactly the positives.
struct PlantedCorpus {
    std::vector<RawRecord> records;
    std::map<std::string, std::vector<int>> planted;  // body indices of the copies
    int positives_per_doc = 5;
    int fillers_per_doc = 24;
};
PlantedCorpus make_planted_corpus(int num_docs, std::uint64_t seed);

// Randomized corpus for labeler contracts: some abstract sentences have exact
// body copies, some have perturbed copies, some have none.
std::vector<RawRecord> make_labeler_corpus(int num_docs, std::uint64_t seed);

// Token bags drawn from planted topic-word distributions with
// block-concentrated mass, plus the planted distributions themselves.
struct PlantedTopics {
    std::vector<TokenBag> bags;
    std::int32_t vocab_size = 0;
    Matrix<double> planted_phi;  // topics x vocab
    std::vector<std::vector<std::int32_t>> planted_top_words;  // top-10 per topic
};
PlantedTopics make_planted_topics(int topics, int vocab, int docs, int doc_len,
                                  std::uint64_t seed);

// Miniature model dimensions used by the gradient checks:
// D=8, U=12, C=4, M=6, L=7, Q=5.
ModelConfig tiny_model_config(std::int32_t vocab);

// Random point on the M-simplex.
template <typename Real>
std::vector<Real> random_topic_vector(int topics, Rng& rng) {
    std::vector<Real> p(static_cast<std::size_t>(topics));
    double sum = 0.0;
    for (auto& v : p) {
        const double draw = rng.uniform() + 1e-3;
        v = static_cast<Real>(draw);
        sum += draw;
    }
    double fixup = 0.0;
    for (auto& v : p) {
        v = static_cast<Real>(static_cast<double>(v) / sum);
        fixup += static_cast<double>(v);
    }
    // Pin the exact sum to 1 against rounding.
    p.back() = static_cast<Real>(static_cast<double>(p.back()) + (1.0 - fixup));
    return p;
}

// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace extsumm::testfix
