#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "extsumm/corpus.hpp"
#include "extsumm/math.hpp"

namespace extsumm {

struct SkipgramConfig {
    int dim = 100;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;       // linearly decayed to min_lr over training
    double min_lr = 1e-4;
    double subsample = 0.0;  // frequent-word subsampling threshold, 0 = off
    double unigram_power = 0.75;
    std::uint64_t seed = 0;
};

struct EmbeddingMatrix {
    Matrix<float> vectors;  // V x dim input vectors; PAD row all zeros
    int epochs_trained = 0;
    SkipgramConfig config;
};

// Skip-gram with negative sampling over token-id sequences (one per
// sentence). Negatives are drawn from the unigram^unigram_power
// distribution. Deterministic under config.seed; epochs = 0 returns the
// seeded random initialization. When epoch_losses is non-null it receives
// the mean per-pair objective for every epoch.
EmbeddingMatrix train_skipgram(const std::vector<std::vector<std::int32_t>>& sequences,
                               const Vocabulary& vocab, const SkipgramConfig& config,
                               std::vector<double>* epoch_losses = nullptr);

// Sentence-id sequences for embedding training: body + abstract + title.
std::vector<std::vector<std::int32_t>> embedding_sequences(const std::vector<Document>& docs,
                                                           const Vocabulary& vocab);

// Top-k tokens by cosine to the query token's vector, excluding the query
// itself and the reserved PAD/UNK ids.
std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingMatrix& matrix,
                                                              const Vocabulary& vocab,
                                                              const std::string& token, int k);

}  // namespace extsumm
