#include "extsumm/embeddings.hpp"

#include <algorithm>
#include <cmath>

#include "extsumm/errors.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {
namespace {

// Cumulative unigram^power weights over trainable ids (>= 2), for negative
// sampling by binary search.
std::vector<double> negative_table(const std::vector<std::int64_t>& counts, double power) {
    std::vector<double> cumulative(counts.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (i >= 2 && counts[i] > 0) acc += std::pow(static_cast<double>(counts[i]), power);
        cumulative[i] = acc;
    }
    return cumulative;
}

std::int32_t draw_negative(const std::vector<double>& cumulative, double u) {
    const double target = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    return static_cast<std::int32_t>(it - cumulative.begin());
}

}  // namespace

std::vector<std::vector<std::int32_t>> embedding_sequences(const std::vector<Document>& docs,
                                                           const Vocabulary& vocab) {
    std::vector<std::vector<std::int32_t>> sequences;
    for (const auto& doc : docs) {
        for (const auto& s : doc.body) sequences.push_back(s.token_ids);
        for (const auto& s : doc.abstract) sequences.push_back(s.token_ids);
        std::vector<std::int32_t> title_ids;
        for (const auto& tok : tokenize(doc.title)) title_ids.push_back(vocab.id(tok));
        if (!title_ids.empty()) sequences.push_back(std::move(title_ids));
    }
    return sequences;
}

EmbeddingMatrix train_skipgram(const std::vector<std::vector<std::int32_t>>& sequences,
                               const Vocabulary& vocab, const SkipgramConfig& config,
                               std::vector<double>* epoch_losses) {
    if (sequences.empty()) throw DataError("train_skipgram: empty corpus");
    if (config.dim < 1) throw ConfigError("train_skipgram: dim must be >= 1");
    if (vocab.size() < config.negatives + 1) {
        throw DataError("train_skipgram: vocabulary smaller than negatives + 1");
    }

    const auto V = static_cast<std::size_t>(vocab.size());
    const auto D = static_cast<std::size_t>(config.dim);

    // Corpus token counts drive the negative-sampling distribution.
    std::vector<std::int64_t> counts(V, 0);
    std::int64_t total_tokens = 0;
    for (const auto& seq : sequences) {
        for (std::int32_t id : seq) {
            if (id >= 0 && static_cast<std::size_t>(id) < V) {
                ++counts[static_cast<std::size_t>(id)];
                ++total_tokens;
            }
        }
    }
    const auto cumulative = negative_table(counts, config.unigram_power);
    if (cumulative.back() <= 0.0) throw DataError("train_skipgram: no trainable tokens");

    EmbeddingMatrix result;
    result.config = config;

    Rng rng(derive_seed(config.seed, "skipgram"));

    // word2vec-style init: inputs uniform in [-0.5/D, 0.5/D), outputs zero.
    Matrix<float> syn0(V, D, 0.0f);
    Matrix<float> syn1(V, D, 0.0f);
    for (std::size_t i = 2; i < V; ++i) {
        for (std::size_t j = 0; j < D; ++j) {
            syn0(i, j) = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(D));
        }
    }

    const std::int64_t pairs_per_epoch_estimate = total_tokens * config.window;
    const std::int64_t total_steps =
        std::max<std::int64_t>(1, pairs_per_epoch_estimate * config.epochs);
    std::int64_t step = 0;

    std::vector<float> grad_center(D);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::int64_t epoch_pairs = 0;
        for (const auto& seq : sequences) {
            for (std::size_t pos = 0; pos < seq.size(); ++pos) {
                const std::int32_t center = seq[pos];
                if (center < 2) continue;  // PAD/UNK never trained
                if (config.subsample > 0.0) {
                    const double f = static_cast<double>(counts[static_cast<std::size_t>(center)]) /
                                     static_cast<double>(total_tokens);
                    const double keep = (std::sqrt(f / config.subsample) + 1.0) * config.subsample / f;
                    if (keep < 1.0 && rng.uniform() > keep) continue;
                }

                // Dynamic window, as in the reference word2vec.
                const int reduced = static_cast<int>(rng.below(static_cast<std::uint32_t>(config.window))) ;
                const int span = config.window - reduced;
                for (int off = -span; off <= span; ++off) {
                    if (off == 0) continue;
                    const std::int64_t ctx_pos = static_cast<std::int64_t>(pos) + off;
                    if (ctx_pos < 0 || ctx_pos >= static_cast<std::int64_t>(seq.size())) continue;
                    const std::int32_t context = seq[static_cast<std::size_t>(ctx_pos)];
                    if (context < 2) continue;

                    const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
                    const double lr = std::max(config.min_lr, config.lr * (1.0 - progress));
                    ++step;

                    auto center_vec = syn0.row(static_cast<std::size_t>(center));
                    std::fill(grad_center.begin(), grad_center.end(), 0.0f);
                    double pair_loss = 0.0;

                    for (int neg = 0; neg <= config.negatives; ++neg) {
                        std::int32_t target;
                        double label;
                        if (neg == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            target = draw_negative(cumulative, rng.uniform());
                            if (target == context) continue;
                            label = 0.0;
                        }
                        auto target_vec = syn1.row(static_cast<std::size_t>(target));
                        double score = 0.0;
                        for (std::size_t j = 0; j < D; ++j) {
                            score += static_cast<double>(center_vec[j]) * target_vec[j];
                        }
                        const double pred = sigmoid(score);
                        pair_loss -= label > 0.5 ? std::log(std::max(pred, 1e-10))
                                                 : std::log(std::max(1.0 - pred, 1e-10));
                        const auto g = static_cast<float>(lr * (label - pred));
                        for (std::size_t j = 0; j < D; ++j) {
                            grad_center[j] += g * target_vec[j];
                            target_vec[j] += g * center_vec[j];
                        }
                    }
                    for (std::size_t j = 0; j < D; ++j) center_vec[j] += grad_center[j];
                    epoch_loss += pair_loss;
                    ++epoch_pairs;
                }
            }
        }
        if (epoch_losses != nullptr) {
            epoch_losses->push_back(epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs)
                                                    : 0.0);
        }
    }

    // PAD row stays exactly zero.
    for (std::size_t j = 0; j < D; ++j) syn0(Vocabulary::kPad, j) = 0.0f;

    result.vectors = std::move(syn0);
    result.epochs_trained = config.epochs;
    return result;
}

std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingMatrix& matrix,
                                                              const Vocabulary& vocab,
                                                              const std::string& token, int k) {
    if (!vocab.contains(token)) {
        throw DataError("nearest_neighbors: token not in vocabulary: " + token);
    }
    const std::int32_t query = vocab.id(token);
    const auto query_row = matrix.vectors.row(static_cast<std::size_t>(query));

    std::vector<std::pair<std::string, double>> scored;
    for (std::int32_t id = 2; id < vocab.size(); ++id) {
        if (id == query) continue;
        const auto row = matrix.vectors.row(static_cast<std::size_t>(id));
        double dot = 0.0, nq = 0.0, nr = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            dot += static_cast<double>(query_row[j]) * row[j];
            nq += static_cast<double>(query_row[j]) * query_row[j];
            nr += static_cast<double>(row[j]) * row[j];
        }
        const double sim = (nq > 0.0 && nr > 0.0) ? dot / (std::sqrt(nq) * std::sqrt(nr)) : 0.0;
        scored.emplace_back(vocab.token(id), sim);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (k < 0) k = 0;
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
    return scored;
}

}  // namespace extsumm
