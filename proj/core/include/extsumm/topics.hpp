#pragma once

#include <cstdint>
#include <vector>

#include "extsumm/corpus.hpp"
#include "extsumm/math.hpp"

namespace extsumm {

// Token-id bag for one document (order irrelevant to the sampler).
using TokenBag = std::vector<std::int32_t>;

struct TopicModel {
    int num_topics = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    int iterations_run = 0;

    Matrix<double> phi;  // M x V, rows sum to 1

    // Sampler count tables from the fitting run (empty on checkpoint reload).
    Matrix<std::int32_t> topic_word;  // M x V
    std::vector<std::int64_t> topic_total;  // M
    Matrix<std::int32_t> doc_topic;   // docs x M
    std::vector<std::int32_t> doc_len;

    std::int32_t vocab_size() const { return static_cast<std::int32_t>(phi.cols()); }

    // Verifies the count-table identities: per-document topic counts sum to
    // the document length, and per-topic word counts match the totals.
    bool counts_consistent() const;
};

// Bags for LDA: body (+abstract +title when include_abstract) tokens with
// PAD/UNK removed and high document-frequency tokens (df > stop_df_ratio of
// documents) dropped.
std::vector<TokenBag> make_lda_bags(const std::vector<Document>& docs, const Vocabulary& vocab,
                                    double stop_df_ratio, bool include_abstract);

TokenBag make_lda_bag(const Document& doc, const Vocabulary& vocab, double stop_df_ratio,
                      bool include_abstract);

// Collapsed Gibbs sampling. phi is estimated from the final counts as
// (count + beta) / (topic_total + V*beta). Empty bags are skipped; an
// all-empty corpus is an error.
TopicModel fit_lda_gibbs(const std::vector<TokenBag>& corpus, int num_topics, double alpha,
                         double beta, int iterations, std::uint64_t seed,
                         std::int32_t vocab_size);

// Gibbs inference with phi frozen; returns p with p_i = (n_i + alpha) /
// (N + M*alpha). An empty bag yields the uniform vector.
std::vector<double> infer_doc_topics(const TopicModel& model, const TokenBag& doc, int iterations,
                                     std::uint64_t seed);

// Top-k vocabulary ids by phi[topic], ties broken by lower id. k is clamped
// to the vocabulary size.
std::vector<std::int32_t> top_words(const TopicModel& model, int topic, int k);

// Mean per-token log-likelihood ln(sum_k p_k * phi[k][w]) over the held-out
// bags, with p inferred per bag.
double per_token_log_likelihood(const TopicModel& model, const std::vector<TokenBag>& bags,
                                int infer_iterations, std::uint64_t seed);

}  // namespace extsumm
