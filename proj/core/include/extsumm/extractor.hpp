#pragma once

#include <string>
#include <vector>

#include "extsumm/corpus.hpp"
#include "extsumm/model.hpp"
#include "extsumm/topics.hpp"

namespace extsumm {

struct TokenWeight {
    std::string token;
    double weight = 0.0;  // per-sentence max-normalized attention weight
};

struct ExtractResult {
    std::string doc_id;
    std::vector<double> scores;  // one per body sentence, document order
    std::vector<int> selected;   // strictly increasing body indices
    std::string summary;
    int words_used = 0;
    std::vector<std::vector<TokenWeight>> attention;  // per selected sentence
};

struct AttentionReportEntry {
    int sentence_index = 0;
    std::string raw;
    std::vector<TokenWeight> tokens;
};

struct AttentionReport {
    std::string doc_id;
    std::vector<AttentionReportEntry> entries;

    std::string to_text() const;
    std::string to_html() const;
};

struct ExtractOptions {
    int budget_words = 125;
    // When >= 0, only sentences scoring at least this value are candidates.
    double score_threshold = -1.0;
    int topic_infer_iterations = 50;
    std::uint64_t seed = 0;
};

// Scores every body sentence with the eval-mode forward pass; the document
// topic vector is inferred from body-only tokens. Sentences with no usable
// tokens score 0.
std::vector<double> score_sentences(const Document& doc, const ModelParams<float>& params,
                                    const TopicModel& topics, const Vocabulary& vocab,
                                    int topic_infer_iterations, std::uint64_t seed);

// Budgeted greedy selection: candidates in descending score order (ties to
// the lower index) are accepted while they fit the word budget; the first
// candidate alone exceeding the budget is truncated to it. Selected sentences
// come back in document order.
ExtractResult select_summary(const std::vector<double>& scores, const Document& doc,
                             int budget_words, double score_threshold = -1.0);

// Per-token attention weights for the selected sentences, max-normalized per
// sentence. Padded positions never appear.
AttentionReport attention_report(const Document& doc, const ModelParams<float>& params,
                                 const TopicModel& topics, const Vocabulary& vocab,
                                 const std::vector<int>& selected, int topic_infer_iterations,
                                 std::uint64_t seed);

// score_sentences + select_summary (+ attention weights attached).
ExtractResult extract_document(const Document& doc, const ModelParams<float>& params,
                               const TopicModel& topics, const Vocabulary& vocab,
                               const ExtractOptions& options);

// Number of whitespace-separated words in a raw sentence.
int count_words(const std::string& raw);

// The first `budget` whitespace words of the text.
std::string truncate_words(const std::string& raw, int budget);

}  // namespace extsumm
