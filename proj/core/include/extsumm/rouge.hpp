#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace extsumm {

inline constexpr int kRougeMaxOrder = 4;

struct RougeOrderStats {
    double precision_mean = 0.0;
    double recall_mean = 0.0;
    double f1_mean = 0.0;
    std::vector<double> per_doc_precision;
    bool has_ci = false;
    double ci_low = 0.0;   // 95% percentile bootstrap over documents
    double ci_high = 0.0;
};

struct RougeScore {
    std::array<RougeOrderStats, kRougeMaxOrder> orders;  // index n-1 holds ROUGE-n
    std::vector<std::string> doc_ids;
};

struct RougeConfig {
    int max_order = kRougeMaxOrder;
    int length_limit = 125;  // raw words of the candidate, 0 = unlimited
    bool bootstrap = false;
    int resamples = 1000;
    std::uint64_t seed = 0;
};

// Lowercase, strip punctuation, split on whitespace, Porter-stem. Stopwords
// are retained; tokens that stem to nothing are dropped.
std::vector<std::string> rouge_preprocess(const std::string& text);

// Clipped n-gram precision. The candidate is truncated to its first
// length_limit tokens before n-gram extraction (0 = no limit); the reference
// never is. A candidate shorter than n scores 0.
double rouge_n_precision(const std::vector<std::string>& candidate,
                         const std::vector<std::string>& reference, int n, int length_limit = 0);

// Recall and F1 companions, same conventions.
double rouge_n_recall(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference, int n, int length_limit = 0);

// Corpus evaluation: candidates are truncated to length_limit raw words
// first, then preprocessed (stemming happens within the limit). Per-document
// scores, corpus means, and optional seed-deterministic bootstrap intervals.
// Every summary id must have a reference.
RougeScore evaluate_corpus(const std::map<std::string, std::string>& summaries,
                           const std::map<std::string, std::string>& references,
                           const RougeConfig& config);

}  // namespace extsumm
