#include "extsumm/rouge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "extsumm/errors.hpp"
#include "extsumm/rng.hpp"
#include "porter.hpp"

namespace extsumm {
namespace {

// n-gram counts keyed by the joined token string.
std::map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n,
                                        int length_limit) {
    std::map<std::string, int> counts;
    const std::size_t limit = length_limit > 0
                                  ? std::min(tokens.size(), static_cast<std::size_t>(length_limit))
                                  : tokens.size();
    if (limit < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= limit; ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key += ' ';
            key += tokens[i + static_cast<std::size_t>(j)];
        }
        ++counts[key];
    }
    return counts;
}

struct OverlapResult {
    long long clipped = 0;
    long long candidate_total = 0;
    long long reference_total = 0;
};

OverlapResult clipped_overlap(const std::vector<std::string>& candidate,
                              const std::vector<std::string>& reference, int n,
                              int length_limit) {
    OverlapResult r;
    const auto cand = ngram_counts(candidate, n, length_limit);
    const auto ref = ngram_counts(reference, n, 0);
    for (const auto& [gram, count] : cand) {
        r.candidate_total += count;
        auto it = ref.find(gram);
        if (it != ref.end()) r.clipped += std::min(count, it->second);
    }
    for (const auto& [gram, count] : ref) r.reference_total += count;
    return r;
}

std::string truncate_to_words(const std::string& text, int limit) {
    if (limit <= 0) return text;
    std::istringstream in(text);
    std::string word, out;
    int count = 0;
    while (count < limit && in >> word) {
        if (!out.empty()) out += ' ';
        out += word;
        ++count;
    }
    return out;
}

double percentile(std::vector<double> sorted_values, double q) {
    // Linear interpolation between closest ranks.
    if (sorted_values.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}

}  // namespace

std::vector<std::string> rouge_preprocess(const std::string& text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (const char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) != 0) {
            cleaned += static_cast<char>(std::tolower(uc));
        } else {
            cleaned += ' ';
        }
    }
    std::vector<std::string> tokens;
    std::istringstream in(cleaned);
    std::string word;
    while (in >> word) {
        std::string stemmed = porter_stem(word);
        if (!stemmed.empty()) tokens.push_back(std::move(stemmed));
    }
    return tokens;
}

double rouge_n_precision(const std::vector<std::string>& candidate,
                         const std::vector<std::string>& reference, int n, int length_limit) {
    if (n < 1) throw ConfigError("rouge_n_precision: n must be >= 1");
    const auto r = clipped_overlap(candidate, reference, n, length_limit);
    if (r.candidate_total == 0) return 0.0;
    return static_cast<double>(r.clipped) / static_cast<double>(r.candidate_total);
}

double rouge_n_recall(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference, int n, int length_limit) {
    if (n < 1) throw ConfigError("rouge_n_recall: n must be >= 1");
    const auto r = clipped_overlap(candidate, reference, n, length_limit);
    if (r.reference_total == 0) return 0.0;
    return static_cast<double>(r.clipped) / static_cast<double>(r.reference_total);
}

RougeScore evaluate_corpus(const std::map<std::string, std::string>& summaries,
                           const std::map<std::string, std::string>& references,
                           const RougeConfig& config) {
    RougeScore score;
    const int max_order = std::min(config.max_order, kRougeMaxOrder);

    for (const auto& [doc_id, summary] : summaries) {
        auto ref_it = references.find(doc_id);
        if (ref_it == references.end()) {
            throw DataError("evaluate_corpus: no reference for document " + doc_id);
        }
        // -l semantics: truncate on raw word boundaries first, then stem
        // within the limit.
        const auto cand_tokens = rouge_preprocess(truncate_to_words(summary, config.length_limit));
        const auto ref_tokens = rouge_preprocess(ref_it->second);

        score.doc_ids.push_back(doc_id);
        for (int n = 1; n <= max_order; ++n) {
            auto& stats = score.orders[static_cast<std::size_t>(n - 1)];
            const auto overlap = clipped_overlap(cand_tokens, ref_tokens, n, 0);
            const double p = overlap.candidate_total > 0
                                 ? static_cast<double>(overlap.clipped) /
                                       static_cast<double>(overlap.candidate_total)
                                 : 0.0;
            const double r = overlap.reference_total > 0
                                 ? static_cast<double>(overlap.clipped) /
                                       static_cast<double>(overlap.reference_total)
                                 : 0.0;
            stats.per_doc_precision.push_back(p);
            stats.precision_mean += p;
            stats.recall_mean += r;
            stats.f1_mean += (p > 0.0 && r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
        }
    }

    const auto docs = static_cast<double>(score.doc_ids.size());
    if (docs > 0) {
        for (int n = 1; n <= max_order; ++n) {
            auto& stats = score.orders[static_cast<std::size_t>(n - 1)];
            stats.precision_mean /= docs;
            stats.recall_mean /= docs;
            stats.f1_mean /= docs;
        }
    }

    if (config.bootstrap && !score.doc_ids.empty()) {
        const auto N = score.doc_ids.size();
        for (int n = 1; n <= max_order; ++n) {
            auto& stats = score.orders[static_cast<std::size_t>(n - 1)];
            std::vector<double> means;
            means.reserve(static_cast<std::size_t>(config.resamples));
            for (int r = 0; r < config.resamples; ++r) {
                Rng rng(derive_seed(config.seed, "bootstrap-" + std::to_string(n) + "-" +
                                                     std::to_string(r)));
                double sum = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    sum += stats.per_doc_precision[rng.below(static_cast<std::uint32_t>(N))];
                }
                means.push_back(sum / static_cast<double>(N));
            }
            std::sort(means.begin(), means.end());
            stats.has_ci = true;
            stats.ci_low = percentile(means, 0.025);
            stats.ci_high = percentile(means, 0.975);
        }
    }
    return score;
}

}  // namespace extsumm
