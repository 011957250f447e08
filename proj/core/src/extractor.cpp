#include "extsumm/extractor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "extsumm/errors.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {
namespace {

std::vector<float> doc_topic_vector(const Document& doc, const TopicModel& topics,
                                    const Vocabulary& vocab, int infer_iterations,
                                    std::uint64_t seed) {
    const TokenBag bag = make_lda_bag(doc, vocab, /*stop_df_ratio=*/0.4,
                                      /*include_abstract=*/false);
    const auto p = infer_doc_topics(topics, bag, infer_iterations,
                                    derive_seed(seed, "extract-topics-" + doc.id));
    return std::vector<float>(p.begin(), p.end());
}

}  // namespace

int count_words(const std::string& raw) {
    std::istringstream in(raw);
    std::string word;
    int count = 0;
    while (in >> word) ++count;
    return count;
}

std::string truncate_words(const std::string& raw, int budget) {
    std::istringstream in(raw);
    std::string word;
    std::string out;
    int count = 0;
    while (count < budget && in >> word) {
        if (!out.empty()) out += ' ';
        out += word;
        ++count;
    }
    return out;
}

std::vector<double> score_sentences(const Document& doc, const ModelParams<float>& params,
                                    const TopicModel& topics, const Vocabulary& vocab,
                                    int topic_infer_iterations, std::uint64_t seed) {
    if (doc.body.empty()) throw DataError("score_sentences: document has no body: " + doc.id);
    const auto p = doc_topic_vector(doc, topics, vocab, topic_infer_iterations, seed);

    std::vector<double> scores;
    scores.reserve(doc.body.size());
    for (const auto& sentence : doc.body) {
        if (sentence.token_ids.empty()) {
            scores.push_back(0.0);
            continue;
        }
        const auto trace =
            forward<float>(sentence.token_ids, p, params, RunMode::kEval, 0.0f, nullptr);
        scores.push_back(static_cast<double>(trace.output));
    }
    return scores;
}

ExtractResult select_summary(const std::vector<double>& scores, const Document& doc,
                             int budget_words, double score_threshold) {
    if (scores.size() != doc.body.size()) {
        throw DataError("select_summary: scores not aligned with body sentences");
    }
    if (budget_words < 1) throw ConfigError("select_summary: budget must be >= 1");

    ExtractResult result;
    result.doc_id = doc.id;
    result.scores = scores;

    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        }
        return a < b;
    });

    int used = 0;
    bool truncated_first = false;
    std::string truncated_text;
    for (const int idx : order) {
        if (score_threshold >= 0.0 && scores[static_cast<std::size_t>(idx)] < score_threshold) {
            break;  // candidates are score-sorted, nothing below qualifies
        }
        const int words = count_words(doc.body[static_cast<std::size_t>(idx)].raw);
        if (result.selected.empty() && words > budget_words) {
            result.selected.push_back(idx);
            truncated_first = true;
            truncated_text = truncate_words(doc.body[static_cast<std::size_t>(idx)].raw,
                                            budget_words);
            used = budget_words;
            break;
        }
        if (used + words > budget_words) break;
        result.selected.push_back(idx);
        used += words;
    }

    std::sort(result.selected.begin(), result.selected.end());
    result.words_used = used;

    std::string summary;
    for (const int idx : result.selected) {
        if (!summary.empty()) summary += ' ';
        summary += truncated_first ? truncated_text
                                   : doc.body[static_cast<std::size_t>(idx)].raw;
    }
    result.summary = std::move(summary);
    return result;
}

AttentionReport attention_report(const Document& doc, const ModelParams<float>& params,
                                 const TopicModel& topics, const Vocabulary& vocab,
                                 const std::vector<int>& selected, int topic_infer_iterations,
                                 std::uint64_t seed) {
    AttentionReport report;
    report.doc_id = doc.id;
    const auto p = doc_topic_vector(doc, topics, vocab, topic_infer_iterations, seed);

    for (const int idx : selected) {
        const auto& sentence = doc.body.at(static_cast<std::size_t>(idx));
        if (sentence.token_ids.empty()) continue;
        const auto trace =
            forward<float>(sentence.token_ids, p, params, RunMode::kEval, 0.0f, nullptr);

        AttentionReportEntry entry;
        entry.sentence_index = idx;
        entry.raw = sentence.raw;
        const auto n = static_cast<std::size_t>(trace.true_len);
        double max_w = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            max_w = std::max(max_w, static_cast<double>(trace.attn_weights[l]));
        }
        for (std::size_t l = 0; l < n; ++l) {
            const double w = static_cast<double>(trace.attn_weights[l]);
            entry.tokens.push_back(
                {sentence.tokens[l], max_w > 0.0 ? w / max_w : 0.0});
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

std::string AttentionReport::to_text() const {
    std::ostringstream out;
    out << "attention report for " << doc_id << "\n";
    for (const auto& entry : entries) {
        out << "  [" << entry.sentence_index << "]";
        for (const auto& tw : entry.tokens) {
            out << ' ' << tw.token << '[';
            out.precision(3);
            out << std::fixed << tw.weight << ']';
        }
        out << "\n";
    }
    return out.str();
}

std::string AttentionReport::to_html() const {
    std::ostringstream out;
    out << "<html><head><meta charset=\"utf-8\"><title>" << doc_id << "</title></head><body>\n";
    out << "<h2>" << doc_id << "</h2>\n";
    for (const auto& entry : entries) {
        out << "<p data-sentence=\"" << entry.sentence_index << "\">";
        for (const auto& tw : entry.tokens) {
            out << "<span style=\"background: rgba(66, 134, 244, " << tw.weight << ")\">"
                << tw.token << "</span> ";
        }
        out << "</p>\n";
    }
    out << "</body></html>\n";
    return out.str();
}

ExtractResult extract_document(const Document& doc, const ModelParams<float>& params,
                               const TopicModel& topics, const Vocabulary& vocab,
                               const ExtractOptions& options) {
    const auto scores = score_sentences(doc, params, topics, vocab,
                                        options.topic_infer_iterations, options.seed);
    ExtractResult result =
        select_summary(scores, doc, options.budget_words, options.score_threshold);
    const auto report = attention_report(doc, params, topics, vocab, result.selected,
                                         options.topic_infer_iterations, options.seed);
    for (const auto& entry : report.entries) {
        result.attention.push_back(entry.tokens);
    }
    return result;
}

}  // namespace extsumm
