#include "extsumm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "extsumm/errors.hpp"
#include "stopwords.hpp"

namespace extsumm {
namespace {

std::vector<std::string> content_tokens(const Sentence& s) {
    std::vector<std::string> out;
    for (const auto& t : s.tokens) {
        if (!is_stopword(t)) out.push_back(t);
    }
    return out;
}

}  // namespace

std::vector<double> pagerank(const SentenceGraph& graph, int max_iterations) {
    const std::size_t n = graph.weights.rows();
    if (n == 0) return {};

    std::vector<double> out_weight(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out_weight[i] += graph.weights(i, j);
    }

    const double N = static_cast<double>(n);
    std::vector<double> score(n, 1.0);
    std::vector<double> next(n, 0.0);
    for (int iter = 0; iter < max_iterations; ++iter) {
        double dangling = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (out_weight[j] <= 0.0) dangling += score[j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double incoming = dangling / N;
            for (std::size_t j = 0; j < n; ++j) {
                if (out_weight[j] > 0.0 && graph.weights(j, i) > 0.0) {
                    incoming += graph.weights(j, i) / out_weight[j] * score[j];
                }
            }
            next[i] = (1.0 - graph.damping) + graph.damping * incoming;
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta += std::abs(next[i] - score[i]);
        score.swap(next);
        if (delta < graph.tolerance) break;
    }
    return score;
}

ExtractResult freqsum(const Document& doc, int budget_words) {
    if (doc.body.empty()) throw DataError("freqsum: document has no body: " + doc.id);

    std::map<std::string, double> counts;
    double total = 0.0;
    for (const auto& s : doc.body) {
        for (const auto& t : content_tokens(s)) {
            counts[t] += 1.0;
            total += 1.0;
        }
    }

    std::vector<double> scores(doc.body.size(), 0.0);
    if (total > 0.0) {
        for (std::size_t i = 0; i < doc.body.size(); ++i) {
            const auto tokens = content_tokens(doc.body[i]);
            if (tokens.empty()) continue;
            double sum = 0.0;
            for (const auto& t : tokens) sum += counts[t] / total;
            scores[i] = sum / static_cast<double>(tokens.size());
        }
    }
    return select_summary(scores, doc, budget_words);
}

SentenceGraph textrank_graph(const Document& doc, double damping, double tolerance) {
    const std::size_t n = doc.body.size();
    SentenceGraph graph;
    graph.damping = damping;
    graph.tolerance = tolerance;
    graph.weights = Matrix<double>(n, n, 0.0);

    std::vector<std::set<std::string>> token_sets(n);
    std::vector<std::size_t> lengths(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        token_sets[i] = std::set<std::string>(doc.body[i].tokens.begin(),
                                              doc.body[i].tokens.end());
        lengths[i] = doc.body[i].tokens.size();
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // ln(1) = 0 denominators from length-1 sentences get no edge.
            if (lengths[i] < 2 || lengths[j] < 2) continue;
            std::size_t overlap = 0;
            for (const auto& t : token_sets[i]) {
                if (token_sets[j].contains(t)) ++overlap;
            }
            if (overlap == 0) continue;
            const double denom = std::log(static_cast<double>(lengths[i])) +
                                 std::log(static_cast<double>(lengths[j]));
            const double w = static_cast<double>(overlap) / denom;
            graph.weights(i, j) = w;
            graph.weights(j, i) = w;
        }
    }
    return graph;
}

ExtractResult textrank(const Document& doc, int budget_words, double damping, double tolerance) {
    if (doc.body.empty()) throw DataError("textrank: document has no body: " + doc.id);
    const auto graph = textrank_graph(doc, damping, tolerance);
    const auto scores = pagerank(graph, 200);
    return select_summary(scores, doc, budget_words);
}

SentenceGraph lexrank_graph(const Document& doc, double threshold, double damping,
                            double tolerance, bool continuous) {
    const std::size_t n = doc.body.size();
    SentenceGraph graph;
    graph.damping = damping;
    graph.tolerance = tolerance;
    graph.weights = Matrix<double>(n, n, 0.0);

    // Sentence-level tf-idf within the document: df counts sentences
    // containing the (content) token.
    std::map<std::string, int> df;
    std::vector<std::map<std::string, double>> tf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& t : content_tokens(doc.body[i])) tf[i][t] += 1.0;
        for (const auto& [t, c] : tf[i]) ++df[t];
    }
    const double total = static_cast<double>(n);
    auto idf = [&](const std::string& t) {
        return std::log((1.0 + total) / (1.0 + static_cast<double>(df[t]))) + 1.0;
    };

    std::vector<std::map<std::string, double>> vecs(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [t, c] : tf[i]) vecs[i][t] = c * idf(t);
    }
    auto cos = [](const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (const auto& [t, w] : a) {
            na += w * w;
            auto it = b.find(t);
            if (it != b.end()) dot += w * it->second;
        }
        for (const auto& [t, w] : b) nb += w * w;
        if (na == 0.0 || nb == 0.0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };

    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sim = cos(vecs[i], vecs[j]);
            if (sim >= threshold) {
                const double w = continuous ? sim : 1.0;
                graph.weights(i, j) = w;
                graph.weights(j, i) = w;
            }
        }
    }
    return graph;
}

ExtractResult lexrank(const Document& doc, int budget_words, double threshold, double damping,
                      double tolerance, bool continuous) {
    if (doc.body.empty()) throw DataError("lexrank: document has no body: " + doc.id);
    const auto graph = lexrank_graph(doc, threshold, damping, tolerance, continuous);
    const auto scores = pagerank(graph, 200);
    return select_summary(scores, doc, budget_words);
}

}  // namespace extsumm
