#pragma once

#include "extsumm/corpus.hpp"
#include "extsumm/extractor.hpp"
#include "extsumm/math.hpp"

namespace extsumm {

struct SentenceGraph {
    Matrix<double> weights;  // symmetric, zero diagonal, non-negative
    double damping = 0.85;
    double tolerance = 1e-6;
};

struct BaselineOptions {
    int budget_words = 125;
    double damping = 0.85;
    double tolerance = 1e-6;
    int max_iterations = 200;
    double lexrank_threshold = 0.1;
    bool lexrank_continuous = false;  // keep cosine weights instead of binarizing
};

// Damped PageRank power iteration over the graph's row-normalized weights.
// Nodes without outgoing weight redistribute uniformly, so scores always sum
// to the node count.
std::vector<double> pagerank(const SentenceGraph& graph, int max_iterations);

// Sentence score = mean document-level probability of its content tokens
// (stopwords excluded).
ExtractResult freqsum(const Document& doc, int budget_words);

// Original TextRank: edge weight = token overlap / (ln|S_i| + ln|S_j|) with
// zero-weight edges for length-1 sentences, then damped PageRank.
ExtractResult textrank(const Document& doc, int budget_words, double damping = 0.85,
                       double tolerance = 1e-6);

// LexRank: tf-idf cosine edges thresholded (binarized by default), then
// damped PageRank. idf comes from sentence-level document frequencies within
// the document.
ExtractResult lexrank(const Document& doc, int budget_words, double threshold = 0.1,
                      double damping = 0.85, double tolerance = 1e-6, bool continuous = false);

// Graph builders, exposed for verification.
SentenceGraph textrank_graph(const Document& doc, double damping, double tolerance);
SentenceGraph lexrank_graph(const Document& doc, double threshold, double damping,
                            double tolerance, bool continuous);

}  // namespace extsumm
