#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "extsumm/corpus.hpp"
#include "extsumm/topics.hpp"

namespace extsumm {

struct LabeledSentence {
    std::string doc_id;
    Sentence sentence;
    int label = 0;  // 1 = summary-worthy
    std::optional<double> match_score;  // cosine that produced a positive label
    double salience = 0.0;              // per-document max-normalized tf-idf score
};

struct LabelingConfig {
    double match_threshold = 0.75;
    double salience_floor = 0.05;
    int negative_ratio = 4;
    std::uint64_t seed = 0;
    // Gibbs iterations when attaching per-document topic vectors.
    int topic_infer_iterations = 50;
};

struct LabeledExample {
    std::string doc_id;
    int sentence_index = 0;  // position in the document body
    std::vector<std::int32_t> token_ids;
    int label = 0;
};

struct DatasetStats {
    int documents = 0;
    int documents_without_positives = 0;
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    std::int64_t negatives_filtered = 0;    // dropped by the salience floor
    std::int64_t negatives_subsampled = 0;  // dropped by the 1:ratio subsampling
};

struct LabeledDataset {
    std::vector<LabeledExample> examples;
    std::map<std::string, std::vector<double>> doc_topics;
    DatasetStats stats;
};

// For each abstract sentence, the best-matching body sentence (tf-idf cosine,
// ties to the lower body index) enters the positive set iff its cosine is at
// least `threshold`. Duplicates collapse.
std::set<int> match_abstract(const Document& doc, const TfIdfModel& tfidf, double threshold);

// Labels one document's body sentences and fills salience values; no
// filtering or subsampling.
std::vector<LabeledSentence> label_document(const Document& doc, const TfIdfModel& tfidf,
                                            double threshold);

// Removes negatives with salience below the floor; positives always survive.
std::vector<LabeledSentence> filter_low_salience(std::vector<LabeledSentence> sentences,
                                                 double floor);

// Keeps all positives and a uniform sample (without replacement) of
// ratio * #positives negatives, preserving document order. Deterministic
// under seed.
std::vector<LabeledSentence> subsample_negatives(std::vector<LabeledSentence> sentences, int ratio,
                                                 std::uint64_t seed);

// Full pipeline: match -> filter -> subsample per document, plus per-document
// topic vectors inferred from body-only tokens. Documents with no positives
// contribute nothing.
LabeledDataset build_training_set(const std::vector<Document>& corpus, const TfIdfModel& tfidf,
                                  const TopicModel& topics, const Vocabulary& vocab,
                                  const LabelingConfig& config);

// JSON-Lines dataset persistence: one record per example plus a topics
// sidecar (<path>.topics.jsonl) and a stats sidecar (<path>.stats.json).
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path);
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace extsumm
