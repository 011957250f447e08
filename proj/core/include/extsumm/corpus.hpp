#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace extsumm {

struct Sentence {
    std::string raw;
    std::vector<std::string> tokens;
    std::vector<std::int32_t> token_ids;  // filled once a Vocabulary exists
    int position = 0;                     // index within the owning list
};

struct SectionBoundary {
    std::string heading;
    int start = 0;  // index into body sentences
};

struct Document {
    std::string id;
    std::string title;
    std::vector<Sentence> abstract;
    std::vector<Sentence> body;
    std::vector<SectionBoundary> sections;
};

class Vocabulary {
public:
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;

    Vocabulary();

    // Closes the vocabulary over all body+abstract+title tokens with corpus
    // frequency >= min_count. Ids are dense, ordered by descending frequency
    // (ties lexicographic) after the reserved PAD/UNK slots.
    static Vocabulary build(const std::vector<Document>& docs, int min_count);

    std::int32_t id(std::string_view token) const;  // kUnk when absent
    const std::string& token(std::int32_t id) const;
    bool contains(std::string_view token) const { return lookup_.contains(std::string(token)); }

    std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }
    int doc_count() const { return doc_count_; }
    int min_count() const { return min_count_; }
    std::int32_t doc_freq(std::int32_t id) const { return doc_freq_.at(static_cast<std::size_t>(id)); }

    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

private:
    std::unordered_map<std::string, std::int32_t> lookup_;
    std::vector<std::string> tokens_;     // id -> token
    std::vector<std::int32_t> doc_freq_;  // id -> number of documents containing it
    int doc_count_ = 0;
    int min_count_ = 1;
};

struct TfIdfModel {
    std::vector<double> idf;  // per vocabulary id; PAD/UNK carry 0
    std::string mode = "smoothed-ln";
};

// Sparse sentence vector: (vocab id, weight) pairs sorted by id.
using SparseVec = std::vector<std::pair<std::int32_t, double>>;

// Rule-based sentence boundary detection: splits after ./!/? followed by
// whitespace and an uppercase letter or digit, with an abbreviation guard.
std::vector<std::string> split_sentences(std::string_view text);

// Lowercases, splits on non-alphanumeric boundaries, drops punctuation-only
// runs, and maps all-digit runs to the reserved NUM class.
std::vector<std::string> tokenize(std::string_view sentence);

// Builds a Document from raw text: sentences are split, tokenized, and
// sentences with no tokens dropped. Token ids are left empty.
Document make_document(std::string id, std::string title, std::string_view abstract_text,
                       const std::vector<std::pair<std::string, std::string>>& sections);

// Assigns token ids for every sentence in every document (OOV -> UNK).
void assign_token_ids(std::vector<Document>& docs, const Vocabulary& vocab);

// Reads a JSON-Lines corpus file, splits and tokenizes, builds the vocabulary
// and assigns ids. Records missing abstract/body are skipped with a warning;
// malformed JSON aborts with the offending line number.
std::pair<std::vector<Document>, Vocabulary> ingest_corpus(const std::filesystem::path& path,
                                                           int min_count);

// Smoothed idf: ln((1 + N) / (1 + df)) + 1, zero for PAD/UNK.
TfIdfModel compute_tfidf(const std::vector<Document>& corpus, const Vocabulary& vocab);

// L2-normalized tf-idf bag of words; PAD/UNK excluded. All-OOV sentences give
// an empty vector, whose cosine with anything is 0 by convention.
SparseVec sentence_vector(const Sentence& sentence, const TfIdfModel& tfidf);

double cosine(const SparseVec& u, const SparseVec& v);
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace extsumm
