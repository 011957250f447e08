#include "extsumm/labeler.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "extsumm/errors.hpp"
#include "extsumm/io.hpp"
#include "extsumm/log.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {
namespace {

using json = nlohmann::json;

// Positive body indices with the cosine that claimed them. For each abstract
// sentence the single best body match (ties to the lower index) qualifies iff
// its cosine reaches the threshold; collisions keep the max cosine.
std::map<int, double> match_scores(const Document& doc, const TfIdfModel& tfidf,
                                   double threshold) {
    std::map<int, double> scores;
    if (doc.abstract.empty() || doc.body.empty()) return scores;

    std::vector<SparseVec> body_vecs;
    body_vecs.reserve(doc.body.size());
    for (const auto& s : doc.body) body_vecs.push_back(sentence_vector(s, tfidf));

    for (const auto& abs_sentence : doc.abstract) {
        const SparseVec abs_vec = sentence_vector(abs_sentence, tfidf);
        double best = -1.0;
        int best_idx = -1;
        for (std::size_t i = 0; i < body_vecs.size(); ++i) {
            const double sim = cosine(abs_vec, body_vecs[i]);
            if (sim > best) {
                best = sim;
                best_idx = static_cast<int>(i);
            }
        }
        if (best_idx >= 0 && best >= threshold) {
            auto [it, inserted] = scores.emplace(best_idx, best);
            if (!inserted && best > it->second) it->second = best;
        }
    }
    return scores;
}

// Mean idf-weighted term frequency per token, before per-document
// normalization.
double raw_salience(const Sentence& s, const TfIdfModel& tfidf) {
    if (s.token_ids.empty()) return 0.0;
    double sum = 0.0;
    for (std::int32_t id : s.token_ids) {
        if (id == Vocabulary::kPad || id == Vocabulary::kUnk) continue;
        sum += tfidf.idf.at(static_cast<std::size_t>(id));
    }
    return sum / static_cast<double>(s.token_ids.size());
}

}  // namespace

std::set<int> match_abstract(const Document& doc, const TfIdfModel& tfidf, double threshold) {
    std::set<int> positives;
    for (const auto& [idx, score] : match_scores(doc, tfidf, threshold)) positives.insert(idx);
    return positives;
}

std::vector<LabeledSentence> label_document(const Document& doc, const TfIdfModel& tfidf,
                                            double threshold) {
    const auto scores = match_scores(doc, tfidf, threshold);

    double max_salience = 0.0;
    std::vector<double> raw(doc.body.size(), 0.0);
    for (std::size_t i = 0; i < doc.body.size(); ++i) {
        raw[i] = raw_salience(doc.body[i], tfidf);
        max_salience = std::max(max_salience, raw[i]);
    }

    std::vector<LabeledSentence> out;
    out.reserve(doc.body.size());
    for (std::size_t i = 0; i < doc.body.size(); ++i) {
        LabeledSentence ls;
        ls.doc_id = doc.id;
        ls.sentence = doc.body[i];
        ls.salience = max_salience > 0.0 ? raw[i] / max_salience : 0.0;
        auto it = scores.find(static_cast<int>(i));
        if (it != scores.end()) {
            ls.label = 1;
            ls.match_score = it->second;
        }
        out.push_back(std::move(ls));
    }
    return out;
}

std::vector<LabeledSentence> filter_low_salience(std::vector<LabeledSentence> sentences,
                                                 double floor) {
    std::erase_if(sentences, [&](const LabeledSentence& s) {
        return s.label == 0 && s.salience < floor;
    });
    return sentences;
}

std::vector<LabeledSentence> subsample_negatives(std::vector<LabeledSentence> sentences, int ratio,
                                                 std::uint64_t seed) {
    if (ratio < 1) throw ConfigError("subsample_negatives: ratio must be >= 1");

    std::size_t positives = 0;
    std::vector<std::size_t> negative_idx;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (sentences[i].label == 1) {
            ++positives;
        } else {
            negative_idx.push_back(i);
        }
    }

    const std::size_t want = positives * static_cast<std::size_t>(ratio);
    if (negative_idx.size() <= want) return sentences;

    Rng rng(seed);
    rng.shuffle(negative_idx);
    negative_idx.resize(want);
    std::sort(negative_idx.begin(), negative_idx.end());

    std::vector<LabeledSentence> kept;
    kept.reserve(positives + want);
    std::size_t next_neg = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (sentences[i].label == 1) {
            kept.push_back(std::move(sentences[i]));
        } else if (next_neg < negative_idx.size() && negative_idx[next_neg] == i) {
            kept.push_back(std::move(sentences[i]));
            ++next_neg;
        }
    }
    return kept;
}

LabeledDataset build_training_set(const std::vector<Document>& corpus, const TfIdfModel& tfidf,
                                  const TopicModel& topics, const Vocabulary& vocab,
                                  const LabelingConfig& config) {
    LabeledDataset dataset;
    dataset.stats.documents = static_cast<int>(corpus.size());

    for (const auto& doc : corpus) {
        auto labeled = label_document(doc, tfidf, config.match_threshold);
        const auto total = labeled.size();

        std::size_t positives = 0;
        for (const auto& s : labeled) positives += s.label == 1 ? 1u : 0u;
        if (positives == 0) {
            ++dataset.stats.documents_without_positives;
            log_info("document " + doc.id + " has no positive sentences, skipped");
            continue;
        }

        labeled = filter_low_salience(std::move(labeled), config.salience_floor);
        dataset.stats.negatives_filtered += static_cast<std::int64_t>(total - labeled.size());

        const auto pre_subsample = labeled.size();
        labeled = subsample_negatives(std::move(labeled), config.negative_ratio,
                                      derive_seed(config.seed, "subsample-" + doc.id));
        dataset.stats.negatives_subsampled +=
            static_cast<std::int64_t>(pre_subsample - labeled.size());

        for (auto& s : labeled) {
            LabeledExample ex;
            ex.doc_id = doc.id;
            ex.sentence_index = s.sentence.position;
            ex.token_ids = s.sentence.token_ids;
            ex.label = s.label;
            if (s.label == 1) {
                ++dataset.stats.positives;
            } else {
                ++dataset.stats.negatives;
            }
            dataset.examples.push_back(std::move(ex));
        }

        const TokenBag bag = make_lda_bag(doc, vocab, /*stop_df_ratio=*/0.4,
                                          /*include_abstract=*/false);
        dataset.doc_topics[doc.id] = infer_doc_topics(
            topics, bag, config.topic_infer_iterations, derive_seed(config.seed, "topics-" + doc.id));
    }
    return dataset;
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path) {
    std::string lines;
    for (const auto& ex : dataset.examples) {
        json j{{"doc_id", ex.doc_id},
               {"sentence_index", ex.sentence_index},
               {"token_ids", ex.token_ids},
               {"label", ex.label},
               {"topic_probs_ref", ex.doc_id}};
        lines += j.dump();
        lines += '\n';
    }
    write_text_file(path, lines);

    std::string topic_lines;
    for (const auto& [doc_id, p] : dataset.doc_topics) {
        json j{{"doc_id", doc_id}, {"p", p}};
        topic_lines += j.dump();
        topic_lines += '\n';
    }
    auto topics_path = path;
    topics_path += ".topics.jsonl";
    write_text_file(topics_path, topic_lines);

    json stats{{"documents", dataset.stats.documents},
               {"documents_without_positives", dataset.stats.documents_without_positives},
               {"positives", dataset.stats.positives},
               {"negatives", dataset.stats.negatives},
               {"negatives_filtered", dataset.stats.negatives_filtered},
               {"negatives_subsampled", dataset.stats.negatives_subsampled}};
    auto stats_path = path;
    stats_path += ".stats.json";
    write_text_file(stats_path, stats.dump(2) + "\n");
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    LabeledDataset dataset;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(read_text_file(path))) {
        ++line_no;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
        }
        LabeledExample ex;
        ex.doc_id = j.at("doc_id").get<std::string>();
        ex.sentence_index = j.at("sentence_index").get<int>();
        ex.token_ids = j.at("token_ids").get<std::vector<std::int32_t>>();
        ex.label = j.at("label").get<int>();
        if (ex.label == 1) {
            ++dataset.stats.positives;
        } else {
            ++dataset.stats.negatives;
        }
        dataset.examples.push_back(std::move(ex));
    }

    auto topics_path = path;
    topics_path += ".topics.jsonl";
    if (std::filesystem::exists(topics_path)) {
        for (const auto& line : split_lines(read_text_file(topics_path))) {
            const json j = json::parse(line);
            dataset.doc_topics[j.at("doc_id").get<std::string>()] =
                j.at("p").get<std::vector<double>>();
        }
    }
    return dataset;
}

}  // namespace extsumm
