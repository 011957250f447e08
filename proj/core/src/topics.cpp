#include "extsumm/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "extsumm/errors.hpp"
#include "extsumm/log.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {
namespace {

void collect_tokens(const std::vector<Sentence>& sentences, const Vocabulary& vocab,
                    std::int32_t df_cutoff, TokenBag& out) {
    for (const auto& s : sentences) {
        for (std::int32_t id : s.token_ids) {
            if (id == Vocabulary::kPad || id == Vocabulary::kUnk) continue;
            if (df_cutoff >= 0 && vocab.doc_freq(id) > df_cutoff) continue;
            out.push_back(id);
        }
    }
}

// Draws a topic from unnormalized cumulative weights.
int draw_topic(const std::vector<double>& cumulative, double u) {
    const double target = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    return static_cast<int>(it - cumulative.begin());
}

}  // namespace

bool TopicModel::counts_consistent() const {
    std::vector<std::int64_t> per_topic(static_cast<std::size_t>(num_topics), 0);
    for (std::size_t d = 0; d < doc_topic.rows(); ++d) {
        std::int64_t row_sum = 0;
        for (int k = 0; k < num_topics; ++k) {
            row_sum += doc_topic(d, static_cast<std::size_t>(k));
            per_topic[static_cast<std::size_t>(k)] += doc_topic(d, static_cast<std::size_t>(k));
        }
        if (row_sum != doc_len[d]) return false;
    }
    for (int k = 0; k < num_topics; ++k) {
        std::int64_t word_sum = 0;
        for (std::size_t v = 0; v < topic_word.cols(); ++v) {
            word_sum += topic_word(static_cast<std::size_t>(k), v);
        }
        if (word_sum != topic_total[static_cast<std::size_t>(k)]) return false;
        if (word_sum != per_topic[static_cast<std::size_t>(k)]) return false;
    }
    return true;
}

TokenBag make_lda_bag(const Document& doc, const Vocabulary& vocab, double stop_df_ratio,
                      bool include_abstract) {
    const std::int32_t cutoff =
        stop_df_ratio > 0.0
            ? static_cast<std::int32_t>(stop_df_ratio * static_cast<double>(vocab.doc_count()))
            : -1;
    TokenBag bag;
    collect_tokens(doc.body, vocab, cutoff, bag);
    if (include_abstract) {
        collect_tokens(doc.abstract, vocab, cutoff, bag);
        for (const auto& tok : tokenize(doc.title)) {
            const std::int32_t id = vocab.id(tok);
            if (id == Vocabulary::kPad || id == Vocabulary::kUnk) continue;
            if (cutoff >= 0 && vocab.doc_freq(id) > cutoff) continue;
            bag.push_back(id);
        }
    }
    return bag;
}

std::vector<TokenBag> make_lda_bags(const std::vector<Document>& docs, const Vocabulary& vocab,
                                    double stop_df_ratio, bool include_abstract) {
    std::vector<TokenBag> bags;
    bags.reserve(docs.size());
    for (const auto& doc : docs) {
        bags.push_back(make_lda_bag(doc, vocab, stop_df_ratio, include_abstract));
    }
    return bags;
}

TopicModel fit_lda_gibbs(const std::vector<TokenBag>& corpus, int num_topics, double alpha,
                         double beta, int iterations, std::uint64_t seed,
                         std::int32_t vocab_size) {
    if (num_topics < 1) throw ConfigError("fit_lda_gibbs: num_topics must be >= 1");
    if (iterations < 1) throw ConfigError("fit_lda_gibbs: iterations must be >= 1");
    std::size_t total_tokens = 0;
    for (const auto& bag : corpus) total_tokens += bag.size();
    if (total_tokens == 0) throw DataError("fit_lda_gibbs: corpus has no usable tokens");

    const auto M = static_cast<std::size_t>(num_topics);
    const auto V = static_cast<std::size_t>(vocab_size);

    TopicModel model;
    model.num_topics = num_topics;
    model.alpha = alpha;
    model.beta = beta;
    model.seed = seed;
    model.iterations_run = iterations;
    model.topic_word = Matrix<std::int32_t>(M, V, 0);
    model.topic_total.assign(M, 0);
    model.doc_topic = Matrix<std::int32_t>(corpus.size(), M, 0);
    model.doc_len.assign(corpus.size(), 0);

    Rng rng(derive_seed(seed, "lda-fit"));

    // Random initial assignments.
    std::vector<std::vector<int>> assignments(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto& bag = corpus[d];
        model.doc_len[d] = static_cast<std::int32_t>(bag.size());
        assignments[d].resize(bag.size());
        for (std::size_t j = 0; j < bag.size(); ++j) {
            const int k = static_cast<int>(rng.below(static_cast<std::uint32_t>(num_topics)));
            assignments[d][j] = k;
            ++model.doc_topic(d, static_cast<std::size_t>(k));
            ++model.topic_word(static_cast<std::size_t>(k), static_cast<std::size_t>(bag[j]));
            ++model.topic_total[static_cast<std::size_t>(k)];
        }
    }

    const double v_beta = static_cast<double>(V) * beta;
    std::vector<double> cumulative(M);
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            const auto& bag = corpus[d];
            for (std::size_t j = 0; j < bag.size(); ++j) {
                const auto w = static_cast<std::size_t>(bag[j]);
                const auto old_k = static_cast<std::size_t>(assignments[d][j]);
                --model.doc_topic(d, old_k);
                --model.topic_word(old_k, w);
                --model.topic_total[old_k];

                double acc = 0.0;
                for (std::size_t k = 0; k < M; ++k) {
                    const double word_part =
                        (model.topic_word(k, w) + beta) /
                        (static_cast<double>(model.topic_total[k]) + v_beta);
                    const double doc_part = model.doc_topic(d, k) + alpha;
                    acc += word_part * doc_part;
                    cumulative[k] = acc;
                }
                const auto new_k =
                    static_cast<std::size_t>(draw_topic(cumulative, rng.uniform()));
                assignments[d][j] = static_cast<int>(new_k);
                ++model.doc_topic(d, new_k);
                ++model.topic_word(new_k, w);
                ++model.topic_total[new_k];
            }
        }
    }

    model.phi = Matrix<double>(M, V, 0.0);
    for (std::size_t k = 0; k < M; ++k) {
        const double denom = static_cast<double>(model.topic_total[k]) + v_beta;
        for (std::size_t w = 0; w < V; ++w) {
            model.phi(k, w) = (model.topic_word(k, w) + beta) / denom;
        }
    }
    return model;
}

std::vector<double> infer_doc_topics(const TopicModel& model, const TokenBag& doc, int iterations,
                                     std::uint64_t seed) {
    const auto M = static_cast<std::size_t>(model.num_topics);
    if (doc.empty()) {
        log_debug("infer_doc_topics: empty document, returning uniform topic vector");
        return std::vector<double>(M, 1.0 / static_cast<double>(model.num_topics));
    }

    Rng rng(derive_seed(seed, "lda-infer"));
    std::vector<int> assignment(doc.size());
    std::vector<std::int32_t> counts(M, 0);
    for (std::size_t j = 0; j < doc.size(); ++j) {
        const int k = static_cast<int>(rng.below(static_cast<std::uint32_t>(model.num_topics)));
        assignment[j] = k;
        ++counts[static_cast<std::size_t>(k)];
    }

    std::vector<double> cumulative(M);
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t j = 0; j < doc.size(); ++j) {
            const auto w = static_cast<std::size_t>(doc[j]);
            const auto old_k = static_cast<std::size_t>(assignment[j]);
            --counts[old_k];
            double acc = 0.0;
            for (std::size_t k = 0; k < M; ++k) {
                acc += model.phi(k, w) * (counts[k] + model.alpha);
                cumulative[k] = acc;
            }
            const auto new_k = static_cast<std::size_t>(draw_topic(cumulative, rng.uniform()));
            assignment[j] = static_cast<int>(new_k);
            ++counts[new_k];
        }
    }

    std::vector<double> p(M);
    const double denom = static_cast<double>(doc.size()) +
                         static_cast<double>(model.num_topics) * model.alpha;
    for (std::size_t k = 0; k < M; ++k) {
        p[k] = (counts[k] + model.alpha) / denom;
    }
    return p;
}

std::vector<std::int32_t> top_words(const TopicModel& model, int topic, int k) {
    if (topic < 0 || topic >= model.num_topics) {
        throw ConfigError("top_words: topic index out of range: " + std::to_string(topic));
    }
    const std::int32_t V = model.vocab_size();
    std::vector<std::int32_t> ids(static_cast<std::size_t>(V));
    std::iota(ids.begin(), ids.end(), 0);
    const auto row = model.phi.row(static_cast<std::size_t>(topic));
    std::stable_sort(ids.begin(), ids.end(), [&](std::int32_t a, std::int32_t b) {
        return row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(b)];
    });
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), ids.size());
    ids.resize(take);
    return ids;
}

double per_token_log_likelihood(const TopicModel& model, const std::vector<TokenBag>& bags,
                                int infer_iterations, std::uint64_t seed) {
    double total_ll = 0.0;
    std::size_t total_tokens = 0;
    for (std::size_t d = 0; d < bags.size(); ++d) {
        const auto& bag = bags[d];
        if (bag.empty()) continue;
        const auto p = infer_doc_topics(model, bag, infer_iterations,
                                        derive_seed(seed, "heldout-" + std::to_string(d)));
        for (std::int32_t w : bag) {
            double lik = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k) {
                lik += p[k] * model.phi(k, static_cast<std::size_t>(w));
            }
            total_ll += std::log(lik);
            ++total_tokens;
        }
    }
    if (total_tokens == 0) throw DataError("per_token_log_likelihood: no tokens");
    return total_ll / static_cast<double>(total_tokens);
}

}  // namespace extsumm
