#include "fixtures.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include <nlohmann/json.hpp>

#include "extsumm/io.hpp"
#include "extsumm/rng.hpp"

namespace extsumm::testfix {
namespace {

using json = nlohmann::json;

// Letter-only pseudowords keep the tokenizer trivial (no NUM mapping).
std::string pseudoword(Rng& rng, int syllables = 3) {
    static const std::vector<std::string> parts = {
        "ba", "ce", "di", "fo", "gu", "ha", "ki", "lo", "mu", "ne",
        "po", "ra", "su", "ta", "vu", "wa", "zo", "ye", "qui", "sto",
    };
    std::string w;
    for (int i = 0; i < syllables; ++i) {
        w += parts[rng.below(static_cast<std::uint32_t>(parts.size()))];
    }
    return w;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

int word_count(const std::string& s) {
    std::istringstream in(s);
    std::string w;
    int n = 0;
    while (in >> w) ++n;
    return n;
}

}  // namespace

void write_corpus_jsonl(const std::vector<RawRecord>& records,
                        const std::filesystem::path& path) {
    std::string lines;
    for (const auto& r : records) {
        json sections = json::array();
        for (const auto& [heading, text] : r.sections) {
            sections.push_back({{"heading", heading}, {"text", text}});
        }
        json j{{"id", r.id}, {"title", r.title}, {"abstract", r.abstract_text},
               {"sections", sections}};
        lines += j.dump();
        lines += '\n';
    }
    write_text_file(path, lines);
}

PlantedCorpus make_planted_corpus(int num_docs, std::uint64_t seed) {
    PlantedCorpus corpus;
    Rng rng(derive_seed(seed, "planted-corpus"));

    // Filler lexicon shared by every document; dominates token frequencies so
    // frequency-based scoring prefers filler sentences.
    std::vector<std::string> filler_pool;
    for (int i = 0; i < 18; ++i) filler_pool.push_back(pseudoword(rng, 2));

    // Cue prefixes for the summary-worthy sentences.
    const std::vector<std::vector<std::string>> cues = {
        {"in", "this", "paper", "we", "propose"},
        {"experimental", "results", "show", "that"},
        {"our", "proposed", "framework", "combines"},
        {"we", "further", "analyze", "how"},
        {"these", "findings", "suggest", "that"},
    };

    for (int d = 0; d < num_docs; ++d) {
        RawRecord rec;
        rec.id = "doc" + std::to_string(d);

        // Per-document content words; the letter suffix (digits would become
        // NUM tokens) keeps them unique across documents.
        std::string suffix;
        for (int v = d;; v /= 26) {
            suffix += static_cast<char>('a' + v % 26);
            if (v < 26) break;
        }
        std::vector<std::string> content;
        for (int i = 0; i < 10; ++i) {
            content.push_back(pseudoword(rng) + suffix + "z");
        }
        rec.title = capitalize(content[0]) + " study " + content[1];

        // Five 23-word abstract sentences: cue prefix + content words.
        std::vector<std::string> abstract_sentences;
        for (std::size_t k = 0; k < cues.size(); ++k) {
            std::vector<std::string> words = cues[k];
            std::size_t ci = 2 * k;
            while (words.size() < 23) {
                words.push_back(content[ci % content.size()]);
                ++ci;
            }
            std::string sentence = capitalize(join_words(words)) + ".";
            assert(word_count(sentence) == 23);
            abstract_sentences.push_back(std::move(sentence));
        }
        rec.abstract_text = join_words(abstract_sentences);

        // Fillers: 21 words each, all drawn from the shared pool with "the"
        // connectors.
        std::vector<std::string> fillers;
        for (int f = 0; f < corpus.fillers_per_doc; ++f) {
            std::vector<std::string> words;
            while (words.size() < 21) {
                words.push_back("the");
                words.push_back(filler_pool[rng.below(static_cast<std::uint32_t>(
                    filler_pool.size()))]);
                words.push_back(filler_pool[rng.below(static_cast<std::uint32_t>(
                    filler_pool.size()))]);
            }
            words.resize(21);
            fillers.push_back(capitalize(join_words(words)) + ".");
        }

        // Interleave: copies of the abstract sentences at spread positions.
        const int total = corpus.fillers_per_doc + corpus.positives_per_doc;
        std::vector<std::string> body(static_cast<std::size_t>(total));
        std::vector<int> planted_idx;
        const int stride = total / corpus.positives_per_doc;
        for (int k = 0; k < corpus.positives_per_doc; ++k) {
            planted_idx.push_back(k * stride + 1);
        }
        std::size_t next_filler = 0;
        for (int i = 0; i < total; ++i) {
            const auto it = std::find(planted_idx.begin(), planted_idx.end(), i);
            if (it != planted_idx.end()) {
                body[static_cast<std::size_t>(i)] =
                    abstract_sentences[static_cast<std::size_t>(it - planted_idx.begin())];
            } else {
                body[static_cast<std::size_t>(i)] = fillers[next_filler++];
            }
        }

        // Two sections, split midway.
        const int half = total / 2;
        std::vector<std::string> first(body.begin(), body.begin() + half);
        std::vector<std::string> second(body.begin() + half, body.end());
        rec.sections.emplace_back("introduction", join_words(first));
        rec.sections.emplace_back("method", join_words(second));

        corpus.planted[rec.id] = planted_idx;
        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

std::vector<RawRecord> make_labeler_corpus(int num_docs, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "labeler-corpus"));

    std::vector<std::string> pool;
    for (int i = 0; i < 120; ++i) pool.push_back(pseudoword(rng));

    auto random_sentence = [&](int min_words, int max_words) {
        const int n = min_words + static_cast<int>(rng.below(
                                      static_cast<std::uint32_t>(max_words - min_words + 1)));
        std::vector<std::string> words;
        for (int i = 0; i < n; ++i) {
            words.push_back(pool[rng.below(static_cast<std::uint32_t>(pool.size()))]);
        }
        return capitalize(join_words(words)) + ".";
    };

    std::vector<RawRecord> records;
    for (int d = 0; d < num_docs; ++d) {
        RawRecord rec;
        rec.id = "rand" + std::to_string(d);
        rec.title = "Random study " + std::to_string(d);

        std::vector<std::string> abstract;
        std::vector<std::string> planted;
        const int abstract_size = 2 + static_cast<int>(rng.below(3));
        for (int k = 0; k < abstract_size; ++k) {
            std::string s = random_sentence(8, 14);
            abstract.push_back(s);
            const double roll = rng.uniform();
            if (roll < 0.6) {
                planted.push_back(s);  // exact copy -> cosine 1
            } else if (roll < 0.8) {
                // Perturbed copy: swap two words for fresh ones; may or may
                // not clear the threshold.
                std::istringstream in(s);
                std::vector<std::string> words;
                std::string w;
                while (in >> w) words.push_back(w);
                for (int swap = 0; swap < 2 && words.size() > 2; ++swap) {
                    words[rng.below(static_cast<std::uint32_t>(words.size()))] =
                        pool[rng.below(static_cast<std::uint32_t>(pool.size()))];
                }
                planted.push_back(join_words(words));
            }
        }
        rec.abstract_text = join_words(abstract);

        std::vector<std::string> body;
        const int fillers = 25 + static_cast<int>(rng.below(16));
        for (int i = 0; i < fillers; ++i) body.push_back(random_sentence(6, 12));
        for (const auto& p : planted) {
            const auto pos = rng.below(static_cast<std::uint32_t>(body.size() + 1));
            body.insert(body.begin() + pos, p);
        }
        rec.sections.emplace_back("content", join_words(body));
        records.push_back(std::move(rec));
    }
    return records;
}

PlantedTopics make_planted_topics(int topics, int vocab, int docs, int doc_len,
                                  std::uint64_t seed) {
    Rng rng(derive_seed(seed, "planted-topics"));
    PlantedTopics out;
    out.vocab_size = vocab;
    out.planted_phi = Matrix<double>(static_cast<std::size_t>(topics),
                                     static_cast<std::size_t>(vocab), 0.0);

    // Each topic puts 90% of its mass on its own contiguous word block.
    const int block = vocab / topics;
    for (int k = 0; k < topics; ++k) {
        std::vector<double> weights(static_cast<std::size_t>(vocab), 0.0);
        double total = 0.0;
        for (int v = 0; v < vocab; ++v) {
            const bool in_block = v >= k * block && v < (k + 1) * block;
            weights[static_cast<std::size_t>(v)] =
                (in_block ? 0.9 : 0.1) * (0.5 + rng.uniform());
            total += weights[static_cast<std::size_t>(v)];
        }
        for (int v = 0; v < vocab; ++v) {
            out.planted_phi(static_cast<std::size_t>(k), static_cast<std::size_t>(v)) =
                weights[static_cast<std::size_t>(v)] / total;
        }
    }

    for (int k = 0; k < topics; ++k) {
        std::vector<std::int32_t> ids(static_cast<std::size_t>(vocab));
        for (int v = 0; v < vocab; ++v) ids[static_cast<std::size_t>(v)] = v;
        std::stable_sort(ids.begin(), ids.end(), [&](std::int32_t a, std::int32_t b) {
            return out.planted_phi(static_cast<std::size_t>(k), static_cast<std::size_t>(a)) >
                   out.planted_phi(static_cast<std::size_t>(k), static_cast<std::size_t>(b));
        });
        ids.resize(10);
        out.planted_top_words.push_back(std::move(ids));
    }

    for (int d = 0; d < docs; ++d) {
        const int dominant = d % topics;
        TokenBag bag;
        for (int t = 0; t < doc_len; ++t) {
            // 85% of tokens from the dominant topic, the rest from a random one.
            const int k = rng.uniform() < 0.85
                              ? dominant
                              : static_cast<int>(rng.below(static_cast<std::uint32_t>(topics)));
            const double u = rng.uniform();
            double acc = 0.0;
            std::int32_t word = vocab - 1;
            for (int v = 0; v < vocab; ++v) {
                acc += out.planted_phi(static_cast<std::size_t>(k), static_cast<std::size_t>(v));
                if (u < acc) {
                    word = v;
                    break;
                }
            }
            bag.push_back(word);
        }
        out.bags.push_back(std::move(bag));
    }
    return out;
}

ModelConfig tiny_model_config(std::int32_t vocab) {
    ModelConfig config;
    config.dims.vocab = vocab;
    config.dims.embed = 8;
    config.dims.hidden = 12;
    config.dims.context = 4;
    config.dims.topics = 6;
    config.dims.max_len = 7;
    config.dims.classifier = 5;
    return config;
}

std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / "extsumm-tests" / tag;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace extsumm::testfix
