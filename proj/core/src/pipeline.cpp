#include "extsumm/pipeline.hpp"

#include <chrono>
#include <sstream>

#include <nlohmann/json.hpp>

#include "extsumm/baselines.hpp"
#include "extsumm/checkpoint.hpp"
#include "extsumm/errors.hpp"
#include "extsumm/io.hpp"
#include "extsumm/log.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct ManifestWriter {
    ManifestWriter(std::string cmd, const PipelineConfig& cfg, std::filesystem::path d)
        : command(std::move(cmd)), config(cfg), dir(std::move(d)) {}

    std::string command;
    const PipelineConfig& config;
    std::filesystem::path dir;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    Clock::time_point started = Clock::now();

    void write() const {
        json j;
        j["command"] = command;
        j["config_hash"] = checksum_hex(config.hash());
        j["seed"] = config.seed;
        json in = json::array();
        for (const auto& p : inputs) {
            in.push_back({{"path", p.string()}, {"checksum", checksum_hex(file_checksum(p))}});
        }
        j["inputs"] = std::move(in);
        json out = json::array();
        for (const auto& p : outputs) {
            out.push_back({{"path", p.string()}, {"checksum", checksum_hex(file_checksum(p))}});
        }
        j["outputs"] = std::move(out);
        j["duration_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                                                 started)
                               .count();
        write_text_file(dir / (command + ".manifest.json"), j.dump(2) + "\n");
    }
};

void require_file(const std::filesystem::path& path, const std::string& what) {
    if (!std::filesystem::exists(path)) {
        throw DataError("missing " + what + " file: " + path.string());
    }
}

std::pair<std::vector<Document>, Vocabulary> load_corpus_with_vocab(
    const PipelineConfig& config, const std::filesystem::path& corpus_path,
    const std::filesystem::path& vocab_path) {
    require_file(corpus_path, "corpus");
    require_file(vocab_path, "vocabulary");
    auto [docs, built_vocab] = ingest_corpus(corpus_path, config.corpus_min_count);
    Vocabulary vocab = Vocabulary::load(vocab_path);
    assign_token_ids(docs, vocab);
    return {std::move(docs), std::move(vocab)};
}

std::string render_double(double v) {
    std::ostringstream out;
    out.precision(4);
    out << std::fixed << v;
    return out.str();
}

}  // namespace

StageResult run_ingest(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                       const std::filesystem::path& out_dir) {
    ManifestWriter manifest{"ingest", config, out_dir};
    manifest.inputs = {corpus_path};
    require_file(corpus_path, "corpus");

    auto [docs, vocab] = ingest_corpus(corpus_path, config.corpus_min_count);

    const auto vocab_path = out_dir / "vocab.json";
    vocab.save(vocab_path);

    std::size_t body_sentences = 0, abstract_sentences = 0, tokens = 0;
    for (const auto& d : docs) {
        body_sentences += d.body.size();
        abstract_sentences += d.abstract.size();
        for (const auto& s : d.body) tokens += s.tokens.size();
        for (const auto& s : d.abstract) tokens += s.tokens.size();
    }
    json stats{{"documents", docs.size()},
               {"body_sentences", body_sentences},
               {"abstract_sentences", abstract_sentences},
               {"tokens", tokens},
               {"vocabulary_size", vocab.size()},
               {"min_count", config.corpus_min_count}};
    const auto stats_path = out_dir / "corpus_stats.json";
    write_text_file(stats_path, stats.dump(2) + "\n");

    manifest.outputs = {vocab_path, stats_path};
    manifest.write();
    return {manifest.outputs};
}

StageResult run_train_embeddings(const PipelineConfig& config,
                                 const std::filesystem::path& corpus_path,
                                 const std::filesystem::path& vocab_path,
                                 const std::filesystem::path& out_path) {
    ManifestWriter manifest{"train-embeddings", config, out_path.parent_path()};
    manifest.inputs = {corpus_path, vocab_path};

    auto [docs, vocab] = load_corpus_with_vocab(config, corpus_path, vocab_path);
    const auto sequences = embedding_sequences(docs, vocab);
    const auto matrix = train_skipgram(sequences, vocab, config.skipgram());
    save_embeddings(matrix, out_path);

    manifest.outputs = {out_path};
    manifest.write();
    return {manifest.outputs};
}

StageResult run_train_topics(const PipelineConfig& config,
                             const std::filesystem::path& corpus_path,
                             const std::filesystem::path& vocab_path,
                             const std::filesystem::path& out_path) {
    ManifestWriter manifest{"train-topics", config, out_path.parent_path()};
    manifest.inputs = {corpus_path, vocab_path};

    auto [docs, vocab] = load_corpus_with_vocab(config, corpus_path, vocab_path);
    const auto bags = make_lda_bags(docs, vocab, config.topics_stop_df_ratio,
                                    /*include_abstract=*/true);
    const auto model =
        fit_lda_gibbs(bags, config.topics_count, config.resolved_topics_alpha(),
                      config.topics_beta, config.topics_iterations,
                      derive_seed(config.seed, "topics"), vocab.size());
    save_topics(model, out_path);

    manifest.outputs = {out_path};
    manifest.write();
    return {manifest.outputs};
}

StageResult run_label(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                      const std::filesystem::path& vocab_path,
                      const std::filesystem::path& topics_path,
                      const std::filesystem::path& out_path) {
    ManifestWriter manifest{"label", config, out_path.parent_path()};
    manifest.inputs = {corpus_path, vocab_path, topics_path};
    require_file(topics_path, "topic model");

    auto [docs, vocab] = load_corpus_with_vocab(config, corpus_path, vocab_path);
    const auto topics = load_topics(topics_path);
    const auto tfidf = compute_tfidf(docs, vocab);
    const auto dataset = build_training_set(docs, tfidf, topics, vocab, config.labeling());
    save_dataset(dataset, out_path);

    auto topics_sidecar = out_path;
    topics_sidecar += ".topics.jsonl";
    auto stats_sidecar = out_path;
    stats_sidecar += ".stats.json";
    manifest.outputs = {out_path, topics_sidecar, stats_sidecar};
    manifest.write();
    return {manifest.outputs};
}

StageResult run_train(const PipelineConfig& config, const std::filesystem::path& dataset_path,
                      const std::filesystem::path& vocab_path,
                      const std::filesystem::path& embeddings_path,
                      const std::filesystem::path& out_path,
                      const std::filesystem::path& history_path) {
    ManifestWriter manifest{"train", config, out_path.parent_path()};
    manifest.inputs = {dataset_path, vocab_path};
    require_file(dataset_path, "dataset");
    require_file(vocab_path, "vocabulary");

    const auto vocab = Vocabulary::load(vocab_path);
    const auto dataset = load_dataset(dataset_path);

    EmbeddingMatrix pretrained;
    const EmbeddingMatrix* pretrained_ptr = nullptr;
    if (!embeddings_path.empty()) {
        require_file(embeddings_path, "embeddings checkpoint");
        manifest.inputs.push_back(embeddings_path);
        pretrained = load_embeddings(embeddings_path);
        pretrained_ptr = &pretrained;
    }

    auto params = init_params<float>(config.model(vocab.size()),
                                     derive_seed(config.seed, "model-init"), pretrained_ptr);
    const auto result = train(dataset, std::move(params), config.training());
    save_model(result.params, out_path, config.seed);

    std::string history;
    for (const auto& e : result.history) {
        json j{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}};
        history += j.dump();
        history += '\n';
    }
    write_text_file(history_path, history);

    manifest.outputs = {out_path, history_path};
    manifest.write();
    return {manifest.outputs};
}

void save_extract_results(const std::vector<ExtractResult>& results,
                          const std::filesystem::path& path) {
    std::string lines;
    for (const auto& r : results) {
        json attention = json::array();
        for (const auto& sentence : r.attention) {
            json tokens = json::array();
            for (const auto& tw : sentence) tokens.push_back({{"t", tw.token}, {"w", tw.weight}});
            attention.push_back(std::move(tokens));
        }
        json j{{"doc_id", r.doc_id},     {"scores", r.scores},         {"selected", r.selected},
               {"summary", r.summary},   {"words_used", r.words_used}, {"attention", attention}};
        lines += j.dump();
        lines += '\n';
    }
    write_text_file(path, lines);
}

std::map<std::string, std::string> load_summaries(const std::filesystem::path& path) {
    require_file(path, "summaries");
    std::map<std::string, std::string> out;
    for (const auto& line : split_lines(read_text_file(path))) {
        const json j = json::parse(line);
        out[j.at("doc_id").get<std::string>()] = j.at("summary").get<std::string>();
    }
    return out;
}

StageResult run_extract(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                        const std::filesystem::path& vocab_path,
                        const std::filesystem::path& model_path,
                        const std::filesystem::path& topics_path,
                        const std::filesystem::path& out_path) {
    ManifestWriter manifest{"extract", config, out_path.parent_path()};
    manifest.inputs = {corpus_path, vocab_path, model_path, topics_path};
    require_file(model_path, "model checkpoint");
    require_file(topics_path, "topic model");

    auto [docs, vocab] = load_corpus_with_vocab(config, corpus_path, vocab_path);
    const auto params = load_model(model_path);
    const auto topics = load_topics(topics_path);

    ExtractOptions options;
    options.budget_words = config.extract_budget_words;
    options.score_threshold = config.extract_threshold;
    options.topic_infer_iterations = config.topics_infer_iterations;
    options.seed = derive_seed(config.seed, "extract");

    std::vector<ExtractResult> results;
    results.reserve(docs.size());
    for (const auto& doc : docs) {
        results.push_back(extract_document(doc, params, topics, vocab, options));
    }
    save_extract_results(results, out_path);
    manifest.outputs = {out_path};

    if (config.extract_report != "none") {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const auto& doc = docs[i];
            const auto report =
                attention_report(doc, params, topics, vocab, results[i].selected,
                                 options.topic_infer_iterations, options.seed);
            const auto ext = config.extract_report == "html" ? ".html" : ".txt";
            const auto report_path =
                out_path.parent_path() / ("attention_" + doc.id + ext);
            write_text_file(report_path,
                            config.extract_report == "html" ? report.to_html() : report.to_text());
            manifest.outputs.push_back(report_path);
        }
    }
    manifest.write();
    return {manifest.outputs};
}

StageResult run_baseline(const PipelineConfig& config, const std::string& system,
                         const std::filesystem::path& corpus_path,
                         const std::filesystem::path& out_path,
                         const BaselineOptions& options) {
    ManifestWriter manifest{"baseline-" + system, config, out_path.parent_path()};
    manifest.inputs = {corpus_path};
    require_file(corpus_path, "corpus");

    auto [docs, vocab] = ingest_corpus(corpus_path, config.corpus_min_count);

    std::vector<ExtractResult> results;
    results.reserve(docs.size());
    for (const auto& doc : docs) {
        if (system == "freqsum") {
            results.push_back(freqsum(doc, options.budget_words));
        } else if (system == "textrank") {
            results.push_back(
                textrank(doc, options.budget_words, options.damping, options.tolerance));
        } else if (system == "lexrank") {
            results.push_back(lexrank(doc, options.budget_words, options.lexrank_threshold,
                                      options.damping, options.tolerance,
                                      options.lexrank_continuous));
        } else {
            throw ConfigError("unknown baseline system: " + system);
        }
    }
    save_extract_results(results, out_path);

    manifest.outputs = {out_path};
    manifest.write();
    return {manifest.outputs};
}

std::string format_rouge_table(const std::map<std::string, RougeScore>& by_system) {
    std::ostringstream out;
    std::size_t name_width = 10;
    for (const auto& [name, score] : by_system) name_width = std::max(name_width, name.size());

    out << std::string(name_width, ' ') << "  ";
    for (int n = 1; n <= kRougeMaxOrder; ++n) out << "   R-" << n << "  ";
    out << "\n";
    for (const auto& [name, score] : by_system) {
        out << name << std::string(name_width - name.size(), ' ') << "  ";
        for (int n = 1; n <= kRougeMaxOrder; ++n) {
            out << " " << render_double(score.orders[static_cast<std::size_t>(n - 1)].precision_mean)
                << " ";
        }
        out << "\n";
    }
    return out.str();
}

std::string format_rouge_csv(const std::map<std::string, RougeScore>& by_system) {
    std::ostringstream out;
    out << "system,r1_precision,r2_precision,r3_precision,r4_precision\n";
    for (const auto& [name, score] : by_system) {
        out << name;
        for (int n = 1; n <= kRougeMaxOrder; ++n) {
            out << ',' << render_double(score.orders[static_cast<std::size_t>(n - 1)].precision_mean);
        }
        out << "\n";
    }
    return out.str();
}

StageResult run_evaluate(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                         const std::map<std::string, std::filesystem::path>& summaries_by_system,
                         const std::filesystem::path& out_dir) {
    ManifestWriter manifest{"evaluate", config, out_dir};
    manifest.inputs = {corpus_path};
    require_file(corpus_path, "corpus");

    auto [docs, vocab] = ingest_corpus(corpus_path, config.corpus_min_count);
    std::map<std::string, std::string> references;
    for (const auto& doc : docs) {
        std::string abstract;
        for (const auto& s : doc.abstract) {
            if (!abstract.empty()) abstract += ' ';
            abstract += s.raw;
        }
        references[doc.id] = std::move(abstract);
    }

    std::map<std::string, RougeScore> by_system;
    for (const auto& [system, path] : summaries_by_system) {
        manifest.inputs.push_back(path);
        by_system[system] = evaluate_corpus(load_summaries(path), references, config.rouge());
    }

    const auto table_path = out_dir / "rouge_table.txt";
    const auto csv_path = out_dir / "rouge_table.csv";
    write_text_file(table_path, format_rouge_table(by_system));
    write_text_file(csv_path, format_rouge_csv(by_system));

    manifest.outputs = {table_path, csv_path};
    manifest.write();
    return {manifest.outputs};
}

StageResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                         const std::filesystem::path& out_dir) {
    ManifestWriter manifest{"pipeline", config, out_dir};
    manifest.inputs = {corpus_path};
    std::filesystem::create_directories(out_dir);

    StageResult all;
    auto append = [&all](const StageResult& r) {
        all.outputs.insert(all.outputs.end(), r.outputs.begin(), r.outputs.end());
    };

    log_info("pipeline: ingest");
    append(run_ingest(config, corpus_path, out_dir));
    const auto vocab_path = out_dir / "vocab.json";

    log_info("pipeline: train-embeddings");
    const auto embeddings_path = out_dir / "embeddings.ckpt";
    append(run_train_embeddings(config, corpus_path, vocab_path, embeddings_path));

    log_info("pipeline: train-topics");
    const auto topics_path = out_dir / "topics.ckpt";
    append(run_train_topics(config, corpus_path, vocab_path, topics_path));

    log_info("pipeline: label");
    const auto dataset_path = out_dir / "dataset.jsonl";
    append(run_label(config, corpus_path, vocab_path, topics_path, dataset_path));

    log_info("pipeline: train");
    const auto model_path = out_dir / "model.ckpt";
    const auto history_path = out_dir / "history.jsonl";
    append(run_train(config, dataset_path, vocab_path, embeddings_path, model_path, history_path));

    log_info("pipeline: extract");
    const auto neural_path = out_dir / "neural.jsonl";
    append(run_extract(config, corpus_path, vocab_path, model_path, topics_path, neural_path));

    BaselineOptions baseline_options;
    baseline_options.budget_words = config.extract_budget_words;
    std::map<std::string, std::filesystem::path> summaries{{"neural", neural_path}};
    for (const std::string system : {"freqsum", "textrank", "lexrank"}) {
        log_info("pipeline: baseline " + system);
        const auto path = out_dir / (system + ".jsonl");
        append(run_baseline(config, system, corpus_path, path, baseline_options));
        summaries[system] = path;
    }

    log_info("pipeline: evaluate");
    append(run_evaluate(config, corpus_path, summaries, out_dir));

    manifest.outputs = all.outputs;
    manifest.write();
    return all;
}

}  // namespace extsumm
