// extsumm: weakly-supervised extractive summarization pipeline.
//
// Subcommands cover the full workflow: ingest, train-embeddings,
// train-topics, label, train, extract, baseline, evaluate, and an end-to-end
// pipeline. Options come from a key=value config file plus flag overrides
// (flags win). Exit codes: 0 ok, 1 usage/config, 2 data, 3 numeric.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "extsumm/config.hpp"
#include "extsumm/embeddings.hpp"
#include "extsumm/errors.hpp"
#include "extsumm/io.hpp"
#include "extsumm/pipeline.hpp"
#include "extsumm/topics.hpp"

namespace {

using extsumm::PipelineConfig;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
};

PipelineConfig resolve_config(const CommonArgs& args) {
    PipelineConfig config;
    if (!args.config_path.empty()) {
        config = extsumm::load_config(args.config_path, config);
    }
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw extsumm::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        extsumm::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (const char* env_seed = std::getenv("EXTSUMM_SEED")) {
        extsumm::apply_override(config, "seed", env_seed);
    }
    return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value configuration file");
    cmd->add_option("--set", args.overrides, "override a config key (key=value, repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakly-supervised extractive summarization toolkit"};
    app.require_subcommand(1);

    CommonArgs common;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a corpus and report statistics");
    std::string corpus_path, out_dir = ".";
    ingest->add_option("--corpus", corpus_path, "JSON-Lines corpus file")->required();
    ingest->add_option("--out-dir", out_dir, "output directory");
    add_common(ingest, common);

    // train-embeddings
    auto* train_emb = app.add_subcommand("train-embeddings", "train skip-gram word embeddings");
    std::string vocab_path, out_path;
    train_emb->add_option("--corpus", corpus_path, "JSON-Lines corpus file")->required();
    train_emb->add_option("--vocab", vocab_path, "vocabulary file from ingest")->required();
    train_emb->add_option("--out", out_path, "embeddings checkpoint path")->required();
    add_common(train_emb, common);

    // train-topics
    auto* train_topics = app.add_subcommand("train-topics", "fit the LDA topic model");
    train_topics->add_option("--corpus", corpus_path, "JSON-Lines corpus file")->required();
    train_topics->add_option("--vocab", vocab_path, "vocabulary file from ingest")->required();
    train_topics->add_option("--out", out_path, "topics checkpoint path")->required();
    add_common(train_topics, common);

    // label
    auto* label = app.add_subcommand("label", "build the pseudo-labeled training set");
    std::string topics_path;
    label->add_option("--corpus", corpus_path, "JSON-Lines corpus file")->required();
    label->add_option("--vocab", vocab_path, "vocabulary file from ingest")->required();
    label->add_option("--topics", topics_path, "topics checkpoint")->required();
    label->add_option("--out", out_path, "dataset JSON-Lines path")->required();
    add_common(label, common);

    // train
    auto* train_cmd = app.add_subcommand("train", "train the attention classifier");
    std::string dataset_path, embeddings_path, history_path = "history.jsonl";
    train_cmd->add_option("--dataset", dataset_path, "labeled dataset from `label`")->required();
    train_cmd->add_option("--vocab", vocab_path, "vocabulary file from ingest")->required();
    train_cmd->add_option("--embeddings", embeddings_path,
                          "embeddings checkpoint for initialization (optional)");
    train_cmd->add_option("--out", out_path, "model checkpoint path")->required();
    train_cmd->add_option("--history", history_path, "training-history JSON-Lines path");
    add_common(train_cmd, common);

    // extract
    auto* extract = app.add_subcommand("extract", "summarize documents with a trained model");
    std::string model_path;
    extract->add_option("--corpus", corpus_path, "JSON-Lines corpus file")->required();
    extract->add_option("--vocab", vocab_path, "vocabulary file from ingest")->required();
    extract->add_option("--model", model_path, "model checkpoint")->required();
    extract->add_option("--topics", topics_path, "topics checkpoint")->required();
    extract->add_option("--out", out_path, "summaries JSON-Lines path")->required();
    int budget_flag = -1;
    double threshold_flag = -2.0;
    std::string report_flag;
    extract->add_option("--budget", budget_flag, "summary word budget (default from config)");
    extract->add_option("--threshold", threshold_flag,
                        "score threshold mode (only sentences scoring >= threshold)");
    extract->add_option("--report", report_flag, "attention report: none|text|html");
    add_common(extract, common);

    // baseline
    auto* baseline = app.add_subcommand("baseline", "run a classical baseline summarizer");
    std::string system;
    extsumm::BaselineOptions baseline_options;
    baseline->add_option("--system", system, "freqsum|textrank|lexrank")->required();
    baseline->add_option("--corpus", corpus_path, "JSON-Lines corpus file")->required();
    baseline->add_option("--out", out_path, "summaries JSON-Lines path")->required();
    baseline->add_option("--damping", baseline_options.damping, "PageRank damping factor");
    baseline->add_option("--tol", baseline_options.tolerance, "power-iteration tolerance");
    baseline->add_option("--lexrank-threshold", baseline_options.lexrank_threshold,
                         "LexRank cosine threshold");
    baseline->add_flag("--lexrank-continuous", baseline_options.lexrank_continuous,
                       "keep cosine edge weights instead of binarizing");
    add_common(baseline, common);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score summaries with ROUGE-N precision");
    std::vector<std::string> summaries_specs;
    evaluate->add_option("--corpus", corpus_path, "JSON-Lines corpus file (references)")
        ->required();
    evaluate
        ->add_option("--summaries", summaries_specs,
                     "system=path summaries file (repeatable)")
        ->required();
    evaluate->add_option("--out-dir", out_dir, "output directory");
    add_common(evaluate, common);

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run the whole workflow end to end");
    pipeline->add_option("--corpus", corpus_path, "JSON-Lines corpus file")->required();
    pipeline->add_option("--out-dir", out_dir, "output directory")->required();
    add_common(pipeline, common);

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig config = resolve_config(common);

        if (ingest->parsed()) {
            extsumm::run_ingest(config, corpus_path, out_dir);
            std::cout << extsumm::read_text_file(std::filesystem::path(out_dir) /
                                                 "corpus_stats.json");
        } else if (train_emb->parsed()) {
            extsumm::run_train_embeddings(config, corpus_path, vocab_path, out_path);
        } else if (train_topics->parsed()) {
            extsumm::run_train_topics(config, corpus_path, vocab_path, out_path);
        } else if (label->parsed()) {
            extsumm::run_label(config, corpus_path, vocab_path, topics_path, out_path);
        } else if (train_cmd->parsed()) {
            extsumm::run_train(config, dataset_path, vocab_path, embeddings_path, out_path,
                               history_path);
        } else if (extract->parsed()) {
            if (budget_flag > 0) config.extract_budget_words = budget_flag;
            if (threshold_flag > -1.5) config.extract_threshold = threshold_flag;
            if (!report_flag.empty()) {
                extsumm::apply_override(config, "extract.report", report_flag);
            }
            extsumm::run_extract(config, corpus_path, vocab_path, model_path, topics_path,
                                 out_path);
        } else if (baseline->parsed()) {
            baseline_options.budget_words = config.extract_budget_words;
            extsumm::run_baseline(config, system, corpus_path, out_path, baseline_options);
        } else if (evaluate->parsed()) {
            std::map<std::string, std::filesystem::path> by_system;
            for (const auto& spec : summaries_specs) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos) {
                    throw extsumm::ConfigError("--summaries expects system=path, got '" + spec +
                                               "'");
                }
                by_system[spec.substr(0, eq)] = spec.substr(eq + 1);
            }
            extsumm::run_evaluate(config, corpus_path, by_system, out_dir);
            std::cout << extsumm::read_text_file(std::filesystem::path(out_dir) /
                                                 "rouge_table.txt");
        } else if (pipeline->parsed()) {
            extsumm::run_pipeline(config, corpus_path, out_dir);
            std::cout << extsumm::read_text_file(std::filesystem::path(out_dir) /
                                                 "rouge_table.txt");
        }
    } catch (const extsumm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const extsumm::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const extsumm::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
