#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "extsumm/config.hpp"
#include "extsumm/extractor.hpp"
#include "extsumm/rouge.hpp"

namespace extsumm {

// Each stage reads its declared inputs, writes its declared outputs, and
// drops a <command>.manifest.json (config hash, seed, input checksums,
// timings) beside them. Stages communicate exclusively through files so a
// standalone CLI invocation and a full pipeline run take identical paths.

struct StageResult {
    std::vector<std::filesystem::path> outputs;  // artifacts, manifest excluded
};

StageResult run_ingest(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                       const std::filesystem::path& out_dir);

StageResult run_train_embeddings(const PipelineConfig& config,
                                 const std::filesystem::path& corpus_path,
                                 const std::filesystem::path& vocab_path,
                                 const std::filesystem::path& out_path);

StageResult run_train_topics(const PipelineConfig& config,
                             const std::filesystem::path& corpus_path,
                             const std::filesystem::path& vocab_path,
                             const std::filesystem::path& out_path);

StageResult run_label(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                      const std::filesystem::path& vocab_path,
                      const std::filesystem::path& topics_path,
                      const std::filesystem::path& out_path);

StageResult run_train(const PipelineConfig& config, const std::filesystem::path& dataset_path,
                      const std::filesystem::path& vocab_path,
                      const std::filesystem::path& embeddings_path,  // empty = random init
                      const std::filesystem::path& out_path,
                      const std::filesystem::path& history_path);

StageResult run_extract(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                        const std::filesystem::path& vocab_path,
                        const std::filesystem::path& model_path,
                        const std::filesystem::path& topics_path,
                        const std::filesystem::path& out_path);

StageResult run_baseline(const PipelineConfig& config, const std::string& system,
                         const std::filesystem::path& corpus_path,
                         const std::filesystem::path& out_path,
                         const BaselineOptions& options);

StageResult run_evaluate(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                         const std::map<std::string, std::filesystem::path>& summaries_by_system,
                         const std::filesystem::path& out_dir);

// ingest -> embeddings -> topics -> label -> train -> extract (+ the three
// baselines) -> evaluate, all under out_dir.
StageResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                         const std::filesystem::path& out_dir);

// Summaries JSON Lines: {doc_id, scores, selected, summary, words_used,
// attention}.
void save_extract_results(const std::vector<ExtractResult>& results,
                          const std::filesystem::path& path);
std::map<std::string, std::string> load_summaries(const std::filesystem::path& path);

// Table 1 layout: rows = systems, columns = ROUGE-1..4 precision.
std::string format_rouge_table(const std::map<std::string, RougeScore>& by_system);
std::string format_rouge_csv(const std::map<std::string, RougeScore>& by_system);

}  // namespace extsumm
