#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "extsumm/baselines.hpp"
#include "extsumm/embeddings.hpp"
#include "extsumm/labeler.hpp"
#include "extsumm/model.hpp"
#include "extsumm/rouge.hpp"
#include "extsumm/trainer.hpp"

namespace extsumm {

// Every tunable of the pipeline under namespaced keys. Defaults mirror the
// reference configuration: match 0.75 / floor 0.05 / ratio 1:4, D=100, C=10,
// M=500, U=200, Q=100, lr 0.001, batch 500, dropout 0.2, loss weights
// 0.8/0.2, budget 125.
struct PipelineConfig {
    std::uint64_t seed = 42;

    // corpus.*
    int corpus_min_count = 2;

    // labeler.*
    double labeler_match_threshold = 0.75;
    double labeler_salience_floor = 0.05;
    int labeler_negative_ratio = 4;

    // embeddings.*
    int embeddings_dim = 100;
    int embeddings_window = 5;
    int embeddings_negatives = 5;
    int embeddings_epochs = 5;
    double embeddings_lr = 0.025;
    double embeddings_subsample = 0.0;

    // topics.*
    int topics_count = 500;
    double topics_alpha = -1.0;  // < 0 means 50 / M
    double topics_beta = 0.01;
    int topics_iterations = 200;
    int topics_infer_iterations = 50;
    double topics_stop_df_ratio = 0.4;

    // model.*
    int model_hidden = 200;
    int model_context = 10;
    int model_max_len = 50;
    int model_classifier = 100;
    std::string model_attention = "softmax";      // softmax | linear
    std::string model_hidden_activation = "tanh";  // tanh | identity

    // trainer.*
    double trainer_lr = 0.001;
    double trainer_beta1 = 0.9;
    double trainer_beta2 = 0.999;
    double trainer_epsilon = 1e-8;
    int trainer_batch_size = 500;
    double trainer_dropout = 0.2;
    double trainer_pos_weight = 0.8;
    double trainer_neg_weight = 0.2;
    int trainer_max_epochs = 50;
    int trainer_patience = 5;
    double trainer_val_fraction = 0.1;
    double trainer_clip_norm = 5.0;

    // extract.*
    int extract_budget_words = 125;
    double extract_threshold = -1.0;  // < 0 disables threshold mode
    std::string extract_report = "none";  // none | text | html

    // rouge.*
    int rouge_length_limit = 125;
    int rouge_max_order = 4;
    bool rouge_bootstrap = false;
    int rouge_resamples = 1000;

    double resolved_topics_alpha() const {
        return topics_alpha >= 0.0 ? topics_alpha : 50.0 / static_cast<double>(topics_count);
    }

    LabelingConfig labeling() const;
    SkipgramConfig skipgram() const;
    TrainConfig training() const;
    ModelConfig model(std::int32_t vocab_size) const;
    RougeConfig rouge() const;

    // Canonical key=value rendering (sorted keys), also the hash input.
    std::string to_text() const;
    std::uint64_t hash() const;
};

// Parses "key = value" lines ('#' comments). Unknown keys or bad values are
// ConfigErrors listing every offending key.
PipelineConfig parse_config_text(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

// Applies a single key=value override (CLI flags win over file values).
void apply_override(PipelineConfig& config, const std::string& key, const std::string& value);

}  // namespace extsumm
