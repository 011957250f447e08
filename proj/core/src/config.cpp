#include "extsumm/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "extsumm/errors.hpp"
#include "extsumm/io.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {
namespace {

struct Field {
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    T out{};
    const char* begin = value.data();
    const char* end = begin + value.size();
    std::from_chars_result res{};
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for doubles is available on this toolchain.
        res = std::from_chars(begin, end, out);
    } else {
        res = std::from_chars(begin, end, out);
    }
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("invalid value for " + key + ": '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("invalid value for " + key + ": '" + value + "' (expected true/false)");
}

std::string render_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

template <typename T>
Field number_field(T PipelineConfig::* member) {
    return Field{
        [member](PipelineConfig& c, const std::string& v) {
            c.*member = parse_number<T>(v, "value");
        },
        [member](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
                return render_double(c.*member);
            } else {
                return std::to_string(c.*member);
            }
        }};
}

Field bool_field(bool PipelineConfig::* member) {
    return Field{[member](PipelineConfig& c, const std::string& v) {
                     c.*member = parse_bool(v, "value");
                 },
                 [member](const PipelineConfig& c) { return c.*member ? "true" : "false"; }};
}

Field string_field(std::string PipelineConfig::* member,
                   std::vector<std::string> allowed) {
    return Field{[member, allowed](PipelineConfig& c, const std::string& v) {
                     for (const auto& a : allowed) {
                         if (v == a) {
                             c.*member = v;
                             return;
                         }
                     }
                     throw ConfigError("invalid value: '" + v + "'");
                 },
                 [member](const PipelineConfig& c) { return c.*member; }};
}

const std::map<std::string, Field>& registry() {
    static const std::map<std::string, Field> fields = {
        {"seed", number_field(&PipelineConfig::seed)},
        {"corpus.min_count", number_field(&PipelineConfig::corpus_min_count)},
        {"labeler.match_threshold", number_field(&PipelineConfig::labeler_match_threshold)},
        {"labeler.salience_floor", number_field(&PipelineConfig::labeler_salience_floor)},
        {"labeler.negative_ratio", number_field(&PipelineConfig::labeler_negative_ratio)},
        {"embeddings.dim", number_field(&PipelineConfig::embeddings_dim)},
        {"embeddings.window", number_field(&PipelineConfig::embeddings_window)},
        {"embeddings.negatives", number_field(&PipelineConfig::embeddings_negatives)},
        {"embeddings.epochs", number_field(&PipelineConfig::embeddings_epochs)},
        {"embeddings.lr", number_field(&PipelineConfig::embeddings_lr)},
        {"embeddings.subsample", number_field(&PipelineConfig::embeddings_subsample)},
        {"topics.count", number_field(&PipelineConfig::topics_count)},
        {"topics.alpha", number_field(&PipelineConfig::topics_alpha)},
        {"topics.beta", number_field(&PipelineConfig::topics_beta)},
        {"topics.iterations", number_field(&PipelineConfig::topics_iterations)},
        {"topics.infer_iterations", number_field(&PipelineConfig::topics_infer_iterations)},
        {"topics.stop_df_ratio", number_field(&PipelineConfig::topics_stop_df_ratio)},
        {"model.hidden", number_field(&PipelineConfig::model_hidden)},
        {"model.context", number_field(&PipelineConfig::model_context)},
        {"model.max_len", number_field(&PipelineConfig::model_max_len)},
        {"model.classifier", number_field(&PipelineConfig::model_classifier)},
        {"model.attention", string_field(&PipelineConfig::model_attention, {"softmax", "linear"})},
        {"model.hidden_activation",
         string_field(&PipelineConfig::model_hidden_activation, {"tanh", "identity"})},
        {"trainer.lr", number_field(&PipelineConfig::trainer_lr)},
        {"trainer.beta1", number_field(&PipelineConfig::trainer_beta1)},
        {"trainer.beta2", number_field(&PipelineConfig::trainer_beta2)},
        {"trainer.epsilon", number_field(&PipelineConfig::trainer_epsilon)},
        {"trainer.batch_size", number_field(&PipelineConfig::trainer_batch_size)},
        {"trainer.dropout", number_field(&PipelineConfig::trainer_dropout)},
        {"trainer.pos_weight", number_field(&PipelineConfig::trainer_pos_weight)},
        {"trainer.neg_weight", number_field(&PipelineConfig::trainer_neg_weight)},
        {"trainer.max_epochs", number_field(&PipelineConfig::trainer_max_epochs)},
        {"trainer.patience", number_field(&PipelineConfig::trainer_patience)},
        {"trainer.val_fraction", number_field(&PipelineConfig::trainer_val_fraction)},
        {"trainer.clip_norm", number_field(&PipelineConfig::trainer_clip_norm)},
        {"extract.budget_words", number_field(&PipelineConfig::extract_budget_words)},
        {"extract.threshold", number_field(&PipelineConfig::extract_threshold)},
        {"extract.report", string_field(&PipelineConfig::extract_report, {"none", "text", "html"})},
        {"rouge.length_limit", number_field(&PipelineConfig::rouge_length_limit)},
        {"rouge.max_order", number_field(&PipelineConfig::rouge_max_order)},
        {"rouge.bootstrap", bool_field(&PipelineConfig::rouge_bootstrap)},
        {"rouge.resamples", number_field(&PipelineConfig::rouge_resamples)},
    };
    return fields;
}

void validate(const PipelineConfig& c) {
    std::vector<std::string> problems;
    auto require = [&](bool ok, const std::string& msg) {
        if (!ok) problems.push_back(msg);
    };
    require(c.corpus_min_count >= 1, "corpus.min_count must be >= 1");
    require(c.labeler_match_threshold > 0.0 && c.labeler_match_threshold <= 1.0,
            "labeler.match_threshold must be in (0, 1]");
    require(c.labeler_salience_floor >= 0.0, "labeler.salience_floor must be >= 0");
    require(c.labeler_negative_ratio >= 1, "labeler.negative_ratio must be >= 1");
    require(c.embeddings_dim >= 1, "embeddings.dim must be >= 1");
    require(c.topics_count >= 1, "topics.count must be >= 1");
    require(c.trainer_lr > 0.0, "trainer.lr must be > 0");
    require(c.trainer_dropout >= 0.0 && c.trainer_dropout < 1.0,
            "trainer.dropout must be in [0, 1)");
    require(c.trainer_pos_weight > 0.0 && c.trainer_neg_weight > 0.0,
            "trainer loss weights must be positive");
    require(c.trainer_batch_size >= 1, "trainer.batch_size must be >= 1");
    require(c.trainer_val_fraction >= 0.0 && c.trainer_val_fraction < 1.0,
            "trainer.val_fraction must be in [0, 1)");
    require(c.extract_budget_words >= 1, "extract.budget_words must be >= 1");
    require(c.rouge_max_order >= 1 && c.rouge_max_order <= kRougeMaxOrder,
            "rouge.max_order must be in [1, 4]");
    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
}

}  // namespace

LabelingConfig PipelineConfig::labeling() const {
    LabelingConfig c;
    c.match_threshold = labeler_match_threshold;
    c.salience_floor = labeler_salience_floor;
    c.negative_ratio = labeler_negative_ratio;
    c.seed = derive_seed(seed, "labeler");
    c.topic_infer_iterations = topics_infer_iterations;
    return c;
}

SkipgramConfig PipelineConfig::skipgram() const {
    SkipgramConfig c;
    c.dim = embeddings_dim;
    c.window = embeddings_window;
    c.negatives = embeddings_negatives;
    c.epochs = embeddings_epochs;
    c.lr = embeddings_lr;
    c.subsample = embeddings_subsample;
    c.seed = derive_seed(seed, "embeddings");
    return c;
}

TrainConfig PipelineConfig::training() const {
    TrainConfig c;
    c.lr = trainer_lr;
    c.beta1 = trainer_beta1;
    c.beta2 = trainer_beta2;
    c.epsilon = trainer_epsilon;
    c.batch_size = trainer_batch_size;
    c.dropout = trainer_dropout;
    c.pos_weight = trainer_pos_weight;
    c.neg_weight = trainer_neg_weight;
    c.max_epochs = trainer_max_epochs;
    c.patience = trainer_patience;
    c.val_fraction = trainer_val_fraction;
    c.clip_norm = trainer_clip_norm;
    c.seed = derive_seed(seed, "trainer");
    return c;
}

ModelConfig PipelineConfig::model(std::int32_t vocab_size) const {
    ModelConfig c;
    c.dims.vocab = vocab_size;
    c.dims.embed = embeddings_dim;
    c.dims.hidden = model_hidden;
    c.dims.context = model_context;
    c.dims.topics = topics_count;
    c.dims.max_len = model_max_len;
    c.dims.classifier = model_classifier;
    c.attention_mode =
        model_attention == "linear" ? AttentionMode::kLinear : AttentionMode::kSoftmax;
    c.hidden_activation = model_hidden_activation == "identity" ? HiddenActivation::kIdentity
                                                                : HiddenActivation::kTanh;
    return c;
}

RougeConfig PipelineConfig::rouge() const {
    RougeConfig c;
    c.max_order = rouge_max_order;
    c.length_limit = rouge_length_limit;
    c.bootstrap = rouge_bootstrap;
    c.resamples = rouge_resamples;
    c.seed = derive_seed(seed, "rouge");
    return c;
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& [key, field] : registry()) {
        out += key;
        out += " = ";
        out += field.get(*this);
        out += '\n';
    }
    return out;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(to_text()); }

void apply_override(PipelineConfig& config, const std::string& key, const std::string& value) {
    auto it = registry().find(key);
    if (it == registry().end()) throw ConfigError("unknown configuration key: " + key);
    try {
        it->second.set(config, value);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
    validate(config);
}

PipelineConfig parse_config_text(const std::string& text, PipelineConfig base) {
    std::vector<std::string> bad_keys;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty()) bad_keys.push_back(trim(line));
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = registry().find(key);
        if (it == registry().end()) {
            bad_keys.push_back(key);
            continue;
        }
        try {
            it->second.set(base, value);
        } catch (const ConfigError&) {
            bad_keys.push_back(key);
        }
    }
    if (!bad_keys.empty()) {
        std::string msg = "invalid configuration keys:";
        for (const auto& k : bad_keys) msg += " " + k;
        throw ConfigError(msg);
    }
    validate(base);
    return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    return parse_config_text(read_text_file(path), std::move(base));
}

}  // namespace extsumm
