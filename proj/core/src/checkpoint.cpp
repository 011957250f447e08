#include "extsumm/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "extsumm/errors.hpp"

namespace extsumm {
namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'X', 'S', 'U', 'M'};
constexpr int kFormatVersion = 1;

struct Block {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;
};

void write_checkpoint(const std::filesystem::path& path, json manifest,
                      const std::vector<Block>& blocks) {
    json table = json::array();
    for (const auto& b : blocks) {
        table.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
    }
    manifest["format_version"] = kFormatVersion;
    manifest["blocks"] = std::move(table);
    const std::string header = manifest.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out.write(kMagic, 4);
    const auto len = static_cast<std::uint32_t>(header.size());
    char len_bytes[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                         static_cast<char>((len >> 16) & 0xff),
                         static_cast<char>((len >> 24) & 0xff)};
    out.write(len_bytes, 4);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& b : blocks) {
        out.write(reinterpret_cast<const char*>(b.data.data()),
                  static_cast<std::streamsize>(b.data.size() * sizeof(float)));
    }
    if (!out) throw DataError("checkpoint write failed: " + path.string());
}

std::pair<json, std::vector<Block>> read_checkpoint(const std::filesystem::path& path,
                                                    const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("not a checkpoint file: " + path.string());
    }
    char len_bytes[4];
    in.read(len_bytes, 4);
    if (!in) throw DataError("truncated checkpoint header: " + path.string());
    const std::uint32_t len = static_cast<std::uint8_t>(len_bytes[0]) |
                              (static_cast<std::uint8_t>(len_bytes[1]) << 8) |
                              (static_cast<std::uint8_t>(len_bytes[2]) << 16) |
                              (static_cast<std::uint8_t>(len_bytes[3]) << 24);
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("truncated checkpoint manifest: " + path.string());

    json manifest;
    try {
        manifest = json::parse(header);
    } catch (const json::parse_error& e) {
        throw DataError("invalid checkpoint manifest in " + path.string() + ": " + e.what());
    }
    if (manifest.value("format_version", 0) != kFormatVersion) {
        throw DataError("unsupported checkpoint format version in " + path.string());
    }
    if (manifest.value("kind", std::string{}) != expected_kind) {
        throw DataError("checkpoint " + path.string() + " has kind '" +
                        manifest.value("kind", std::string{}) + "', expected '" + expected_kind +
                        "'");
    }

    std::vector<Block> blocks;
    for (const auto& entry : manifest.at("blocks")) {
        Block b;
        b.name = entry.at("name").get<std::string>();
        b.rows = entry.at("rows").get<std::size_t>();
        b.cols = entry.at("cols").get<std::size_t>();
        b.data.resize(b.rows * b.cols);
        in.read(reinterpret_cast<char*>(b.data.data()),
                static_cast<std::streamsize>(b.data.size() * sizeof(float)));
        if (!in) throw DataError("truncated checkpoint block '" + b.name + "' in " + path.string());
        blocks.push_back(std::move(b));
    }
    return {std::move(manifest), std::move(blocks)};
}

}  // namespace

void save_model(const ModelParams<float>& params, const std::filesystem::path& path,
                std::uint64_t seed) {
    const auto& d = params.dims();
    json manifest;
    manifest["kind"] = "model";
    manifest["dims"] = {{"V", d.vocab}, {"D", d.embed},      {"U", d.hidden}, {"C", d.context},
                        {"M", d.topics}, {"L", d.max_len}, {"Q", d.classifier}};
    manifest["seed"] = seed;
    manifest["attention_mode"] =
        params.config.attention_mode == AttentionMode::kSoftmax ? "softmax" : "linear";
    manifest["hidden_activation"] =
        params.config.hidden_activation == HiddenActivation::kTanh ? "tanh" : "identity";

    std::vector<Block> blocks;
    auto add = [&](std::string_view name, std::span<const float> data, std::size_t rows,
                   std::size_t cols) {
        Block b;
        b.name = std::string(name);
        b.rows = rows;
        b.cols = cols;
        b.data.assign(data.begin(), data.end());
        blocks.push_back(std::move(b));
    };

    add("E", params.embed.data(), params.embed.rows(), params.embed.cols());
    for (int g = 0; g < 4; ++g) {
        add(ModelParams<float>::gate_w_name(g), params.gate_w[g].data(), params.gate_w[g].rows(),
            params.gate_w[g].cols());
    }
    for (int g = 0; g < 4; ++g) {
        add(ModelParams<float>::gate_r_name(g), params.gate_r[g].data(), params.gate_r[g].rows(),
            params.gate_r[g].cols());
    }
    for (int g = 0; g < 4; ++g) {
        add(ModelParams<float>::gate_b_name(g), params.gate_b[g], params.gate_b[g].size(), 1);
    }
    add("F", params.topic_embed.data(), params.topic_embed.rows(), params.topic_embed.cols());
    add("Z", params.attention.data(), params.attention.rows(), params.attention.cols());
    add("H", params.hidden_w.data(), params.hidden_w.rows(), params.hidden_w.cols());
    add("b_H", params.hidden_b, params.hidden_b.size(), 1);
    add("O", params.out_w, params.out_w.size(), 1);
    add("b_O", std::span<const float>(&params.out_b, 1), 1, 1);

    write_checkpoint(path, std::move(manifest), blocks);
}

ModelParams<float> load_model(const std::filesystem::path& path) {
    auto [manifest, blocks] = read_checkpoint(path, "model");
    const auto& dims = manifest.at("dims");

    ModelConfig config;
    config.dims.vocab = dims.at("V").get<std::int32_t>();
    config.dims.embed = dims.at("D").get<int>();
    config.dims.hidden = dims.at("U").get<int>();
    config.dims.context = dims.at("C").get<int>();
    config.dims.topics = dims.at("M").get<int>();
    config.dims.max_len = dims.at("L").get<int>();
    config.dims.classifier = dims.at("Q").get<int>();
    config.attention_mode = manifest.value("attention_mode", "softmax") == std::string("linear")
                                ? AttentionMode::kLinear
                                : AttentionMode::kSoftmax;
    config.hidden_activation =
        manifest.value("hidden_activation", "tanh") == std::string("identity")
            ? HiddenActivation::kIdentity
            : HiddenActivation::kTanh;

    ModelParams<float> params = init_params<float>(config, 0);
    std::size_t idx = 0;
    params.for_each_tensor([&](std::string_view name, std::span<float> dst) {
        if (idx >= blocks.size()) throw DataError("checkpoint missing block: " + std::string(name));
        const auto& b = blocks[idx++];
        if (b.name != name || b.data.size() != dst.size()) {
            throw DataError("checkpoint block mismatch: expected '" + std::string(name) + "' (" +
                            std::to_string(dst.size()) + " values), got '" + b.name + "' (" +
                            std::to_string(b.data.size()) + ")");
        }
        std::copy(b.data.begin(), b.data.end(), dst.begin());
    });
    return params;
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
    json manifest;
    manifest["kind"] = "embeddings";
    manifest["dims"] = {{"V", matrix.vectors.rows()}, {"D", matrix.vectors.cols()}};
    manifest["seed"] = matrix.config.seed;
    manifest["train"] = {{"window", matrix.config.window},
                         {"negatives", matrix.config.negatives},
                         {"epochs", matrix.epochs_trained},
                         {"lr", matrix.config.lr},
                         {"min_lr", matrix.config.min_lr},
                         {"subsample", matrix.config.subsample},
                         {"unigram_power", matrix.config.unigram_power}};

    std::vector<Block> blocks(1);
    blocks[0].name = "E";
    blocks[0].rows = matrix.vectors.rows();
    blocks[0].cols = matrix.vectors.cols();
    blocks[0].data = matrix.vectors.data();
    write_checkpoint(path, std::move(manifest), blocks);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
    auto [manifest, blocks] = read_checkpoint(path, "embeddings");
    if (blocks.size() != 1 || blocks[0].name != "E") {
        throw DataError("embeddings checkpoint must contain exactly the E block");
    }
    EmbeddingMatrix matrix;
    matrix.vectors = Matrix<float>(blocks[0].rows, blocks[0].cols);
    matrix.vectors.data() = std::move(blocks[0].data);
    const auto& train = manifest.at("train");
    matrix.config.dim = static_cast<int>(blocks[0].cols);
    matrix.config.window = train.at("window").get<int>();
    matrix.config.negatives = train.at("negatives").get<int>();
    matrix.config.epochs = train.at("epochs").get<int>();
    matrix.config.lr = train.at("lr").get<double>();
    matrix.config.min_lr = train.at("min_lr").get<double>();
    matrix.config.subsample = train.at("subsample").get<double>();
    matrix.config.unigram_power = train.at("unigram_power").get<double>();
    matrix.config.seed = manifest.at("seed").get<std::uint64_t>();
    matrix.epochs_trained = matrix.config.epochs;
    return matrix;
}

void save_topics(const TopicModel& model, const std::filesystem::path& path) {
    json manifest;
    manifest["kind"] = "topics";
    manifest["dims"] = {{"M", model.num_topics}, {"V", model.vocab_size()}};
    manifest["seed"] = model.seed;
    manifest["lda"] = {{"alpha", model.alpha},
                       {"beta", model.beta},
                       {"iterations", model.iterations_run}};

    std::vector<Block> blocks(1);
    blocks[0].name = "phi";
    blocks[0].rows = model.phi.rows();
    blocks[0].cols = model.phi.cols();
    blocks[0].data.reserve(model.phi.size());
    for (const double v : model.phi.data()) blocks[0].data.push_back(static_cast<float>(v));
    write_checkpoint(path, std::move(manifest), blocks);
}

TopicModel load_topics(const std::filesystem::path& path) {
    auto [manifest, blocks] = read_checkpoint(path, "topics");
    if (blocks.size() != 1 || blocks[0].name != "phi") {
        throw DataError("topics checkpoint must contain exactly the phi block");
    }
    TopicModel model;
    model.num_topics = manifest.at("dims").at("M").get<int>();
    model.seed = manifest.at("seed").get<std::uint64_t>();
    const auto& lda = manifest.at("lda");
    model.alpha = lda.at("alpha").get<double>();
    model.beta = lda.at("beta").get<double>();
    model.iterations_run = lda.at("iterations").get<int>();

    model.phi = Matrix<double>(blocks[0].rows, blocks[0].cols);
    for (std::size_t i = 0; i < blocks[0].data.size(); ++i) {
        model.phi.data()[i] = static_cast<double>(blocks[0].data[i]);
    }
    // float32 rounding breaks the row-sum invariant; restore it.
    for (std::size_t k = 0; k < model.phi.rows(); ++k) {
        double sum = 0.0;
        for (std::size_t v = 0; v < model.phi.cols(); ++v) sum += model.phi(k, v);
        if (sum > 0.0) {
            for (std::size_t v = 0; v < model.phi.cols(); ++v) model.phi(k, v) /= sum;
        }
    }
    return model;
}

}  // namespace extsumm
