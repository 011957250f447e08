#pragma once

#include <filesystem>

#include "extsumm/embeddings.hpp"
#include "extsumm/model.hpp"
#include "extsumm/topics.hpp"

namespace extsumm {

// Checkpoint container: "XSUM" magic, a little-endian u32 manifest length, a
// JSON manifest (format version, kind, dims, seed, block table), then the
// named row-major little-endian float32 blocks in table order. save(load(x))
// reproduces x byte for byte.

void save_model(const ModelParams<float>& params, const std::filesystem::path& path,
                std::uint64_t seed);
ModelParams<float> load_model(const std::filesystem::path& path);

void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

// Topic checkpoints persist phi plus the hyperparameters; the sampler count
// tables are not saved. Rows are renormalized on load to absorb float32
// rounding.
void save_topics(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_topics(const std::filesystem::path& path);

}  // namespace extsumm
