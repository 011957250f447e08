#include "extsumm/model.hpp"

#include <cmath>

#include "extsumm/errors.hpp"

namespace extsumm {
namespace {

template <typename Real>
void xavier_fill(Matrix<Real>& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : m.data()) v = static_cast<Real>(rng.normal() * stddev);
}

template <typename Real>
void check_topic_probs(std::span<const Real> p) {
    double sum = 0.0;
    for (Real v : p) {
        if (std::isnan(static_cast<double>(v))) {
            throw NumericError("context_embed: NaN in topic probabilities");
        }
        sum += static_cast<double>(v);
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw NumericError("context_embed: topic probabilities sum to " + std::to_string(sum));
    }
}

}  // namespace

template <typename Real>
const char* ModelParams<Real>::gate_w_name(int g) {
    static const char* names[4] = {"W_i", "W_f", "W_g", "W_o"};
    return names[g];
}
template <typename Real>
const char* ModelParams<Real>::gate_r_name(int g) {
    static const char* names[4] = {"R_i", "R_f", "R_g", "R_o"};
    return names[g];
}
template <typename Real>
const char* ModelParams<Real>::gate_b_name(int g) {
    static const char* names[4] = {"b_i", "b_f", "b_g", "b_o"};
    return names[g];
}

template <typename Real>
ModelParams<Real> ModelParams<Real>::zeros_like() const {
    ModelParams<Real> z;
    z.config = config;
    z.embed = Matrix<Real>(embed.rows(), embed.cols(), Real(0));
    for (int g = 0; g < 4; ++g) {
        z.gate_w[g] = Matrix<Real>(gate_w[g].rows(), gate_w[g].cols(), Real(0));
        z.gate_r[g] = Matrix<Real>(gate_r[g].rows(), gate_r[g].cols(), Real(0));
        z.gate_b[g].assign(gate_b[g].size(), Real(0));
    }
    z.topic_embed = Matrix<Real>(topic_embed.rows(), topic_embed.cols(), Real(0));
    z.attention = Matrix<Real>(attention.rows(), attention.cols(), Real(0));
    z.hidden_w = Matrix<Real>(hidden_w.rows(), hidden_w.cols(), Real(0));
    z.hidden_b.assign(hidden_b.size(), Real(0));
    z.out_w.assign(out_w.size(), Real(0));
    z.out_b = Real(0);
    return z;
}

template <typename Real>
ModelParams<Real> init_params(const ModelConfig& config, std::uint64_t seed,
                              const EmbeddingMatrix* pretrained) {
    const auto& d = config.dims;
    if (d.vocab < 2 || d.embed < 1 || d.hidden < 1 || d.context < 1 || d.topics < 1 ||
        d.max_len < 1 || d.classifier < 1) {
        throw ConfigError("init_params: all dimensions must be >= 1 (vocab >= 2)");
    }

    const auto V = static_cast<std::size_t>(d.vocab);
    const auto D = static_cast<std::size_t>(d.embed);
    const auto U = static_cast<std::size_t>(d.hidden);
    const auto C = static_cast<std::size_t>(d.context);
    const auto M = static_cast<std::size_t>(d.topics);
    const auto L = static_cast<std::size_t>(d.max_len);
    const auto Q = static_cast<std::size_t>(d.classifier);

    Rng rng(derive_seed(seed, "init-params"));

    ModelParams<Real> p;
    p.config = config;
    p.embed = Matrix<Real>(V, D);
    xavier_fill(p.embed, V, D, rng);
    for (int g = 0; g < 4; ++g) {
        p.gate_w[g] = Matrix<Real>(U, D);
        xavier_fill(p.gate_w[g], D, U, rng);
        p.gate_r[g] = Matrix<Real>(U, U);
        xavier_fill(p.gate_r[g], U, U, rng);
        p.gate_b[g].assign(U, g == kGateForget ? Real(1) : Real(0));
    }
    p.topic_embed = Matrix<Real>(M, C);
    xavier_fill(p.topic_embed, M, C, rng);
    p.attention = Matrix<Real>(U + C, L);
    xavier_fill(p.attention, U + C, L, rng);
    p.hidden_w = Matrix<Real>(U + C, Q);
    xavier_fill(p.hidden_w, U + C, Q, rng);
    p.hidden_b.assign(Q, Real(0));
    {
        Matrix<Real> out(Q, 1);
        xavier_fill(out, Q, 1, rng);
        p.out_w.assign(out.data().begin(), out.data().end());
    }
    p.out_b = Real(0);

    if (pretrained != nullptr) {
        if (pretrained->vectors.rows() != V || pretrained->vectors.cols() != D) {
            throw ConfigError("init_params: pretrained embedding shape " +
                              std::to_string(pretrained->vectors.rows()) + "x" +
                              std::to_string(pretrained->vectors.cols()) + " does not match " +
                              std::to_string(V) + "x" + std::to_string(D));
        }
        for (std::size_t i = 0; i < V; ++i) {
            for (std::size_t j = 0; j < D; ++j) {
                p.embed(i, j) = static_cast<Real>(pretrained->vectors(i, j));
            }
        }
    }
    for (std::size_t j = 0; j < D; ++j) p.embed(Vocabulary::kPad, j) = Real(0);
    return p;
}

template <typename Real>
ForwardTrace<Real> forward(std::span<const std::int32_t> token_ids,
                           std::span<const Real> topic_probs, const ModelParams<Real>& params,
                           RunMode mode, Real dropout_rate, Rng* rng,
                           const DropoutMasks<Real>* fixed_masks) {
    const auto& d = params.dims();
    if (token_ids.empty()) throw DataError("forward: empty token sequence");
    if (static_cast<int>(topic_probs.size()) != d.topics) {
        throw DataError("forward: topic vector length " + std::to_string(topic_probs.size()) +
                        " does not match M=" + std::to_string(d.topics));
    }
    check_topic_probs(topic_probs);

    const auto L = static_cast<std::size_t>(d.max_len);
    const auto U = static_cast<std::size_t>(d.hidden);
    const auto D = static_cast<std::size_t>(d.embed);
    const auto C = static_cast<std::size_t>(d.context);
    const auto Q = static_cast<std::size_t>(d.classifier);
    const std::size_t n = std::min(token_ids.size(), L);

    ForwardTrace<Real> t;
    t.train_mode = mode == RunMode::kTrain;
    t.token_ids.assign(token_ids.begin(), token_ids.begin() + static_cast<std::ptrdiff_t>(n));
    t.true_len = static_cast<int>(n);
    t.mask.assign(L, 0);
    for (std::size_t i = 0; i < n; ++i) t.mask[i] = 1;
    t.topic_probs.assign(topic_probs.begin(), topic_probs.end());

    const bool use_dropout = t.train_mode && dropout_rate > Real(0);
    if (use_dropout && rng == nullptr && fixed_masks == nullptr) {
        throw ConfigError("forward: train mode with dropout requires an rng");
    }
    const Real keep_scale = use_dropout ? Real(1) / (Real(1) - dropout_rate) : Real(1);
    auto draw_mask = [&](Real& slot) {
        slot = (use_dropout && rng->uniform() < static_cast<double>(dropout_rate)) ? Real(0)
                                                                                   : keep_scale;
    };

    // Dropout masks (all ones when not training or rate is zero).
    if (fixed_masks != nullptr) {
        t.dropout = *fixed_masks;
        if (t.dropout.input.rows() != n || t.dropout.input.cols() != D) {
            throw ConfigError("forward: fixed dropout masks have the wrong shape");
        }
    } else {
        t.dropout.input = Matrix<Real>(n, D, Real(1));
        t.dropout.attended.assign(U, Real(1));
        t.dropout.hidden.assign(Q, Real(1));
        if (use_dropout) {
            for (auto& v : t.dropout.input.data()) draw_mask(v);
            for (auto& v : t.dropout.attended) draw_mask(v);
            for (auto& v : t.dropout.hidden) draw_mask(v);
        }
    }

    // Embed + input dropout.
    t.input = Matrix<Real>(n, D);
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<std::size_t>(t.token_ids[i]);
        if (t.token_ids[i] < 0 || id >= params.embed.rows()) {
            throw DataError("forward: token id out of range: " + std::to_string(t.token_ids[i]));
        }
        for (std::size_t j = 0; j < D; ++j) {
            t.input(i, j) = params.embed(id, j) * t.dropout.input(i, j);
        }
    }

    // LSTM recurrence over the real tokens only; padded steps never advance
    // the state, so s is the hidden state at the last real token.
    for (int g = 0; g < 4; ++g) t.gate[g] = Matrix<Real>(n, U);
    t.cell = Matrix<Real>(n, U);
    t.cell_tanh = Matrix<Real>(n, U);
    t.lstm_out = Matrix<Real>(L, U, Real(0));

    std::vector<Real> h_prev(U, Real(0));
    std::vector<Real> c_prev(U, Real(0));
    std::vector<Real> pre(U);
    for (std::size_t step = 0; step < n; ++step) {
        const auto x = t.input.row(step);
        for (int g = 0; g < 4; ++g) {
            const auto& W = params.gate_w[g];
            const auto& R = params.gate_r[g];
            const auto& b = params.gate_b[g];
            for (std::size_t u = 0; u < U; ++u) {
                Real acc = b[u];
                const auto wrow = W.row(u);
                for (std::size_t j = 0; j < D; ++j) acc += wrow[j] * x[j];
                const auto rrow = R.row(u);
                for (std::size_t j = 0; j < U; ++j) acc += rrow[j] * h_prev[j];
                pre[u] = acc;
            }
            auto out = t.gate[g].row(step);
            if (g == kGateCell) {
                for (std::size_t u = 0; u < U; ++u) out[u] = std::tanh(pre[u]);
            } else {
                for (std::size_t u = 0; u < U; ++u) out[u] = sigmoid(pre[u]);
            }
        }
        for (std::size_t u = 0; u < U; ++u) {
            const Real c_new = t.gate[kGateForget](step, u) * c_prev[u] +
                               t.gate[kGateInput](step, u) * t.gate[kGateCell](step, u);
            t.cell(step, u) = c_new;
            const Real ct = std::tanh(c_new);
            t.cell_tanh(step, u) = ct;
            const Real h_new = t.gate[kGateOutput](step, u) * ct;
            t.lstm_out(step, u) = h_new;
            c_prev[u] = c_new;
            h_prev[u] = h_new;
        }
    }
    t.sentence = h_prev;

    // Context embedding.
    t.context.assign(C, Real(0));
    for (std::size_t m = 0; m < t.topic_probs.size(); ++m) {
        const Real pm = t.topic_probs[m];
        if (pm == Real(0)) continue;
        const auto frow = params.topic_embed.row(m);
        for (std::size_t j = 0; j < C; ++j) t.context[j] += pm * frow[j];
    }

    // Attention.
    t.logits.assign(L, Real(0));
    for (std::size_t l = 0; l < L; ++l) {
        Real acc = Real(0);
        for (std::size_t u = 0; u < U; ++u) acc += params.attention(u, l) * t.sentence[u];
        for (std::size_t j = 0; j < C; ++j) acc += params.attention(U + j, l) * t.context[j];
        t.logits[l] = acc;
    }
    if (params.config.attention_mode == AttentionMode::kSoftmax) {
        t.attn_weights = masked_softmax(std::span<const Real>(t.logits),
                                        std::span<const std::uint8_t>(t.mask));
    } else {
        t.attn_weights.assign(L, Real(0));
        for (std::size_t l = 0; l < n; ++l) t.attn_weights[l] = t.logits[l];
    }
    t.attended.assign(U, Real(0));
    for (std::size_t l = 0; l < n; ++l) {
        const Real w = t.attn_weights[l];
        if (w == Real(0)) continue;
        const auto yrow = t.lstm_out.row(l);
        for (std::size_t u = 0; u < U; ++u) t.attended[u] += w * yrow[u];
    }
    t.attended_drop.resize(U);
    for (std::size_t u = 0; u < U; ++u) t.attended_drop[u] = t.attended[u] * t.dropout.attended[u];

    // Classifier.
    t.hidden.assign(Q, Real(0));
    for (std::size_t q = 0; q < Q; ++q) {
        Real acc = params.hidden_b[q];
        for (std::size_t u = 0; u < U; ++u) acc += params.hidden_w(u, q) * t.attended_drop[u];
        for (std::size_t j = 0; j < C; ++j) acc += params.hidden_w(U + j, q) * t.context[j];
        t.hidden[q] = params.config.hidden_activation == HiddenActivation::kTanh ? std::tanh(acc)
                                                                                 : acc;
    }
    t.hidden_drop.resize(Q);
    for (std::size_t q = 0; q < Q; ++q) t.hidden_drop[q] = t.hidden[q] * t.dropout.hidden[q];

    Real z = params.out_b;
    for (std::size_t q = 0; q < Q; ++q) z += params.out_w[q] * t.hidden_drop[q];
    t.pre_output = z;
    t.output = sigmoid(z);
    return t;
}

template <typename Real>
LstmEncoding<Real> lstm_encode(std::span<const std::int32_t> token_ids,
                               const ModelParams<Real>& params) {
    // Reuse the forward path up to the LSTM by running eval mode with a
    // uniform topic vector; only the encoder products are returned.
    std::vector<Real> uniform(static_cast<std::size_t>(params.dims().topics),
                              Real(1) / static_cast<Real>(params.dims().topics));
    auto trace = forward<Real>(token_ids, uniform, params, RunMode::kEval, Real(0), nullptr);
    return LstmEncoding<Real>{std::move(trace.lstm_out), std::move(trace.sentence),
                              std::move(trace.mask)};
}

template <typename Real>
std::vector<Real> context_embed(std::span<const Real> topic_probs,
                                const Matrix<Real>& topic_embed) {
    check_topic_probs(topic_probs);
    if (topic_probs.size() != topic_embed.rows()) {
        throw DataError("context_embed: p length does not match topic embedding rows");
    }
    std::vector<Real> c(topic_embed.cols(), Real(0));
    for (std::size_t m = 0; m < topic_probs.size(); ++m) {
        const Real pm = topic_probs[m];
        if (pm == Real(0)) continue;
        const auto frow = topic_embed.row(m);
        for (std::size_t j = 0; j < c.size(); ++j) c[j] += pm * frow[j];
    }
    return c;
}

template <typename Real>
AttentionResult<Real> attention(std::span<const Real> sentence, std::span<const Real> context,
                                const Matrix<Real>& lstm_out,
                                std::span<const std::uint8_t> mask, const Matrix<Real>& attn_map,
                                AttentionMode mode) {
    const std::size_t U = sentence.size();
    const std::size_t C = context.size();
    const std::size_t L = lstm_out.rows();
    if (attn_map.rows() != U + C || attn_map.cols() != L || mask.size() != L) {
        throw DataError("attention: inconsistent shapes");
    }
    bool any_real = false;
    for (auto m : mask) any_real = any_real || m != 0;
    if (!any_real) throw DataError("attention: all positions masked");

    std::vector<Real> logits(L, Real(0));
    for (std::size_t l = 0; l < L; ++l) {
        Real acc = Real(0);
        for (std::size_t u = 0; u < U; ++u) acc += attn_map(u, l) * sentence[u];
        for (std::size_t j = 0; j < C; ++j) acc += attn_map(U + j, l) * context[j];
        logits[l] = acc;
    }

    AttentionResult<Real> result;
    if (mode == AttentionMode::kSoftmax) {
        result.weights = masked_softmax(std::span<const Real>(logits), mask);
    } else {
        result.weights.assign(L, Real(0));
        for (std::size_t l = 0; l < L; ++l) {
            if (mask[l]) result.weights[l] = logits[l];
        }
    }
    result.attended.assign(lstm_out.cols(), Real(0));
    for (std::size_t l = 0; l < L; ++l) {
        const Real w = result.weights[l];
        if (w == Real(0)) continue;
        const auto yrow = lstm_out.row(l);
        for (std::size_t u = 0; u < result.attended.size(); ++u) result.attended[u] += w * yrow[u];
    }
    return result;
}

template <typename Real>
Real classify(std::span<const Real> attended, std::span<const Real> context,
              const ModelParams<Real>& params) {
    const std::size_t U = attended.size();
    const std::size_t C = context.size();
    const std::size_t Q = params.hidden_b.size();
    if (params.hidden_w.rows() != U + C) throw DataError("classify: inconsistent shapes");

    Real z = params.out_b;
    for (std::size_t q = 0; q < Q; ++q) {
        Real acc = params.hidden_b[q];
        for (std::size_t u = 0; u < U; ++u) acc += params.hidden_w(u, q) * attended[u];
        for (std::size_t j = 0; j < C; ++j) acc += params.hidden_w(U + j, q) * context[j];
        const Real h = params.config.hidden_activation == HiddenActivation::kTanh ? std::tanh(acc)
                                                                                  : acc;
        z += params.out_w[q] * h;
    }
    return sigmoid(z);
}

// Explicit instantiations: float for training/inference, double for the
// finite-difference gradient checks.
template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<float> init_params<float>(const ModelConfig&, std::uint64_t,
                                               const EmbeddingMatrix*);
template ModelParams<double> init_params<double>(const ModelConfig&, std::uint64_t,
                                                 const EmbeddingMatrix*);
template ForwardTrace<float> forward<float>(std::span<const std::int32_t>, std::span<const float>,
                                            const ModelParams<float>&, RunMode, float, Rng*,
                                            const DropoutMasks<float>*);
template ForwardTrace<double> forward<double>(std::span<const std::int32_t>,
                                              std::span<const double>, const ModelParams<double>&,
                                              RunMode, double, Rng*, const DropoutMasks<double>*);
template LstmEncoding<float> lstm_encode<float>(std::span<const std::int32_t>,
                                                const ModelParams<float>&);
template LstmEncoding<double> lstm_encode<double>(std::span<const std::int32_t>,
                                                  const ModelParams<double>&);
template std::vector<float> context_embed<float>(std::span<const float>, const Matrix<float>&);
template std::vector<double> context_embed<double>(std::span<const double>, const Matrix<double>&);
template AttentionResult<float> attention<float>(std::span<const float>, std::span<const float>,
                                                 const Matrix<float>&,
                                                 std::span<const std::uint8_t>,
                                                 const Matrix<float>&, AttentionMode);
template AttentionResult<double> attention<double>(std::span<const double>,
                                                   std::span<const double>, const Matrix<double>&,
                                                   std::span<const std::uint8_t>,
                                                   const Matrix<double>&, AttentionMode);
template float classify<float>(std::span<const float>, std::span<const float>,
                               const ModelParams<float>&);
template double classify<double>(std::span<const double>, std::span<const double>,
                                 const ModelParams<double>&);

}  // namespace extsumm
