#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "extsumm/embeddings.hpp"
#include "extsumm/math.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {

// LSTM gate indices, in checkpoint block order.
enum Gate : int { kGateInput = 0, kGateForget = 1, kGateCell = 2, kGateOutput = 3 };
inline constexpr std::array<char, 4> kGateSuffix = {'i', 'f', 'g', 'o'};

struct ModelDims {
    std::int32_t vocab = 0;   // V
    int embed = 100;          // D, word embedding size
    int hidden = 200;         // U, LSTM hidden size
    int context = 10;         // C, context embedding size
    int topics = 500;         // M
    int max_len = 50;         // L, sentence length cap
    int classifier = 100;     // Q, classifier hidden size

    bool operator==(const ModelDims&) const = default;
};

enum class AttentionMode { kSoftmax, kLinear };
enum class HiddenActivation { kTanh, kIdentity };

struct ModelConfig {
    ModelDims dims;
    AttentionMode attention_mode = AttentionMode::kSoftmax;
    HiddenActivation hidden_activation = HiddenActivation::kTanh;
};

template <typename Real>
struct ModelParams {
    ModelConfig config;

    Matrix<Real> embed;                        // E: V x D, PAD row frozen at zero
    std::array<Matrix<Real>, 4> gate_w;        // W_*: U x D
    std::array<Matrix<Real>, 4> gate_r;        // R_*: U x U
    std::array<std::vector<Real>, 4> gate_b;   // b_*: U
    Matrix<Real> topic_embed;                  // F: M x C
    Matrix<Real> attention;                    // Z: (U+C) x L
    Matrix<Real> hidden_w;                     // H: (U+C) x Q
    std::vector<Real> hidden_b;                // b_H: Q
    std::vector<Real> out_w;                   // O: Q
    Real out_b = Real(0);                      // b_O

    const ModelDims& dims() const { return config.dims; }

    // Same shapes, all zeros. Used for gradients and Adam moments.
    ModelParams zeros_like() const;

    // Visits every trainable tensor as a flat span, in checkpoint order.
    template <typename F>
    void for_each_tensor(F&& fn) {
        fn(std::string_view("E"), std::span<Real>(embed.data()));
        for (int g = 0; g < 4; ++g) {
            fn(std::string_view(gate_w_name(g)), std::span<Real>(gate_w[g].data()));
        }
        for (int g = 0; g < 4; ++g) {
            fn(std::string_view(gate_r_name(g)), std::span<Real>(gate_r[g].data()));
        }
        for (int g = 0; g < 4; ++g) {
            fn(std::string_view(gate_b_name(g)), std::span<Real>(gate_b[g]));
        }
        fn(std::string_view("F"), std::span<Real>(topic_embed.data()));
        fn(std::string_view("Z"), std::span<Real>(attention.data()));
        fn(std::string_view("H"), std::span<Real>(hidden_w.data()));
        fn(std::string_view("b_H"), std::span<Real>(hidden_b));
        fn(std::string_view("O"), std::span<Real>(out_w));
        fn(std::string_view("b_O"), std::span<Real>(&out_b, 1));
    }
    template <typename F>
    void for_each_tensor(F&& fn) const {
        const_cast<ModelParams*>(this)->for_each_tensor(
            [&](std::string_view name, std::span<Real> data) {
                fn(name, std::span<const Real>(data));
            });
    }

    static const char* gate_w_name(int g);
    static const char* gate_r_name(int g);
    static const char* gate_b_name(int g);
};

enum class RunMode { kTrain, kEval };

// Inverted-dropout scale factors (0 or 1/(1-rate)); all ones in eval mode.
template <typename Real>
struct DropoutMasks {
    Matrix<Real> input;          // n x D, over embedded inputs
    std::vector<Real> attended;  // U
    std::vector<Real> hidden;    // Q
};

template <typename Real>
struct ForwardTrace {
    std::vector<std::int32_t> token_ids;  // truncated to L
    int true_len = 0;
    std::vector<std::uint8_t> mask;       // L, 1 at real positions

    Matrix<Real> input;                   // n x D embedded inputs after dropout
    std::array<Matrix<Real>, 4> gate;     // n x U gate activations
    Matrix<Real> cell;                    // n x U cell states
    Matrix<Real> cell_tanh;               // n x U tanh(cell)
    Matrix<Real> lstm_out;                // Y: L x U, rows past true_len zero
    std::vector<Real> sentence;           // s: U, hidden state at last real token
    std::vector<Real> topic_probs;        // p: M
    std::vector<Real> context;            // c: C
    std::vector<Real> logits;             // L (masked positions still raw)
    std::vector<Real> attn_weights;       // w: L, zero at masked positions
    std::vector<Real> attended;           // a: U
    std::vector<Real> attended_drop;      // U
    std::vector<Real> hidden;             // h: Q (post-activation)
    std::vector<Real> hidden_drop;        // Q
    Real pre_output = Real(0);            // O . h + b_O
    Real output = Real(0);                // o in (0, 1)

    DropoutMasks<Real> dropout;
    bool train_mode = false;
};

template <typename Real>
struct LstmEncoding {
    Matrix<Real> outputs;            // Y: L x U
    std::vector<Real> sentence;      // s: U
    std::vector<std::uint8_t> mask;  // L
};

template <typename Real>
struct AttentionResult {
    std::vector<Real> attended;  // a: U
    std::vector<Real> weights;   // w: L
};

// Xavier-normal initialization of every matrix, zero biases except the
// forget-gate bias (1). When pretrained is given its rows overwrite E; a
// V x D mismatch is an error. The PAD embedding row is always zero.
template <typename Real>
ModelParams<Real> init_params(const ModelConfig& config, std::uint64_t seed,
                              const EmbeddingMatrix* pretrained = nullptr);

// Standard LSTM recurrence over the embedded tokens, without dropout. Rows of
// Y past the true length are zero; s is the hidden state at the last real
// token. Inputs longer than L are truncated; an empty input is an error.
template <typename Real>
LstmEncoding<Real> lstm_encode(std::span<const std::int32_t> token_ids,
                               const ModelParams<Real>& params);

// c = sum_i p_i * F[i].
template <typename Real>
std::vector<Real> context_embed(std::span<const Real> topic_probs, const Matrix<Real>& topic_embed);

// Masked attention: logits = Z^T [s, c]; softmax over real positions (or raw
// logits in linear mode with masked weights zeroed); a = sum_l w_l Y[l].
template <typename Real>
AttentionResult<Real> attention(std::span<const Real> sentence, std::span<const Real> context,
                                const Matrix<Real>& lstm_out,
                                std::span<const std::uint8_t> mask, const Matrix<Real>& attn_map,
                                AttentionMode mode = AttentionMode::kSoftmax);

// h = act(H^T [a, c] + b_H); o = sigmoid(O . h + b_O).
template <typename Real>
Real classify(std::span<const Real> attended, std::span<const Real> context,
              const ModelParams<Real>& params);

// Full forward pass. Train mode applies inverted dropout to the embedded
// inputs, the attended vector, and the classifier hidden layer, drawing masks
// from rng unless fixed_masks is given.
template <typename Real>
ForwardTrace<Real> forward(std::span<const std::int32_t> token_ids,
                           std::span<const Real> topic_probs, const ModelParams<Real>& params,
                           RunMode mode, Real dropout_rate, Rng* rng,
                           const DropoutMasks<Real>* fixed_masks = nullptr);

}  // namespace extsumm
