#include "extsumm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "extsumm/errors.hpp"
#include "extsumm/log.hpp"
#include "extsumm/rng.hpp"

namespace extsumm {

double weighted_bce(double o, int label, double pos_weight, double neg_weight) {
    const double clamped = std::clamp(o, 1e-7, 1.0 - 1e-7);
    if (label == 1) return -pos_weight * std::log(clamped);
    return -neg_weight * std::log(1.0 - clamped);
}

template <typename Real>
ModelParams<Real> backward(const ForwardTrace<Real>& trace, int label,
                           const ModelParams<Real>& params, double pos_weight,
                           double neg_weight) {
    const auto& d = params.dims();
    const auto U = static_cast<std::size_t>(d.hidden);
    const auto D = static_cast<std::size_t>(d.embed);
    const auto C = static_cast<std::size_t>(d.context);
    const auto Q = static_cast<std::size_t>(d.classifier);
    const auto L = static_cast<std::size_t>(d.max_len);
    const auto n = static_cast<std::size_t>(trace.true_len);

    if (trace.input.cols() != D || trace.lstm_out.rows() != L || trace.hidden.size() != Q ||
        trace.topic_probs.size() != static_cast<std::size_t>(d.topics)) {
        throw DataError("backward: trace does not match params shapes");
    }

    ModelParams<Real> g = params.zeros_like();

    // Loss -> pre-sigmoid output.
    const Real o = trace.output;
    const Real dz = label == 1 ? static_cast<Real>(pos_weight) * (o - Real(1))
                               : static_cast<Real>(neg_weight) * o;

    // Output layer.
    std::vector<Real> dh(Q);
    for (std::size_t q = 0; q < Q; ++q) {
        g.out_w[q] = dz * trace.hidden_drop[q];
        dh[q] = dz * params.out_w[q] * trace.dropout.hidden[q];
    }
    g.out_b = dz;

    // Hidden layer activation.
    std::vector<Real> dh_pre(Q);
    if (params.config.hidden_activation == HiddenActivation::kTanh) {
        for (std::size_t q = 0; q < Q; ++q) {
            dh_pre[q] = dh[q] * (Real(1) - trace.hidden[q] * trace.hidden[q]);
        }
    } else {
        dh_pre = dh;
    }

    // Hidden layer weights; input was [a_drop, c].
    std::vector<Real> da(U, Real(0));
    std::vector<Real> dc(C, Real(0));
    for (std::size_t q = 0; q < Q; ++q) {
        const Real dq = dh_pre[q];
        g.hidden_b[q] = dq;
        for (std::size_t u = 0; u < U; ++u) {
            g.hidden_w(u, q) = trace.attended_drop[u] * dq;
        }
        for (std::size_t j = 0; j < C; ++j) {
            g.hidden_w(U + j, q) = trace.context[j] * dq;
        }
    }
    for (std::size_t u = 0; u < U; ++u) {
        Real acc = Real(0);
        for (std::size_t q = 0; q < Q; ++q) acc += params.hidden_w(u, q) * dh_pre[q];
        da[u] = acc * trace.dropout.attended[u];
    }
    for (std::size_t j = 0; j < C; ++j) {
        Real acc = Real(0);
        for (std::size_t q = 0; q < Q; ++q) acc += params.hidden_w(U + j, q) * dh_pre[q];
        dc[j] = acc;
    }

    // Attention: a = sum_l w_l Y[l].
    std::vector<Real> dw(L, Real(0));
    Matrix<Real> dY(L, U, Real(0));
    for (std::size_t l = 0; l < n; ++l) {
        const auto yrow = trace.lstm_out.row(l);
        Real acc = Real(0);
        for (std::size_t u = 0; u < U; ++u) {
            acc += da[u] * yrow[u];
            dY(l, u) = trace.attn_weights[l] * da[u];
        }
        dw[l] = acc;
    }

    std::vector<Real> dlogits(L, Real(0));
    if (params.config.attention_mode == AttentionMode::kSoftmax) {
        Real weighted_sum = Real(0);
        for (std::size_t l = 0; l < n; ++l) weighted_sum += trace.attn_weights[l] * dw[l];
        for (std::size_t l = 0; l < n; ++l) {
            dlogits[l] = trace.attn_weights[l] * (dw[l] - weighted_sum);
        }
    } else {
        for (std::size_t l = 0; l < n; ++l) dlogits[l] = dw[l];
    }

    // logits = Z^T [s, c].
    std::vector<Real> ds(U, Real(0));
    for (std::size_t l = 0; l < n; ++l) {
        const Real dl = dlogits[l];
        if (dl == Real(0)) continue;
        for (std::size_t u = 0; u < U; ++u) {
            g.attention(u, l) += trace.sentence[u] * dl;
            ds[u] += params.attention(u, l) * dl;
        }
        for (std::size_t j = 0; j < C; ++j) {
            g.attention(U + j, l) += trace.context[j] * dl;
            dc[j] += params.attention(U + j, l) * dl;
        }
    }

    // Context embedding: c = sum_m p_m F[m].
    for (std::size_t m = 0; m < trace.topic_probs.size(); ++m) {
        const Real pm = trace.topic_probs[m];
        if (pm == Real(0)) continue;
        for (std::size_t j = 0; j < C; ++j) g.topic_embed(m, j) = pm * dc[j];
    }

    // Backpropagation through time. s is the hidden state at the last real
    // step, so ds joins dh there.
    std::vector<Real> dh_next(U, Real(0));  // gradient on h_t from step t+1
    std::vector<Real> dc_next(U, Real(0));  // gradient on c_t from step t+1
    std::vector<Real> dh_t(U), dct(U);
    std::array<std::vector<Real>, 4> dpre;
    for (auto& v : dpre) v.assign(U, Real(0));
    std::vector<Real> dx(D);

    for (std::size_t step = n; step-- > 0;) {
        for (std::size_t u = 0; u < U; ++u) {
            Real acc = dY(step, u) + dh_next[u];
            if (step == n - 1) acc += ds[u];
            dh_t[u] = acc;
        }

        for (std::size_t u = 0; u < U; ++u) {
            const Real i_t = trace.gate[kGateInput](step, u);
            const Real f_t = trace.gate[kGateForget](step, u);
            const Real g_t = trace.gate[kGateCell](step, u);
            const Real o_t = trace.gate[kGateOutput](step, u);
            const Real ct = trace.cell_tanh(step, u);
            const Real c_prev = step > 0 ? trace.cell(step - 1, u) : Real(0);

            const Real do_t = dh_t[u] * ct;
            dpre[kGateOutput][u] = do_t * o_t * (Real(1) - o_t);

            const Real dcell = dh_t[u] * o_t * (Real(1) - ct * ct) + dc_next[u];
            dpre[kGateForget][u] = dcell * c_prev * f_t * (Real(1) - f_t);
            dpre[kGateInput][u] = dcell * g_t * i_t * (Real(1) - i_t);
            dpre[kGateCell][u] = dcell * i_t * (Real(1) - g_t * g_t);
            dct[u] = dcell * f_t;
        }
        dc_next = dct;

        const auto x = trace.input.row(step);
        std::fill(dx.begin(), dx.end(), Real(0));
        std::fill(dh_next.begin(), dh_next.end(), Real(0));
        for (int gate = 0; gate < 4; ++gate) {
            auto& dW = g.gate_w[gate];
            auto& dR = g.gate_r[gate];
            auto& db = g.gate_b[gate];
            const auto& W = params.gate_w[gate];
            const auto& R = params.gate_r[gate];
            const auto& dp = dpre[gate];
            for (std::size_t u = 0; u < U; ++u) {
                const Real dpu = dp[u];
                if (dpu == Real(0)) continue;
                db[u] += dpu;
                auto dwrow = dW.row(u);
                for (std::size_t j = 0; j < D; ++j) dwrow[j] += dpu * x[j];
                const auto wrow = W.row(u);
                for (std::size_t j = 0; j < D; ++j) dx[j] += wrow[j] * dpu;
                if (step > 0) {
                    const auto h_prev = trace.lstm_out.row(step - 1);
                    auto drrow = dR.row(u);
                    for (std::size_t j = 0; j < U; ++j) drrow[j] += dpu * h_prev[j];
                }
                const auto rrow = R.row(u);
                for (std::size_t j = 0; j < U; ++j) dh_next[j] += rrow[j] * dpu;
            }
        }

        // Embedding rows touched by this token, through the input dropout.
        const auto id = static_cast<std::size_t>(trace.token_ids[step]);
        for (std::size_t j = 0; j < D; ++j) {
            g.embed(id, j) += dx[j] * trace.dropout.input(step, j);
        }
    }

    // PAD row never trains.
    for (std::size_t j = 0; j < D; ++j) g.embed(Vocabulary::kPad, j) = Real(0);
    return g;
}

namespace {

// Tensor spans in the fixed iteration order, so parallel structures zip
// without name matching.
template <typename Real>
std::vector<std::span<Real>> tensor_spans(ModelParams<Real>& p) {
    std::vector<std::span<Real>> spans;
    p.for_each_tensor([&](std::string_view, std::span<Real> s) { spans.push_back(s); });
    return spans;
}

template <typename Real>
std::vector<std::span<const Real>> tensor_spans(const ModelParams<Real>& p) {
    std::vector<std::span<const Real>> spans;
    p.for_each_tensor([&](std::string_view, std::span<const Real> s) { spans.push_back(s); });
    return spans;
}

}  // namespace

template <typename Real>
void accumulate(ModelParams<Real>& acc, const ModelParams<Real>& g) {
    auto dst = tensor_spans(acc);
    auto src = tensor_spans(g);
    for (std::size_t t = 0; t < dst.size(); ++t) {
        for (std::size_t i = 0; i < dst[t].size(); ++i) dst[t][i] += src[t][i];
    }
}

template <typename Real>
void scale(ModelParams<Real>& g, Real factor) {
    g.for_each_tensor([&](std::string_view, std::span<Real> data) {
        for (auto& v : data) v *= factor;
    });
}

template <typename Real>
double global_norm(const ModelParams<Real>& g) {
    double sum = 0.0;
    g.for_each_tensor([&](std::string_view, std::span<const Real> data) {
        for (const auto v : data) sum += static_cast<double>(v) * static_cast<double>(v);
    });
    return std::sqrt(sum);
}

template <typename Real>
void adam_step(ModelParams<Real>& params, const ModelParams<Real>& grads, AdamState<Real>& state,
               const TrainConfig& config) {
    grads.for_each_tensor([&](std::string_view name, std::span<const Real> data) {
        for (const auto v : data) {
            if (!std::isfinite(static_cast<double>(v))) {
                throw NumericError("adam_step: non-finite gradient in " + std::string(name));
            }
        }
    });

    state.t += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));

    // Remember the PAD row so the update never touches it.
    std::vector<Real> pad_row(params.embed.row(Vocabulary::kPad).begin(),
                              params.embed.row(Vocabulary::kPad).end());

    auto theta = tensor_spans(params);
    auto grad = tensor_spans(grads);
    auto m = tensor_spans(state.m);
    auto v = tensor_spans(state.v);
    for (std::size_t t = 0; t < theta.size(); ++t) {
        for (std::size_t i = 0; i < theta[t].size(); ++i) {
            const double gi = static_cast<double>(grad[t][i]);
            const double mi =
                config.beta1 * static_cast<double>(m[t][i]) + (1.0 - config.beta1) * gi;
            const double vi =
                config.beta2 * static_cast<double>(v[t][i]) + (1.0 - config.beta2) * gi * gi;
            m[t][i] = static_cast<Real>(mi);
            v[t][i] = static_cast<Real>(vi);
            const double m_hat = mi / bc1;
            const double v_hat = vi / bc2;
            theta[t][i] = static_cast<Real>(static_cast<double>(theta[t][i]) -
                                            config.lr * m_hat / (std::sqrt(v_hat) + config.epsilon));
        }
    }

    auto pad = params.embed.row(Vocabulary::kPad);
    std::copy(pad_row.begin(), pad_row.end(), pad.begin());
}

namespace {

std::vector<float> topic_vector_for(const LabeledDataset& dataset, const std::string& doc_id,
                                    int num_topics) {
    auto it = dataset.doc_topics.find(doc_id);
    if (it == dataset.doc_topics.end()) {
        throw DataError("train: dataset has no topic vector for document " + doc_id);
    }
    if (static_cast<int>(it->second.size()) != num_topics) {
        throw DataError("train: topic vector length mismatch for document " + doc_id);
    }
    return std::vector<float>(it->second.begin(), it->second.end());
}

double mean_eval_loss(const std::vector<std::size_t>& indices, const LabeledDataset& dataset,
                      const std::vector<std::vector<float>>& topic_cache,
                      const ModelParams<float>& params, const TrainConfig& config) {
    if (indices.empty()) return 0.0;
    double total = 0.0;
    for (const auto idx : indices) {
        const auto& ex = dataset.examples[idx];
        const auto trace = forward<float>(ex.token_ids, topic_cache[idx], params, RunMode::kEval,
                                          0.0f, nullptr);
        total += weighted_bce(trace.output, ex.label, config.pos_weight, config.neg_weight);
    }
    return total / static_cast<double>(indices.size());
}

}  // namespace

TrainResult<float> train(const LabeledDataset& dataset, ModelParams<float> params,
                         const TrainConfig& config) {
    if (dataset.examples.empty()) throw DataError("train: empty dataset");
    const std::size_t N = dataset.examples.size();

    // Per-example topic vectors, converted once.
    std::vector<std::vector<float>> topic_cache(N);
    for (std::size_t i = 0; i < N; ++i) {
        topic_cache[i] =
            topic_vector_for(dataset, dataset.examples[i].doc_id, params.dims().topics);
    }

    // Deterministic train/validation split.
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;
    Rng split_rng(derive_seed(config.seed, "train-split"));
    split_rng.shuffle(order);
    const auto val_size = static_cast<std::size_t>(std::floor(
        config.val_fraction * static_cast<double>(N)));
    std::vector<std::size_t> val_idx(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(val_size));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(val_size),
                                       order.end());
    if (train_idx.empty()) throw DataError("train: validation fraction leaves no training data");

    TrainResult<float> result;
    result.params = params;
    if (config.max_epochs <= 0) return result;

    AdamState<float> adam = AdamState<float>::init(params);
    Rng shuffle_rng(derive_seed(config.seed, "train-shuffle"));
    Rng dropout_rng(derive_seed(config.seed, "train-dropout"));

    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;
    const auto batch_size = static_cast<std::size_t>(std::max(config.batch_size, 1));

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        std::size_t epoch_samples = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, train_idx.size());
            const auto count = static_cast<float>(end - start);

            ModelParams<float> batch_grad = params.zeros_like();
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = dataset.examples[train_idx[k]];
                const auto trace =
                    forward<float>(ex.token_ids, topic_cache[train_idx[k]], params,
                                   RunMode::kTrain, static_cast<float>(config.dropout),
                                   &dropout_rng);
                epoch_loss += weighted_bce(trace.output, ex.label, config.pos_weight,
                                           config.neg_weight);
                ++epoch_samples;
                const auto grad =
                    backward<float>(trace, ex.label, params, config.pos_weight, config.neg_weight);
                accumulate(batch_grad, grad);
            }
            scale(batch_grad, 1.0f / count);

            if (config.clip_norm > 0.0) {
                const double norm = global_norm(batch_grad);
                if (norm > config.clip_norm) {
                    scale(batch_grad, static_cast<float>(config.clip_norm / norm));
                }
            }
            adam_step(params, batch_grad, adam, config);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_samples > 0 ? epoch_loss / static_cast<double>(epoch_samples) : 0.0;
        const auto& monitor_idx = val_idx.empty() ? train_idx : val_idx;
        stats.val_loss = mean_eval_loss(monitor_idx, dataset, topic_cache, params, config);
        result.history.push_back(stats);

        if (stats.val_loss < best_val) {
            best_val = stats.val_loss;
            result.params = params;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= config.patience) {
                log_info("early stopping at epoch " + std::to_string(epoch));
                break;
            }
        }
    }
    return result;
}

template ModelParams<float> backward<float>(const ForwardTrace<float>&, int,
                                            const ModelParams<float>&, double, double);
template ModelParams<double> backward<double>(const ForwardTrace<double>&, int,
                                              const ModelParams<double>&, double, double);
template void accumulate<float>(ModelParams<float>&, const ModelParams<float>&);
template void accumulate<double>(ModelParams<double>&, const ModelParams<double>&);
template void scale<float>(ModelParams<float>&, float);
template void scale<double>(ModelParams<double>&, double);
template double global_norm<float>(const ModelParams<float>&);
template double global_norm<double>(const ModelParams<double>&);
template void adam_step<float>(ModelParams<float>&, const ModelParams<float>&, AdamState<float>&,
                               const TrainConfig&);
template void adam_step<double>(ModelParams<double>&, const ModelParams<double>&,
                                AdamState<double>&, const TrainConfig&);

}  // namespace extsumm
