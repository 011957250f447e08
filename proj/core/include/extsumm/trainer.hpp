#pragma once

#include <cstdint>
#include <vector>

#include "extsumm/labeler.hpp"
#include "extsumm/model.hpp"

namespace extsumm {

struct TrainConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 500;
    double dropout = 0.2;
    double pos_weight = 0.8;
    double neg_weight = 0.2;
    int max_epochs = 50;
    int patience = 5;         // epochs without validation improvement
    double val_fraction = 0.1;
    double clip_norm = 5.0;   // global gradient-norm clip, <= 0 disables
    std::uint64_t seed = 0;
};

template <typename Real>
struct AdamState {
    ModelParams<Real> m;  // first moments, shaped like the params
    ModelParams<Real> v;  // second moments
    std::int64_t t = 0;

    static AdamState init(const ModelParams<Real>& params) {
        return AdamState{params.zeros_like(), params.zeros_like(), 0};
    }
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

template <typename Real>
struct TrainResult {
    ModelParams<Real> params;        // best-validation checkpoint
    std::vector<EpochStats> history;
};

// loss = -(pos_weight * y * ln(o) + neg_weight * (1-y) * ln(1-o)), with o
// clamped to [1e-7, 1-1e-7].
double weighted_bce(double o, int label, double pos_weight, double neg_weight);

// Exact reverse-mode gradients of the weighted BCE through the classifier,
// attention, context embedding, and full backpropagation through time over
// the LSTM. The PAD embedding row gradient is forced to zero. The trace must
// come from forward() on the same params.
template <typename Real>
ModelParams<Real> backward(const ForwardTrace<Real>& trace, int label,
                           const ModelParams<Real>& params, double pos_weight,
                           double neg_weight);

// In-place gradient accumulation: acc += g.
template <typename Real>
void accumulate(ModelParams<Real>& acc, const ModelParams<Real>& g);

// In-place scale: g *= factor.
template <typename Real>
void scale(ModelParams<Real>& g, Real factor);

// Global L2 norm over every gradient entry.
template <typename Real>
double global_norm(const ModelParams<Real>& g);

// Standard Adam with bias correction (epsilon outside the square root). The
// PAD embedding row is never modified. Non-finite gradients are an error.
template <typename Real>
void adam_step(ModelParams<Real>& params, const ModelParams<Real>& grads, AdamState<Real>& state,
               const TrainConfig& config);

// Mini-batch training with a seed-deterministic shuffle, per-batch mean loss,
// and early stopping on validation loss. Returns the best-validation
// checkpoint and the per-epoch loss history.
TrainResult<float> train(const LabeledDataset& dataset, ModelParams<float> params,
                         const TrainConfig& config);

}  // namespace extsumm
