#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dnfcount/dataset.hpp"
#include "dnfcount/model.hpp"

namespace dnfc::nn {

struct TrainConfig {
    double learning_rate = 1e-5;
    double clip_ratio = 0.5;  // global-norm gradient clip
    int epochs = 4;
    int batch_size = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;
};

struct AdamState {
    std::vector<Matrix> m, v;
    long long step = 0;
};

AdamState init_adam(ModelParams& params);

// Mean KL loss over the batch; gradients land in the params' grad buffers
// (cleared first). Batch members are indices into ds.records.
double compute_gradients(ModelParams& params, const Dataset& ds,
                         const std::vector<size_t>& batch);

// Clips the gradient set to the configured global norm, then applies one
// bias-corrected Adam update in place.
void adam_step(ModelParams& params, AdamState& opt, const TrainConfig& cfg);

struct TrainResult {
    std::vector<double> epoch_losses;
    long long steps = 0;
};

// Deterministic for a fixed seed: initialization, shuffle order, and batch
// reduction order are all derived from it. Aborts on non-finite loss.
TrainResult train(ModelParams& params, const Dataset& ds, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch = nullptr);

}  // namespace dnfc::nn
