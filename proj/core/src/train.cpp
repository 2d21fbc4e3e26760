#include "dnfcount/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dnfc::nn {

AdamState init_adam(ModelParams& params) {
    AdamState st;
    params.for_each_param([&](const std::string&, Matrix& value, Matrix&) {
        st.m.push_back(Matrix::Zero(value.rows(), value.cols()));
        st.v.push_back(Matrix::Zero(value.rows(), value.cols()));
    });
    return st;
}

double compute_gradients(ModelParams& params, const Dataset& ds,
                         const std::vector<size_t>& batch) {
    if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
    params.zero_grads();
    double total_loss = 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (size_t idx : batch) {
        const DatasetRecord& rec = ds.records[idx];
        Tape tape;
        DnfGraph graph = encode_graph(rec.formula);
        ForwardVars fwd = forward_on_tape(tape, graph, rec.weights, params);
        Tape::Var loss = kl_loss_on_tape(tape, fwd, rec.label_mean, rec.label_sigma);
        double value = tape.value(loss)(0, 0);
        if (!std::isfinite(value))
            throw std::runtime_error("non-finite loss on record " + rec.id);
        total_loss += value;
        tape.backward(loss, inv);
    }
    return total_loss * inv;
}

void adam_step(ModelParams& params, AdamState& opt, const TrainConfig& cfg) {
    double sq_norm = 0.0;
    params.for_each_param([&](const std::string&, Matrix&, Matrix& g) {
        sq_norm += g.squaredNorm();
    });
    double norm = std::sqrt(sq_norm);
    double scale = norm > cfg.clip_ratio && norm > 0.0 ? cfg.clip_ratio / norm : 1.0;

    opt.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step));
    size_t i = 0;
    params.for_each_param([&](const std::string&, Matrix& value, Matrix& g) {
        Matrix eg = g * scale;
        opt.m[i] = cfg.beta1 * opt.m[i] + (1.0 - cfg.beta1) * eg;
        opt.v[i] = cfg.beta2 * opt.v[i] + (1.0 - cfg.beta2) * eg.cwiseProduct(eg);
        Matrix mhat = opt.m[i] / bc1;
        Matrix vhat = opt.v[i] / bc2;
        value -= cfg.learning_rate *
                 (mhat.array() / (vhat.array().sqrt() + cfg.adam_eps)).matrix();
        ++i;
    });
}

TrainResult train(ModelParams& params, const Dataset& ds, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch) {
    if (ds.records.empty()) throw std::invalid_argument("dataset is empty");
    AdamState opt = init_adam(params);
    Rng shuffle_rng = Rng::stream(cfg.seed, 0x5u);
    TrainResult result;

    std::vector<size_t> order(ds.records.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with our own stream for cross-platform determinism
        for (size_t i = order.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(
                shuffle_rng.uniform_int(0, static_cast<int>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<size_t> batch(order.begin() + start, order.begin() + end);
            epoch_loss += compute_gradients(params, ds, batch);
            adam_step(params, opt, cfg);
            ++batches;
            ++result.steps;
        }
        epoch_loss /= static_cast<double>(batches);
        result.epoch_losses.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch, epoch_loss);
    }
    return result;
}

}  // namespace dnfc::nn
