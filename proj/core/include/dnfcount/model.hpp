#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dnfcount/formula.hpp"
#include "dnfcount/rng.hpp"
#include "dnfcount/tape.hpp"

namespace dnfc::nn {

// Three-layer graph encoding of a DNF formula: 2n literal nodes (positive
// node 2(i-1), negative node 2(i-1)+1), m conjunction nodes, one
// disjunction node. Negation pairing is the involution l ^ 1.
struct DnfGraph {
    int n = 0;
    int m = 0;
    std::vector<int> edge_lit;   // literal node of each literal-conjunction edge
    std::vector<int> edge_conj;  // conjunction node of the same edge

    int num_literal_nodes() const { return 2 * n; }
    long long num_edges() const { return static_cast<long long>(edge_lit.size()); }

    // 2*sum(w_i) literal<->conjunction + 2n negation + 2m conjunction<->disjunction
    long long messages_per_iteration() const {
        return 2 * num_edges() + 2ll * n + 2ll * m;
    }
};

DnfGraph encode_graph(const DnfFormula& f);

struct ModelConfig {
    int dim = 128;   // representation width k
    int iters = 8;   // message passing iterations T
    std::vector<int> encoder_hidden = {8, 32};  // encoder MLP: 1 -> 8 -> 32 -> dim
    int message_layers = 4;                     // message MLPs: dim -> dim, 4 layers
    std::vector<int> output_hidden = {32, 8};   // output head: dim -> 32 -> 8 -> 2
    bool printed_elu = false;  // use the e^{-x} negative branch of ELU+1
};

struct Dense {
    Matrix W, b;
    Matrix gW, gb;
};

// MLP with ReLU hidden activations and a linear output layer.
struct Mlp {
    std::vector<Dense> layers;
};

// LSTM cell with layer normalization on the input and recurrent
// pre-activations of each gate block (order: input, forget, cell, output).
// Forget-gate bias starts at +1; cell states start at zero.
struct LnLstm {
    Matrix Wx, Wh, b;  // (4k x d_in), (4k x k), (4k x 1)
    Matrix gain_x, bias_x, gain_h, bias_h;  // (4k x 1)
    Matrix gWx, gWh, gb, ggain_x, gbias_x, ggain_h, gbias_h;
};

struct ModelParams {
    ModelConfig config;
    Mlp encoder;    // f_enc
    Mlp msg_lit;    // M_l
    Mlp msg_conj;   // M_c
    Mlp msg_disj;   // M_d
    Mlp out_head;   // f_out
    LnLstm lstm_c1, lstm_c2, lstm_d, lstm_l;
    Matrix v_conj, v_disj;  // learned initial vectors (k x 1)
    Matrix g_v_conj, g_v_disj;

    void for_each_param(const std::function<void(const std::string&, Matrix&, Matrix&)>& fn);
    void zero_grads();
};

ModelParams init_params(const ModelConfig& cfg, uint64_t seed);

struct GaussianPrediction {
    double mean = 0.0;   // < 0
    double sigma = 0.0;  // > 0
};

// Scalar ELU+1 used by the output head.
double elu_plus_one(double x, bool printed_form = false);

// Handles into a tape holding a full forward pass.
struct ForwardVars {
    Tape::Var mean = -1;   // 1 x 1, negative
    Tape::Var sigma = -1;  // 1 x 1, positive
    std::vector<GaussianPrediction> trace;  // per-iteration head outputs
};

// Unrolls T message passing iterations on the tape. Literal node features
// are the satisfaction probabilities of the literals themselves.
ForwardVars forward_on_tape(Tape& tape, const DnfGraph& graph, const WeightAssignment& w,
                            ModelParams& params, bool want_trace = false);

GaussianPrediction forward(const DnfFormula& f, const WeightAssignment& w, ModelParams& params);

// Forward pass with the output head applied after every iteration.
std::vector<GaussianPrediction> forward_trace(const DnfFormula& f, const WeightAssignment& w,
                                              ModelParams& params);

// KL(N1 || N2) for Gaussians, N1 the prediction and N2 the label.
double kl_divergence(double mu1, double sigma1, double mu2, double sigma2);

// Adds the KL loss against a fixed label on the tape.
Tape::Var kl_loss_on_tape(Tape& tape, const ForwardVars& fwd, double label_mean,
                          double label_sigma);

// exp(predicted log count), strictly in (0,1).
double predict_wmc(const DnfFormula& f, const WeightAssignment& w, ModelParams& params);

// Versioned JSON checkpoint with config, RNG metadata, and named tensors.
void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t init_seed);
ModelParams load_checkpoint(const std::string& path);
std::string checkpoint_to_string(const ModelParams& params, uint64_t init_seed);
ModelParams checkpoint_from_string(const std::string& text);

}  // namespace dnfc::nn
