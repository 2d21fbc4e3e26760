#include "dnfcount/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dnfc::nn {

DnfGraph encode_graph(const DnfFormula& f) {
    DnfGraph g;
    g.n = f.num_vars;
    g.m = f.num_clauses();
    for (int j = 0; j < g.m; ++j) {
        for (const Literal& l : f.clauses[j].literals) {
            g.edge_lit.push_back(2 * (l.var - 1) + (l.positive ? 0 : 1));
            g.edge_conj.push_back(j);
        }
    }
    return g;
}

double elu_plus_one(double x, bool printed_form) {
    return x > 0.0 ? x + 1.0 : std::exp(printed_form ? -x : x);
}

namespace {

Matrix uniform_matrix(long rows, long cols, double limit, Rng& rng) {
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
    return w;
}

Dense init_dense(int in, int out, Rng& rng) {
    Dense d;
    d.W = uniform_matrix(out, in, std::sqrt(1.0 / in), rng);
    d.b = Matrix::Zero(out, 1);
    d.gW = Matrix::Zero(out, in);
    d.gb = Matrix::Zero(out, 1);
    return d;
}

Mlp init_mlp(const std::vector<int>& dims, Rng& rng) {
    Mlp mlp;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        mlp.layers.push_back(init_dense(dims[i], dims[i + 1], rng));
    }
    return mlp;
}

LnLstm init_lstm(int d_in, int k, Rng& rng) {
    LnLstm c;
    c.Wx = uniform_matrix(4 * k, d_in, std::sqrt(1.0 / d_in), rng);
    c.Wh = uniform_matrix(4 * k, k, std::sqrt(1.0 / k), rng);
    c.b = Matrix::Zero(4 * k, 1);
    c.b.middleRows(k, k).setConstant(1.0);  // forget gate bias
    c.gain_x = Matrix::Ones(4 * k, 1);
    c.bias_x = Matrix::Zero(4 * k, 1);
    c.gain_h = Matrix::Ones(4 * k, 1);
    c.bias_h = Matrix::Zero(4 * k, 1);
    c.gWx = Matrix::Zero(4 * k, d_in);
    c.gWh = Matrix::Zero(4 * k, k);
    c.gb = Matrix::Zero(4 * k, 1);
    c.ggain_x = Matrix::Zero(4 * k, 1);
    c.gbias_x = Matrix::Zero(4 * k, 1);
    c.ggain_h = Matrix::Zero(4 * k, 1);
    c.gbias_h = Matrix::Zero(4 * k, 1);
    return c;
}

std::vector<int> encoder_dims(const ModelConfig& cfg) {
    std::vector<int> dims{1};
    dims.insert(dims.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
    dims.push_back(cfg.dim);
    return dims;
}

std::vector<int> message_dims(const ModelConfig& cfg) {
    return std::vector<int>(static_cast<size_t>(cfg.message_layers) + 1, cfg.dim);
}

std::vector<int> output_dims(const ModelConfig& cfg) {
    std::vector<int> dims{cfg.dim};
    dims.insert(dims.end(), cfg.output_hidden.begin(), cfg.output_hidden.end());
    dims.push_back(2);
    return dims;
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, uint64_t seed) {
    Rng rng(seed);
    ModelParams p;
    p.config = cfg;
    p.encoder = init_mlp(encoder_dims(cfg), rng);
    p.msg_lit = init_mlp(message_dims(cfg), rng);
    p.msg_conj = init_mlp(message_dims(cfg), rng);
    p.msg_disj = init_mlp(message_dims(cfg), rng);
    p.out_head = init_mlp(output_dims(cfg), rng);
    p.lstm_c1 = init_lstm(cfg.dim, cfg.dim, rng);
    p.lstm_c2 = init_lstm(cfg.dim, cfg.dim, rng);
    p.lstm_d = init_lstm(cfg.dim, cfg.dim, rng);
    p.lstm_l = init_lstm(2 * cfg.dim, cfg.dim, rng);
    p.v_conj = Matrix::Zero(cfg.dim, 1);
    p.v_disj = Matrix::Zero(cfg.dim, 1);
    for (int i = 0; i < cfg.dim; ++i) {
        p.v_conj(i, 0) = 0.1 * rng.normal();
        p.v_disj(i, 0) = 0.1 * rng.normal();
    }
    p.g_v_conj = Matrix::Zero(cfg.dim, 1);
    p.g_v_disj = Matrix::Zero(cfg.dim, 1);
    return p;
}

namespace {

void visit_mlp(const std::string& name, Mlp& mlp,
               const std::function<void(const std::string&, Matrix&, Matrix&)>& fn) {
    for (size_t i = 0; i < mlp.layers.size(); ++i) {
        Dense& d = mlp.layers[i];
        fn(name + "." + std::to_string(i) + ".W", d.W, d.gW);
        fn(name + "." + std::to_string(i) + ".b", d.b, d.gb);
    }
}

void visit_lstm(const std::string& name, LnLstm& c,
                const std::function<void(const std::string&, Matrix&, Matrix&)>& fn) {
    fn(name + ".Wx", c.Wx, c.gWx);
    fn(name + ".Wh", c.Wh, c.gWh);
    fn(name + ".b", c.b, c.gb);
    fn(name + ".gain_x", c.gain_x, c.ggain_x);
    fn(name + ".bias_x", c.bias_x, c.gbias_x);
    fn(name + ".gain_h", c.gain_h, c.ggain_h);
    fn(name + ".bias_h", c.bias_h, c.gbias_h);
}

}  // namespace

void ModelParams::for_each_param(
    const std::function<void(const std::string&, Matrix&, Matrix&)>& fn) {
    visit_mlp("encoder", encoder, fn);
    visit_mlp("msg_lit", msg_lit, fn);
    visit_mlp("msg_conj", msg_conj, fn);
    visit_mlp("msg_disj", msg_disj, fn);
    visit_mlp("out_head", out_head, fn);
    visit_lstm("lstm_c1", lstm_c1, fn);
    visit_lstm("lstm_c2", lstm_c2, fn);
    visit_lstm("lstm_d", lstm_d, fn);
    visit_lstm("lstm_l", lstm_l, fn);
    fn("v_conj", v_conj, g_v_conj);
    fn("v_disj", v_disj, g_v_disj);
}

void ModelParams::zero_grads() {
    for_each_param([](const std::string&, Matrix&, Matrix& g) { g.setZero(); });
}

namespace {

// Tape-side views of the parameter set; each parameter gets exactly one
// tape node per forward pass so gradients accumulate in a single place.
struct MlpVars {
    std::vector<std::pair<Tape::Var, Tape::Var>> layers;  // (W, b)
};

struct LstmVars {
    Tape::Var Wx, Wh, b, gain_x, bias_x, gain_h, bias_h;
};

MlpVars bind_mlp(Tape& t, Mlp& mlp) {
    MlpVars v;
    for (Dense& d : mlp.layers) {
        v.layers.emplace_back(t.param(&d.W, &d.gW), t.param(&d.b, &d.gb));
    }
    return v;
}

LstmVars bind_lstm(Tape& t, LnLstm& c) {
    return LstmVars{t.param(&c.Wx, &c.gWx),         t.param(&c.Wh, &c.gWh),
                    t.param(&c.b, &c.gb),           t.param(&c.gain_x, &c.ggain_x),
                    t.param(&c.bias_x, &c.gbias_x), t.param(&c.gain_h, &c.ggain_h),
                    t.param(&c.bias_h, &c.gbias_h)};
}

Tape::Var run_mlp(Tape& t, const MlpVars& mlp, Tape::Var x) {
    Tape::Var h = x;
    for (size_t i = 0; i < mlp.layers.size(); ++i) {
        h = t.add_col(t.matmul(mlp.layers[i].first, h), mlp.layers[i].second);
        if (i + 1 < mlp.layers.size()) h = t.relu(h);
    }
    return h;
}

struct LstmState {
    Tape::Var h, c;
};

LstmState run_lstm(Tape& t, const LstmVars& cell, int k, Tape::Var x, LstmState state) {
    Tape::Var px = t.matmul(cell.Wx, x);
    Tape::Var ph = t.matmul(cell.Wh, state.h);
    Tape::Var gates[4];
    for (int g = 0; g < 4; ++g) {
        Tape::Var lx = t.layer_norm(t.rows(px, g * k, k), t.rows(cell.gain_x, g * k, k),
                                    t.rows(cell.bias_x, g * k, k));
        Tape::Var lh = t.layer_norm(t.rows(ph, g * k, k), t.rows(cell.gain_h, g * k, k),
                                    t.rows(cell.bias_h, g * k, k));
        gates[g] = t.add_col(t.add(lx, lh), t.rows(cell.b, g * k, k));
    }
    Tape::Var i = t.sigmoid(gates[0]);
    Tape::Var f = t.sigmoid(gates[1]);
    Tape::Var g = t.tanh_op(gates[2]);
    Tape::Var o = t.sigmoid(gates[3]);
    Tape::Var c_new = t.add(t.hadamard(f, state.c), t.hadamard(i, g));
    Tape::Var h_new = t.hadamard(o, t.tanh_op(c_new));
    return {h_new, c_new};
}

struct HeadOutput {
    Tape::Var mean, sigma;
};

HeadOutput run_head(Tape& t, const MlpVars& head, Tape::Var v_disj, bool printed_elu) {
    Tape::Var z = run_mlp(t, head, v_disj);
    Tape::Var mean = t.neg(t.elu_plus_one(t.rows(z, 0, 1), printed_elu));
    Tape::Var sigma = t.elu_plus_one(t.rows(z, 1, 1), printed_elu);
    return {mean, sigma};
}

}  // namespace

ForwardVars forward_on_tape(Tape& t, const DnfGraph& graph, const WeightAssignment& w,
                            ModelParams& params, bool want_trace) {
    const ModelConfig& cfg = params.config;
    const int k = cfg.dim;
    const int nl = graph.num_literal_nodes();
    const int m = graph.m;

    MlpVars enc = bind_mlp(t, params.encoder);
    MlpVars m_lit = bind_mlp(t, params.msg_lit);
    MlpVars m_conj = bind_mlp(t, params.msg_conj);
    MlpVars m_disj = bind_mlp(t, params.msg_disj);
    MlpVars head = bind_mlp(t, params.out_head);
    LstmVars c1 = bind_lstm(t, params.lstm_c1);
    LstmVars c2 = bind_lstm(t, params.lstm_c2);
    LstmVars cd = bind_lstm(t, params.lstm_d);
    LstmVars cl = bind_lstm(t, params.lstm_l);
    Tape::Var v_conj = t.param(&params.v_conj, &params.g_v_conj);
    Tape::Var v_disj = t.param(&params.v_disj, &params.g_v_disj);

    // literal features: the probability of the literal itself
    Matrix feats(1, nl);
    for (int i = 0; i < graph.n; ++i) {
        feats(0, 2 * i) = w[i];
        feats(0, 2 * i + 1) = 1.0 - w[i];
    }

    // negation pairing permutation
    std::vector<int> neg_perm(nl);
    for (int l = 0; l < nl; ++l) neg_perm[l] = l ^ 1;

    LstmState lit{run_mlp(t, enc, t.constant(std::move(feats))),
                  t.constant(Matrix::Zero(k, nl))};
    LstmState conj{t.broadcast_col(v_conj, m), t.constant(Matrix::Zero(k, m))};
    LstmState disj{v_disj, t.constant(Matrix::Zero(k, 1))};

    ForwardVars out;
    for (int iter = 0; iter < cfg.iters; ++iter) {
        // (a) literal -> conjunction
        Tape::Var lit_msgs = run_mlp(t, m_lit, lit.h);
        Tape::Var agg_c = t.scatter_cols(t.gather_cols(lit_msgs, graph.edge_lit),
                                         graph.edge_conj, m);
        LstmState conj_hat = run_lstm(t, c1, k, agg_c, conj);

        // (b) conjunction -> disjunction
        Tape::Var agg_d = t.sum_cols(run_mlp(t, m_conj, conj_hat.h));
        disj = run_lstm(t, cd, k, agg_d, disj);

        // (c) disjunction -> conjunction
        Tape::Var disj_msg = t.broadcast_col(run_mlp(t, m_disj, disj.h), m);
        conj = run_lstm(t, c2, k, disj_msg, conj_hat);

        // (d) conjunction -> literal, concatenated with the negation message
        Tape::Var conj_msgs = run_mlp(t, m_conj, conj.h);
        Tape::Var agg_l = t.scatter_cols(t.gather_cols(conj_msgs, graph.edge_conj),
                                         graph.edge_lit, nl);
        Tape::Var neg_msg = t.gather_cols(lit_msgs, neg_perm);
        lit = run_lstm(t, cl, k, t.vconcat(agg_l, neg_msg), lit);

        if (want_trace) {
            HeadOutput ho = run_head(t, head, disj.h, cfg.printed_elu);
            out.trace.push_back({t.value(ho.mean)(0, 0), t.value(ho.sigma)(0, 0)});
            if (iter + 1 == cfg.iters) {
                out.mean = ho.mean;
                out.sigma = ho.sigma;
            }
        }
    }
    if (!want_trace || cfg.iters == 0) {
        HeadOutput ho = run_head(t, head, disj.h, cfg.printed_elu);
        out.mean = ho.mean;
        out.sigma = ho.sigma;
    }
    return out;
}

GaussianPrediction forward(const DnfFormula& f, const WeightAssignment& w, ModelParams& params) {
    Tape t;
    DnfGraph g = encode_graph(f);
    ForwardVars fwd = forward_on_tape(t, g, w, params);
    return {t.value(fwd.mean)(0, 0), t.value(fwd.sigma)(0, 0)};
}

std::vector<GaussianPrediction> forward_trace(const DnfFormula& f, const WeightAssignment& w,
                                              ModelParams& params) {
    Tape t;
    DnfGraph g = encode_graph(f);
    ForwardVars fwd = forward_on_tape(t, g, w, params, true);
    return fwd.trace;
}

double kl_divergence(double mu1, double sigma1, double mu2, double sigma2) {
    if (!(sigma1 > 0.0 && sigma2 > 0.0)) throw std::domain_error("sigmas must be positive");
    return std::log(sigma2 / sigma1) - 0.5 +
           (sigma1 * sigma1 + (mu1 - mu2) * (mu1 - mu2)) / (2.0 * sigma2 * sigma2);
}

Tape::Var kl_loss_on_tape(Tape& t, const ForwardVars& fwd, double label_mean,
                          double label_sigma) {
    Tape::Var t1 = t.neg(t.log_op(fwd.sigma));
    Tape::Var sq = t.add(t.square(fwd.sigma), t.square(t.add_scalar(fwd.mean, -label_mean)));
    Tape::Var t2 = t.scale(sq, 1.0 / (2.0 * label_sigma * label_sigma));
    return t.add_scalar(t.add(t1, t2), std::log(label_sigma) - 0.5);
}

double predict_wmc(const DnfFormula& f, const WeightAssignment& w, ModelParams& params) {
    return std::exp(forward(f, w, params).mean);
}

// --- checkpoint serialization -------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json j;
    j["shape"] = {m.rows(), m.cols()};
    std::vector<double> data(m.data(), m.data() + m.size());
    j["data"] = data;  // column-major
    return j;
}

Matrix matrix_from_json(const json& j) {
    long rows = j.at("shape")[0].get<long>();
    long cols = j.at("shape")[1].get<long>();
    std::vector<double> data = j.at("data").get<std::vector<double>>();
    if (static_cast<long>(data.size()) != rows * cols)
        throw std::runtime_error("checkpoint tensor size mismatch");
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

}  // namespace

std::string checkpoint_to_string(const ModelParams& params, uint64_t init_seed) {
    json j;
    j["format"] = "dnfcount-model";
    j["version"] = 1;
    j["rng"] = {{"algorithm", "splitmix64+mt19937_64"}, {"init_seed", init_seed}};
    const ModelConfig& cfg = params.config;
    j["config"] = {{"dim", cfg.dim},
                   {"iters", cfg.iters},
                   {"encoder_hidden", cfg.encoder_hidden},
                   {"message_layers", cfg.message_layers},
                   {"output_hidden", cfg.output_hidden},
                   {"printed_elu", cfg.printed_elu}};
    json tensors = json::object();
    const_cast<ModelParams&>(params).for_each_param(
        [&](const std::string& name, Matrix& value, Matrix&) {
            tensors[name] = matrix_to_json(value);
        });
    j["tensors"] = tensors;
    return j.dump();
}

ModelParams checkpoint_from_string(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format") != "dnfcount-model" || j.at("version") != 1)
        throw std::runtime_error("unsupported checkpoint format");
    ModelConfig cfg;
    const json& jc = j.at("config");
    cfg.dim = jc.at("dim").get<int>();
    cfg.iters = jc.at("iters").get<int>();
    cfg.encoder_hidden = jc.at("encoder_hidden").get<std::vector<int>>();
    cfg.message_layers = jc.at("message_layers").get<int>();
    cfg.output_hidden = jc.at("output_hidden").get<std::vector<int>>();
    cfg.printed_elu = jc.at("printed_elu").get<bool>();

    ModelParams params = init_params(cfg, 0);
    const json& tensors = j.at("tensors");
    params.for_each_param([&](const std::string& name, Matrix& value, Matrix&) {
        Matrix loaded = matrix_from_json(tensors.at(name));
        if (loaded.rows() != value.rows() || loaded.cols() != value.cols())
            throw std::runtime_error("checkpoint shape mismatch for " + name);
        value = std::move(loaded);
    });
    return params;
}

void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t init_seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << checkpoint_to_string(params, init_seed);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace dnfc::nn
