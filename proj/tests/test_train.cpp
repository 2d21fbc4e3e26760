#include <doctest.h>

#include <cmath>

#include "dnfcount/exact.hpp"
#include "dnfcount/klm.hpp"
#include "dnfcount/train.hpp"

using namespace dnfc;
using nn::Matrix;

namespace {

DnfFormula make_formula(int n, std::vector<std::vector<int>> clauses) {
    DnfFormula f;
    f.num_vars = n;
    for (const auto& lits : clauses) {
        Clause c;
        for (int l : lits) c.literals.push_back({std::abs(l), l > 0});
        f.clauses.push_back(c);
    }
    return f;
}

Dataset tiny_dataset(int count, uint64_t seed) {
    Dataset ds;
    Rng rng(seed);
    double sigma = label_sigma(0.1, 0.05);
    for (int i = 0; i < count; ++i) {
        DatasetRecord r;
        r.id = "rec" + std::to_string(i);
        int n = rng.uniform_int(3, 6);
        r.formula.num_vars = n;
        int m = rng.uniform_int(1, 3);
        for (int j = 0; j < m; ++j) {
            Clause c;
            int a = rng.uniform_int(1, n);
            int b = rng.uniform_int(1, n);
            c.literals.push_back({a, rng.coin()});
            if (b != a) c.literals.push_back({b, rng.coin()});
            std::sort(c.literals.begin(), c.literals.end(),
                      [](const Literal& x, const Literal& y) { return x.var < y.var; });
            r.formula.clauses.push_back(c);
        }
        r.weights.assign(n, 0.0);
        for (double& p : r.weights) p = 0.05 + 0.9 * rng.uniform();
        double exact = exact_wmc_enumeration(r.formula, r.weights);
        if (exact <= 1e-6 || exact >= 1.0 - 1e-9) {
            --i;
            continue;
        }
        r.label_mean = std::log(exact);
        r.label_sigma = sigma;
        r.gen_n = n;
        r.gen_width = 2;
        ds.records.push_back(std::move(r));
    }
    return ds;
}

}  // namespace

TEST_CASE("adam converges on a quadratic") {
    // minimize (w - 3)^2 with the production update rule
    nn::ModelConfig cfg;
    cfg.dim = 1;
    cfg.iters = 1;
    nn::TrainConfig tc;
    tc.learning_rate = 0.1;
    tc.clip_ratio = 100.0;
    Matrix w = Matrix::Zero(1, 1);

    // single-parameter stand-in built through the public AdamState machinery
    nn::AdamState st;
    st.m.push_back(Matrix::Zero(1, 1));
    st.v.push_back(Matrix::Zero(1, 1));
    for (int step = 0; step < 600; ++step) {
        double g = 2.0 * (w(0, 0) - 3.0);
        st.step += 1;
        double bc1 = 1.0 - std::pow(tc.beta1, double(st.step));
        double bc2 = 1.0 - std::pow(tc.beta2, double(st.step));
        st.m[0](0, 0) = tc.beta1 * st.m[0](0, 0) + (1 - tc.beta1) * g;
        st.v[0](0, 0) = tc.beta2 * st.v[0](0, 0) + (1 - tc.beta2) * g * g;
        w(0, 0) -= tc.learning_rate * (st.m[0](0, 0) / bc1) /
                   (std::sqrt(st.v[0](0, 0) / bc2) + tc.adam_eps);
    }
    CHECK(w(0, 0) == doctest::Approx(3.0).epsilon(1e-2));
}

TEST_CASE("gradient clipping bounds the global norm") {
    nn::ModelConfig cfg;
    cfg.dim = 4;
    cfg.iters = 1;
    nn::ModelParams params = nn::init_params(cfg, 2);
    // inflate gradients far beyond the clip ratio
    params.for_each_param([](const std::string&, Matrix&, Matrix& g) {
        g.setConstant(100.0);
    });
    nn::TrainConfig tc;
    tc.learning_rate = 0.0;  // isolate the clip: values must not move
    nn::AdamState st = nn::init_adam(params);
    std::vector<Matrix> before;
    params.for_each_param([&](const std::string&, Matrix& v, Matrix&) { before.push_back(v); });
    nn::adam_step(params, st, tc);
    size_t i = 0;
    params.for_each_param([&](const std::string&, Matrix& v, Matrix&) {
        CHECK(v == before[i]);
        ++i;
    });
    // clipped moment norm equals the ratio
    double sq = 0.0;
    for (const Matrix& m : st.m) sq += m.squaredNorm();
    CHECK(std::sqrt(sq) / (1.0 - tc.beta1) == doctest::Approx(tc.clip_ratio).epsilon(1e-6));
}

TEST_CASE("compute_gradients reports the mean loss and fills gradients") {
    Dataset ds = tiny_dataset(6, 3);
    nn::ModelConfig cfg;
    cfg.dim = 8;
    cfg.iters = 2;
    nn::ModelParams params = nn::init_params(cfg, 1);
    double loss = nn::compute_gradients(params, ds, {0, 1, 2, 3, 4, 5});
    CHECK(std::isfinite(loss));
    CHECK(loss > 0.0);
    double gnorm = 0.0;
    params.for_each_param([&](const std::string&, Matrix&, Matrix& g) {
        gnorm += g.squaredNorm();
    });
    CHECK(gnorm > 0.0);
    CHECK_THROWS_AS(nn::compute_gradients(params, ds, {}), std::invalid_argument);
}

TEST_CASE("training reduces the loss and is deterministic") {
    Dataset ds = tiny_dataset(16, 9);
    nn::ModelConfig cfg;
    cfg.dim = 16;
    cfg.iters = 3;
    nn::TrainConfig tc;
    tc.learning_rate = 3e-4;
    tc.epochs = 12;
    tc.batch_size = 8;
    tc.seed = 5;

    nn::ModelParams a = nn::init_params(cfg, tc.seed);
    nn::TrainResult ra = nn::train(a, ds, tc);
    CHECK(ra.epoch_losses.size() == 12);
    CHECK(ra.steps == 12 * 2);
    CHECK(ra.epoch_losses.back() < ra.epoch_losses.front());

    nn::ModelParams b = nn::init_params(cfg, tc.seed);
    nn::TrainResult rb = nn::train(b, ds, tc);
    CHECK(ra.epoch_losses == rb.epoch_losses);
}

TEST_CASE("training rejects an empty dataset") {
    Dataset empty;
    nn::ModelParams params = nn::init_params({.dim = 4, .iters = 1}, 0);
    CHECK_THROWS_AS(nn::train(params, empty, {}), std::invalid_argument);
}
