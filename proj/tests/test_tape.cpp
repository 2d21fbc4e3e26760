#include <doctest.h>

#include <functional>

#include "dnfcount/rng.hpp"
#include "dnfcount/tape.hpp"

using namespace dnfc;
using nn::Matrix;
using nn::Tape;

namespace {

Matrix random_matrix(int r, int c, Rng& rng) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = 2.0 * rng.uniform() - 1.0;
    return m;
}

// Checks d(sum of scalar loss)/d(param) against central differences for a
// builder that maps parameter tape vars to a 1x1 loss var.
void check_gradient(std::vector<Matrix> params,
                    const std::function<Tape::Var(Tape&, const std::vector<Tape::Var>&)>& build,
                    double tol = 1e-6) {
    std::vector<Matrix> grads;
    for (const Matrix& p : params) grads.push_back(Matrix::Zero(p.rows(), p.cols()));

    {
        Tape t;
        std::vector<Tape::Var> vars;
        for (size_t i = 0; i < params.size(); ++i) vars.push_back(t.param(&params[i], &grads[i]));
        Tape::Var loss = build(t, vars);
        REQUIRE(t.value(loss).size() == 1);
        t.backward(loss);
    }

    const double h = 1e-6;
    for (size_t i = 0; i < params.size(); ++i) {
        for (int r = 0; r < params[i].rows(); ++r) {
            for (int c = 0; c < params[i].cols(); ++c) {
                double saved = params[i](r, c);
                auto eval = [&](double x) {
                    params[i](r, c) = x;
                    Tape t;
                    std::vector<Tape::Var> vars;
                    std::vector<Matrix> dummy(params.size());
                    for (size_t k = 0; k < params.size(); ++k) {
                        dummy[k] = Matrix::Zero(params[k].rows(), params[k].cols());
                        vars.push_back(t.param(&params[k], &dummy[k]));
                    }
                    return t.value(build(t, vars))(0, 0);
                };
                double fd = (eval(saved + h) - eval(saved - h)) / (2.0 * h);
                params[i](r, c) = saved;
                double analytic = grads[i](r, c);
                double denom = std::max({std::abs(fd), std::abs(analytic), 1.0});
                CHECK(std::abs(fd - analytic) / denom < tol);
            }
        }
    }
}

Tape::Var scalarize(Tape& t, Tape::Var x) {
    // sum of all entries via sum_cols twice won't reach 1x1 for k x 1; square
    // then sum keeps the loss sensitive to every entry.
    Tape::Var sq = t.square(x);
    Tape::Var col = t.sum_cols(sq);                 // k x 1
    Tape::Var row = t.matmul(t.constant(Matrix::Ones(1, t.value(col).rows())), col);
    return row;                                      // 1 x 1
}

}  // namespace

TEST_CASE("gradients of elementwise and linear ops") {
    Rng rng(11);
    check_gradient({random_matrix(3, 4, rng), random_matrix(3, 4, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.add(t.hadamard(v[0], v[1]), t.neg(v[1])));
                   });
    check_gradient({random_matrix(2, 3, rng), random_matrix(3, 4, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.matmul(v[0], v[1]));
                   });
    check_gradient({random_matrix(3, 5, rng), random_matrix(3, 1, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.add_col(v[0], v[1]));
                   });
    check_gradient({random_matrix(3, 1, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.broadcast_col(v[0], 4));
                   });
    check_gradient({random_matrix(2, 2, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.add_scalar(t.scale(v[0], -1.7), 0.3));
                   });
}

TEST_CASE("gradients of nonlinearities") {
    Rng rng(12);
    // keep inputs away from the ReLU kink
    Matrix a = random_matrix(3, 4, rng);
    for (int i = 0; i < a.size(); ++i)
        if (std::abs(a.data()[i]) < 0.05) a.data()[i] = 0.1;
    check_gradient({a}, [](Tape& t, const std::vector<Tape::Var>& v) {
        return scalarize(t, t.relu(v[0]));
    });
    check_gradient({random_matrix(3, 4, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.sigmoid(v[0]));
                   });
    check_gradient({random_matrix(3, 4, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.tanh_op(v[0]));
                   });
    for (bool printed : {false, true}) {
        check_gradient({a}, [printed](Tape& t, const std::vector<Tape::Var>& v) {
            return scalarize(t, t.elu_plus_one(v[0], printed));
        });
    }
    Matrix pos = random_matrix(3, 4, rng);
    for (int i = 0; i < pos.size(); ++i) pos.data()[i] = std::abs(pos.data()[i]) + 0.2;
    check_gradient({pos}, [](Tape& t, const std::vector<Tape::Var>& v) {
        return scalarize(t, t.log_op(v[0]));
    });
}

TEST_CASE("gradients of shape ops") {
    Rng rng(13);
    check_gradient({random_matrix(3, 5, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.sum_cols(v[0]));
                   });
    check_gradient({random_matrix(2, 4, rng), random_matrix(3, 4, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.vconcat(v[0], v[1]));
                   });
    check_gradient({random_matrix(5, 3, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.rows(v[0], 1, 3));
                   });
    check_gradient({random_matrix(3, 4, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.gather_cols(v[0], {2, 0, 0, 3, 1}));
                   });
    check_gradient({random_matrix(3, 5, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       return scalarize(t, t.scatter_cols(v[0], {1, 0, 1, 2, 0}, 3));
                   });
}

TEST_CASE("gradient of layer normalization") {
    Rng rng(14);
    check_gradient(
        {random_matrix(4, 3, rng), random_matrix(4, 1, rng), random_matrix(4, 1, rng)},
        [](Tape& t, const std::vector<Tape::Var>& v) {
            return scalarize(t, t.layer_norm(v[0], v[1], v[2]));
        },
        1e-5);
}

TEST_CASE("layer norm output is normalized per column") {
    Rng rng(15);
    Matrix x = random_matrix(6, 4, rng);
    Matrix gain = Matrix::Ones(6, 1), bias = Matrix::Zero(6, 1);
    Matrix gg = gain, gb = bias;
    Tape t;
    Tape::Var y = t.layer_norm(t.constant(x), t.param(&gain, &gg), t.param(&bias, &gb));
    const Matrix& out = t.value(y);
    for (int c = 0; c < 4; ++c) {
        CHECK(out.col(c).mean() == doctest::Approx(0.0).epsilon(1e-9));
        double var = (out.col(c).array() - out.col(c).mean()).square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("gather then scatter composes") {
    Rng rng(16);
    check_gradient({random_matrix(3, 4, rng)},
                   [](Tape& t, const std::vector<Tape::Var>& v) {
                       Tape::Var g = t.gather_cols(v[0], {0, 1, 1, 3, 2});
                       return scalarize(t, t.scatter_cols(g, {1, 1, 0, 2, 3}, 4));
                   });
}

TEST_CASE("backward seed scales parameter gradients") {
    Matrix p(1, 1);
    p(0, 0) = 3.0;
    Matrix g1 = Matrix::Zero(1, 1), g2 = Matrix::Zero(1, 1);
    {
        Tape t;
        t.backward(t.square(t.param(&p, &g1)), 1.0);
    }
    {
        Tape t;
        t.backward(t.square(t.param(&p, &g2)), 0.25);
    }
    CHECK(g1(0, 0) == doctest::Approx(6.0));
    CHECK(g2(0, 0) == doctest::Approx(1.5));
}
