#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

namespace dnfc::nn {

using Matrix = Eigen::MatrixXd;

// Reverse-mode differentiation tape over dense matrices. Nodes are created
// in topological order by construction; backward() runs one reverse sweep
// and accumulates parameter gradients into externally owned buffers.
// A tape is single-use: build one per forward/loss evaluation.
class Tape {
public:
    using Var = int;

    // Leaf with no gradient flow (inputs, labels).
    Var constant(Matrix v);

    // Leaf referencing an externally owned parameter; after backward() the
    // parameter's gradient contribution is added into *grad.
    Var param(const Matrix* value, Matrix* grad);

    const Matrix& value(Var v) const { return nodes_[v].value; }
    const Matrix& grad(Var v) const { return nodes_[v].grad; }

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);          // same shape
    Var hadamard(Var a, Var b);     // elementwise product
    Var add_col(Var x, Var col);    // broadcast a k x 1 column over all columns of x
    Var broadcast_col(Var col, int cols);
    Var neg(Var a);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var relu(Var a);
    Var sigmoid(Var a);
    Var tanh_op(Var a);
    // ELU shifted to strictly positive range: e^x for x <= 0, x + 1 above.
    // printed_form selects the e^{-x} negative branch instead.
    Var elu_plus_one(Var a, bool printed_form = false);
    Var log_op(Var a);
    Var square(Var a);
    Var sum_cols(Var a);  // k x N -> k x 1
    Var vconcat(Var a, Var b);
    Var rows(Var a, int start, int count);
    // Y(:,j) = X(:,idx[j])
    Var gather_cols(Var a, std::vector<int> idx);
    // Y(:,dst[j]) += X(:,j); Y has num_dst columns
    Var scatter_cols(Var a, std::vector<int> dst, int num_dst);
    // per-column normalization over rows, with elementwise gain and bias (k x 1)
    Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

    // Seeds d(loss)/d(loss) = seed (loss must be 1 x 1) and sweeps the tape.
    void backward(Var loss, double seed = 1.0);

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool needs_grad = false;
        const Matrix* param_value = nullptr;
        Matrix* param_grad = nullptr;
        std::function<void(Tape&, Var)> back;
    };

    Var push(Matrix value, bool needs_grad, std::function<void(Tape&, Var)> back);
    Matrix& grad_buf(Var v);
    void accumulate(Var v, const Matrix& g);
    bool needs(Var v) const { return nodes_[v].needs_grad; }

    std::vector<Node> nodes_;
};

}  // namespace dnfc::nn
