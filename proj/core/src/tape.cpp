#include "dnfcount/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dnfc::nn {

Tape::Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, Var)> back) {
    Node node;
    node.value = std::move(value);
    node.needs_grad = needs_grad;
    node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return static_cast<Var>(nodes_.size() - 1);
}

Matrix& Tape::grad_buf(Var v) {
    Node& n = nodes_[v];
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
    if (!nodes_[v].needs_grad) return;
    grad_buf(v) += g;
}

Tape::Var Tape::constant(Matrix v) { return push(std::move(v), false, nullptr); }

Tape::Var Tape::param(const Matrix* value, Matrix* grad) {
    Var id = push(*value, true, nullptr);
    nodes_[id].param_value = value;
    nodes_[id].param_grad = grad;
    return id;
}

Tape::Var Tape::matmul(Var a, Var b) {
    Matrix v = nodes_[a].value * nodes_[b].value;
    return push(std::move(v), needs(a) || needs(b), [a, b](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        if (t.needs(a)) t.accumulate(a, g * t.nodes_[b].value.transpose());
        if (t.needs(b)) t.accumulate(b, t.nodes_[a].value.transpose() * g);
    });
}

Tape::Var Tape::add(Var a, Var b) {
    Matrix v = nodes_[a].value + nodes_[b].value;
    return push(std::move(v), needs(a) || needs(b), [a, b](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Tape::Var Tape::hadamard(Var a, Var b) {
    Matrix v = nodes_[a].value.cwiseProduct(nodes_[b].value);
    return push(std::move(v), needs(a) || needs(b), [a, b](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        if (t.needs(a)) t.accumulate(a, g.cwiseProduct(t.nodes_[b].value));
        if (t.needs(b)) t.accumulate(b, g.cwiseProduct(t.nodes_[a].value));
    });
}

Tape::Var Tape::add_col(Var x, Var col) {
    Matrix v = nodes_[x].value.colwise() + Eigen::VectorXd(nodes_[col].value.col(0));
    return push(std::move(v), needs(x) || needs(col), [x, col](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        t.accumulate(x, g);
        if (t.needs(col)) t.accumulate(col, g.rowwise().sum());
    });
}

Tape::Var Tape::broadcast_col(Var col, int cols) {
    Matrix v = nodes_[col].value.col(0).replicate(1, cols);
    return push(std::move(v), needs(col), [col](Tape& t, Var self) {
        t.accumulate(col, t.nodes_[self].grad.rowwise().sum());
    });
}

Tape::Var Tape::neg(Var a) {
    return push(-nodes_[a].value, needs(a), [a](Tape& t, Var self) {
        t.accumulate(a, -t.nodes_[self].grad);
    });
}

Tape::Var Tape::scale(Var a, double s) {
    return push(nodes_[a].value * s, needs(a), [a, s](Tape& t, Var self) {
        t.accumulate(a, t.nodes_[self].grad * s);
    });
}

Tape::Var Tape::add_scalar(Var a, double s) {
    return push(nodes_[a].value.array() + s, needs(a), [a](Tape& t, Var self) {
        t.accumulate(a, t.nodes_[self].grad);
    });
}

Tape::Var Tape::relu(Var a) {
    Matrix v = nodes_[a].value.cwiseMax(0.0);
    return push(std::move(v), needs(a), [a](Tape& t, Var self) {
        Matrix mask = (t.nodes_[a].value.array() > 0.0).cast<double>();
        t.accumulate(a, t.nodes_[self].grad.cwiseProduct(mask));
    });
}

Tape::Var Tape::sigmoid(Var a) {
    Matrix v = (1.0 / (1.0 + (-nodes_[a].value.array()).exp())).matrix();
    return push(std::move(v), needs(a), [a](Tape& t, Var self) {
        const auto& y = t.nodes_[self].value.array();
        t.accumulate(a, (t.nodes_[self].grad.array() * y * (1.0 - y)).matrix());
    });
}

Tape::Var Tape::tanh_op(Var a) {
    Matrix v = nodes_[a].value.array().tanh().matrix();
    return push(std::move(v), needs(a), [a](Tape& t, Var self) {
        const auto& y = t.nodes_[self].value.array();
        t.accumulate(a, (t.nodes_[self].grad.array() * (1.0 - y * y)).matrix());
    });
}

Tape::Var Tape::elu_plus_one(Var a, bool printed_form) {
    const Matrix& x = nodes_[a].value;
    Matrix v(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double xi = x.data()[i];
        v.data()[i] = xi > 0.0 ? xi + 1.0 : std::exp(printed_form ? -xi : xi);
    }
    return push(std::move(v), needs(a), [a, printed_form](Tape& t, Var self) {
        const Matrix& x = t.nodes_[a].value;
        const Matrix& g = t.nodes_[self].grad;
        Matrix gx(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double xi = x.data()[i];
            double d = xi > 0.0 ? 1.0
                                : (printed_form ? -std::exp(-xi) : std::exp(xi));
            gx.data()[i] = g.data()[i] * d;
        }
        t.accumulate(a, gx);
    });
}

Tape::Var Tape::log_op(Var a) {
    Matrix v = nodes_[a].value.array().log().matrix();
    return push(std::move(v), needs(a), [a](Tape& t, Var self) {
        t.accumulate(a, t.nodes_[self].grad.cwiseQuotient(t.nodes_[a].value));
    });
}

Tape::Var Tape::square(Var a) {
    Matrix v = nodes_[a].value.array().square().matrix();
    return push(std::move(v), needs(a), [a](Tape& t, Var self) {
        t.accumulate(a, (t.nodes_[self].grad.array() * 2.0 * t.nodes_[a].value.array()).matrix());
    });
}

Tape::Var Tape::sum_cols(Var a) {
    Matrix v = nodes_[a].value.rowwise().sum();
    return push(std::move(v), needs(a), [a](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        t.accumulate(a, g.replicate(1, t.nodes_[a].value.cols()));
    });
}

Tape::Var Tape::vconcat(Var a, Var b) {
    const Matrix& va = nodes_[a].value;
    const Matrix& vb = nodes_[b].value;
    Matrix v(va.rows() + vb.rows(), va.cols());
    v.topRows(va.rows()) = va;
    v.bottomRows(vb.rows()) = vb;
    long ra = va.rows();
    return push(std::move(v), needs(a) || needs(b), [a, b, ra](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        t.accumulate(a, g.topRows(ra));
        t.accumulate(b, g.bottomRows(g.rows() - ra));
    });
}

Tape::Var Tape::rows(Var a, int start, int count) {
    Matrix v = nodes_[a].value.middleRows(start, count);
    return push(std::move(v), needs(a), [a, start, count](Tape& t, Var self) {
        Matrix g = Matrix::Zero(t.nodes_[a].value.rows(), t.nodes_[a].value.cols());
        g.middleRows(start, count) = t.nodes_[self].grad;
        t.accumulate(a, g);
    });
}

Tape::Var Tape::gather_cols(Var a, std::vector<int> idx) {
    const Matrix& x = nodes_[a].value;
    Matrix v(x.rows(), static_cast<long>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) v.col(static_cast<long>(j)) = x.col(idx[j]);
    return push(std::move(v), needs(a), [a, idx = std::move(idx)](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        Matrix gx = Matrix::Zero(t.nodes_[a].value.rows(), t.nodes_[a].value.cols());
        for (size_t j = 0; j < idx.size(); ++j) gx.col(idx[j]) += g.col(static_cast<long>(j));
        t.accumulate(a, gx);
    });
}

Tape::Var Tape::scatter_cols(Var a, std::vector<int> dst, int num_dst) {
    const Matrix& x = nodes_[a].value;
    Matrix v = Matrix::Zero(x.rows(), num_dst);
    for (size_t j = 0; j < dst.size(); ++j) v.col(dst[j]) += x.col(static_cast<long>(j));
    return push(std::move(v), needs(a), [a, dst = std::move(dst)](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        Matrix gx(t.nodes_[a].value.rows(), t.nodes_[a].value.cols());
        for (size_t j = 0; j < dst.size(); ++j) gx.col(static_cast<long>(j)) = g.col(dst[j]);
        t.accumulate(a, gx);
    });
}

Tape::Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
    const Matrix& in = nodes_[x].value;
    const long k = in.rows();
    auto xhat = std::make_shared<Matrix>(in.rows(), in.cols());
    auto istd = std::make_shared<Eigen::VectorXd>(in.cols());
    Matrix v(in.rows(), in.cols());
    for (long j = 0; j < in.cols(); ++j) {
        double mu = in.col(j).mean();
        double var = (in.col(j).array() - mu).square().sum() / static_cast<double>(k);
        double is = 1.0 / std::sqrt(var + eps);
        (*istd)(j) = is;
        xhat->col(j) = (in.col(j).array() - mu) * is;
        v.col(j) = xhat->col(j).cwiseProduct(nodes_[gain].value.col(0)) + nodes_[bias].value.col(0);
    }
    bool ng = needs(x) || needs(gain) || needs(bias);
    return push(std::move(v), ng, [x, gain, bias, xhat, istd, k](Tape& t, Var self) {
        const Matrix& g = t.nodes_[self].grad;
        if (t.needs(gain)) t.accumulate(gain, g.cwiseProduct(*xhat).rowwise().sum());
        if (t.needs(bias)) t.accumulate(bias, g.rowwise().sum());
        if (t.needs(x)) {
            const Eigen::VectorXd& gv = t.nodes_[gain].value.col(0);
            Matrix gx(g.rows(), g.cols());
            for (long j = 0; j < g.cols(); ++j) {
                Eigen::VectorXd dxh = g.col(j).cwiseProduct(gv);
                double m1 = dxh.mean();
                double m2 = dxh.cwiseProduct(xhat->col(j)).mean();
                gx.col(j) =
                    (*istd)(j) * (dxh.array() - m1 - xhat->col(j).array() * m2).matrix();
            }
            t.accumulate(x, gx);
        }
    });
}

void Tape::backward(Var loss, double seed) {
    if (nodes_[loss].value.size() != 1)
        throw std::invalid_argument("backward requires a scalar loss");
    grad_buf(loss)(0, 0) += seed;
    for (Var v = loss; v >= 0; --v) {
        Node& node = nodes_[v];
        if (!node.needs_grad || node.grad.size() == 0) continue;
        if (node.back) node.back(*this, v);
        if (node.param_grad) *node.param_grad += node.grad;
    }
}

}  // namespace dnfc::nn
