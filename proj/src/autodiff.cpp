#include "odernn/autodiff.hpp"

#include <cmath>
#include <algorithm>

namespace odernn {

const Tensor& Var::value() const { return tape->value(*this); }
const Tensor& Var::grad() const { return tape->grad(*this); }

Var Tape::push(Node n) {
    n.grad = Tensor::zeros(n.value.shape);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<std::int64_t>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
const Tape::Node& Tape::node(Var v) const { return nodes_[static_cast<std::size_t>(v.id)]; }

void Tape::check_same_tape(Var v) const {
    if (v.tape != this || v.id < 0 || v.id >= num_nodes()) {
        throw UsageError("variable does not belong to this tape");
    }
}

const Tensor& Tape::value(Var v) const {
    check_same_tape(v);
    return node(v).value;
}

const Tensor& Tape::grad(Var v) const {
    check_same_tape(v);
    return node(v).grad;
}

Var Tape::leaf(Tensor value) {
    require_finite(value, "leaf");
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    check_same_tape(a);
    check_same_tape(b);
    Node n;
    n.op = Op::Add;
    n.value = odernn::add(node(a).value, node(b).value);
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    check_same_tape(a);
    check_same_tape(b);
    Node n;
    n.op = Op::Sub;
    n.value = odernn::sub(node(a).value, node(b).value);
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    check_same_tape(a);
    check_same_tape(b);
    Node n;
    n.op = Op::Mul;
    n.value = odernn::mul(node(a).value, node(b).value);
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
}

Var Tape::scale(Var a, double k) {
    check_same_tape(a);
    Node n;
    n.op = Op::Scale;
    n.value = odernn::scale(node(a).value, k);
    n.a = a.id;
    n.k = k;
    return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
    check_same_tape(a);
    Node n;
    n.op = Op::Sigmoid;
    n.value = odernn::sigmoid(node(a).value);
    n.a = a.id;
    return push(std::move(n));
}

Var Tape::tanh(Var a) {
    check_same_tape(a);
    Node n;
    n.op = Op::Tanh;
    n.value = odernn::tanh_t(node(a).value);
    n.a = a.id;
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
    check_same_tape(a);
    check_same_tape(b);
    Node n;
    n.op = Op::MatMul;
    n.value = odernn::matmul(node(a).value, node(b).value);
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
}

Var Tape::sum(Var a) {
    check_same_tape(a);
    Node n;
    n.op = Op::Sum;
    n.value = Tensor::scalar(reduce_sum(node(a).value));
    require_finite(n.value, "sum");
    n.a = a.id;
    return push(std::move(n));
}

Var Tape::mean(Var a) {
    check_same_tape(a);
    Node n;
    n.op = Op::Mean;
    n.value = Tensor::scalar(reduce_mean(node(a).value));
    require_finite(n.value, "mean");
    n.a = a.id;
    return push(std::move(n));
}

Var Tape::cross_entropy(Var logits, std::int64_t label) {
    check_same_tape(logits);
    const Tensor& z = node(logits).value;
    if (z.rank() != 1) throw UsageError("cross_entropy: logits must be rank 1");
    if (label < 0 || label >= z.size()) {
        throw UsageError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                         std::to_string(z.size()) + " classes");
    }
    const double zmax = *std::max_element(z.data.begin(), z.data.end());
    double denom = 0.0;
    Tensor probs = Tensor::zeros(z.shape);
    for (std::int64_t i = 0; i < z.size(); ++i) {
        probs.at(i) = std::exp(z.at(i) - zmax);
        denom += probs.at(i);
    }
    for (auto& p : probs.data) p /= denom;
    const double loss = -(z.at(label) - zmax - std::log(denom));

    Node n;
    n.op = Op::CrossEntropy;
    n.value = Tensor::scalar(loss);
    require_finite(n.value, "cross_entropy");
    n.a = logits.id;
    n.label = label;
    n.saved = std::move(probs);
    return push(std::move(n));
}

void Tape::backward(Var loss) {
    check_same_tape(loss);
    if (node(loss).value.size() != 1) {
        throw UsageError("backward: loss must be scalar-shaped");
    }
    for (auto& n : nodes_) {
        std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    }
    node(loss).grad.data[0] = 1.0;

    for (std::int64_t i = loss.id; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Add: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                Node& pb = nodes_[static_cast<std::size_t>(n.b)];
                for (std::size_t j = 0; j < g.data.size(); ++j) {
                    pa.grad.data[j] += g.data[j];
                    pb.grad.data[j] += g.data[j];
                }
                break;
            }
            case Op::Sub: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                Node& pb = nodes_[static_cast<std::size_t>(n.b)];
                for (std::size_t j = 0; j < g.data.size(); ++j) {
                    pa.grad.data[j] += g.data[j];
                    pb.grad.data[j] -= g.data[j];
                }
                break;
            }
            case Op::Mul: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                Node& pb = nodes_[static_cast<std::size_t>(n.b)];
                for (std::size_t j = 0; j < g.data.size(); ++j) {
                    pa.grad.data[j] += g.data[j] * pb.value.data[j];
                    pb.grad.data[j] += g.data[j] * pa.value.data[j];
                }
                break;
            }
            case Op::Scale: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                for (std::size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += g.data[j] * n.k;
                break;
            }
            case Op::Sigmoid: {
                // saved forward value s; derivative s(1-s)
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                for (std::size_t j = 0; j < g.data.size(); ++j) {
                    const double s = n.value.data[j];
                    pa.grad.data[j] += g.data[j] * s * (1.0 - s);
                }
                break;
            }
            case Op::Tanh: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                for (std::size_t j = 0; j < g.data.size(); ++j) {
                    const double t = n.value.data[j];
                    pa.grad.data[j] += g.data[j] * (1.0 - t * t);
                }
                break;
            }
            case Op::MatMul: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                Node& pb = nodes_[static_cast<std::size_t>(n.b)];
                const Tensor& A = pa.value;
                const Tensor& B = pb.value;
                const std::int64_t m = A.rows(), k = A.cols(), ncols = B.cols();
                // dA = g . B^T, dB = A^T . g
                for (std::int64_t r = 0; r < m; ++r) {
                    for (std::int64_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (std::int64_t c = 0; c < ncols; ++c) {
                            acc += g.data[static_cast<std::size_t>(r * ncols + c)] *
                                   B.data[static_cast<std::size_t>(p * ncols + c)];
                        }
                        pa.grad.at(r, p) += acc;
                    }
                }
                for (std::int64_t p = 0; p < k; ++p) {
                    for (std::int64_t c = 0; c < ncols; ++c) {
                        double acc = 0.0;
                        for (std::int64_t r = 0; r < m; ++r) {
                            acc += A.at(r, p) * g.data[static_cast<std::size_t>(r * ncols + c)];
                        }
                        pb.grad.data[static_cast<std::size_t>(p * ncols + c)] += acc;
                    }
                }
                break;
            }
            case Op::Sum: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                for (auto& pg : pa.grad.data) pg += g.data[0];
                break;
            }
            case Op::Mean: {
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                const double w = g.data[0] / static_cast<double>(pa.grad.data.size());
                for (auto& pg : pa.grad.data) pg += w;
                break;
            }
            case Op::CrossEntropy: {
                // d loss / d z = softmax(z) - onehot(label)
                Node& pa = nodes_[static_cast<std::size_t>(n.a)];
                for (std::size_t j = 0; j < pa.grad.data.size(); ++j) {
                    double d = n.saved.data[j];
                    if (static_cast<std::int64_t>(j) == n.label) d -= 1.0;
                    pa.grad.data[j] += g.data[0] * d;
                }
                break;
            }
        }
    }
}

}  // namespace odernn
