#pragma once

#include <cstdint>
#include <vector>

#include "odernn/tensor.hpp"

namespace odernn {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::int64_t id = -1;

    const Tensor& value() const;
    const Tensor& grad() const;
};

/// Reverse-mode tape. Records forward tensor arithmetic; backward() sweeps
/// the node list in reverse, accumulating gradients additively. One tape per
/// thread; cleared (destroyed) after each optimizer step.
class Tape {
public:
    Var leaf(Tensor value);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double k);
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var matmul(Var a, Var b);
    Var sum(Var a);
    Var mean(Var a);
    /// -log softmax(logits)[label], max-subtracted. Scalar output.
    Var cross_entropy(Var logits, std::int64_t label);

    /// Seeds d(loss)/d(loss) = 1 and sweeps. loss must be scalar-shaped.
    void backward(Var loss);

    const Tensor& value(Var v) const;
    const Tensor& grad(Var v) const;

    std::int64_t num_nodes() const { return static_cast<std::int64_t>(nodes_.size()); }

private:
    enum class Op : std::uint8_t {
        Leaf, Add, Sub, Mul, Scale, Sigmoid, Tanh, MatMul, Sum, Mean, CrossEntropy
    };

    struct Node {
        Op op;
        Tensor value;
        Tensor grad;     // same shape as value, zeroed until backward
        std::int64_t a = -1, b = -1;
        double k = 0.0;            // Scale factor
        std::int64_t label = -1;   // CrossEntropy target
        Tensor saved;              // softmax probabilities for CrossEntropy
    };

    Var push(Node n);
    Node& node(Var v);
    const Node& node(Var v) const;
    void check_same_tape(Var v) const;

    std::vector<Node> nodes_;
};

}  // namespace odernn
