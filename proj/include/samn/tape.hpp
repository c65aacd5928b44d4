// Tape-based reverse-mode differentiation over dense matrices.
//
// A Tape records every operation as a node holding its value and a gradient
// buffer of the same shape. Nodes are appended in evaluation order, so the
// creation order is a topological order of the (acyclic) graph; backward()
// walks it once in reverse and accumulates gradients additively across
// fan-out. A tape is confined to one thread for its lifetime.
#pragma once

#include <cstddef>
#include <vector>

#include "samn/matrix.hpp"

namespace samn {

enum class Op {
    Leaf,
    MatMul,
    Transpose,
    Add,
    Sub,
    AddRowVec,
    Scale,
    AddScalar,
    Hadamard,
    Mask,
    Sigmoid,
    Tanh,
    Relu,
    RowSoftmax,
    RowMean,
    GatherRows,
    ConcatRows,
    ConcatCols,
    CosineRows,
    LogClip,
    SumAll,
};

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

class Tape {
public:
    // Leaf holding an externally supplied value. Parameters and constants are
    // both leaves; the caller decides whose gradients it reads after backward.
    Var leaf(Matrix value);

    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    // m (r x c) + v (1 x c) broadcast over rows.
    Var add_row_vector(Var m, Var v);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var hadamard(Var a, Var b);
    // Elementwise product with a constant matrix (e.g. a one-hot label mask).
    Var mask(Var a, Matrix constant);
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var relu(Var a);
    // Numerically stable per-row softmax (max subtraction); rows sum to 1.
    Var row_softmax(Var a);
    // (r x c) -> (1 x c) arithmetic mean over rows.
    Var row_mean(Var a);
    Var gather_rows(Var a, std::vector<std::size_t> rows);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    // m (r x d), v (1 x d) -> (r x 1): cosine of each row of m with v,
    // denominators guarded by max(norm, eps).
    Var cosine_rows(Var m, Var v, double eps = 1e-12);
    // cosine of two 1 x d row vectors -> 1 x 1.
    Var cosine(Var u, Var v, double eps = 1e-12);
    // log(clamp(x, 1e-12, 1)); gradient is zero where the clamp is active.
    Var log_clip(Var a);
    // Sum of all entries -> 1 x 1.
    Var sum(Var a);

    // Reverse sweep from a scalar (1 x 1) root. Zeroes all gradients, seeds
    // the root with 1 and visits every node once in reverse creation order.
    void backward(Var root);

    const Matrix& value(Var v) const { return nodes_[check(v)].value; }
    const Matrix& grad(Var v) const { return nodes_[check(v)].grad; }

    std::size_t size() const { return nodes_.size(); }
    std::size_t count(Op op) const;

private:
    struct Node {
        Op op;
        std::vector<int> inputs;
        Matrix value;
        Matrix grad;
        Matrix aux;                        // op-specific constant (Mask)
        std::vector<std::size_t> indices;  // GatherRows
        double scalar = 0.0;               // Scale/AddScalar/CosineRows eps
    };

    int check(Var v) const;
    Var push(Node node, const char* where);
    void backprop(const Node& node);

    std::vector<Node> nodes_;
};

}  // namespace samn
