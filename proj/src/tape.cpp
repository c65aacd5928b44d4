#include "samn/tape.hpp"

#include <cmath>
#include <utility>

namespace samn {

int Tape::check(Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size()) {
        throw StateError("variable does not belong to this tape");
    }
    return v.id;
}

Var Tape::push(Node node, const char* where) {
    ensure_finite(node.value, where);
    node.grad = Matrix(node.value.rows(), node.value.cols());
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Matrix value) {
    return push(Node{Op::Leaf, {}, std::move(value)}, "leaf");
}

Var Tape::matmul(Var a, Var b) {
    Node n{Op::MatMul, {check(a), check(b)}, samn::matmul(value(a), value(b))};
    return push(std::move(n), "matmul");
}

Var Tape::transpose(Var a) {
    return push(Node{Op::Transpose, {check(a)}, samn::transpose(value(a))},
                "transpose");
}

Var Tape::add(Var a, Var b) {
    return push(Node{Op::Add, {check(a), check(b)}, samn::add(value(a), value(b))},
                "add");
}

Var Tape::sub(Var a, Var b) {
    return push(Node{Op::Sub, {check(a), check(b)}, samn::sub(value(a), value(b))},
                "sub");
}

Var Tape::add_row_vector(Var m, Var v) {
    Node n{Op::AddRowVec, {check(m), check(v)},
           samn::add_row_vector(value(m), value(v))};
    return push(std::move(n), "add_row_vector");
}

Var Tape::scale(Var a, double s) {
    Node n{Op::Scale, {check(a)}, samn::scale(value(a), s)};
    n.scalar = s;
    return push(std::move(n), "scale");
}

Var Tape::add_scalar(Var a, double s) {
    Node n{Op::AddScalar, {check(a)}, value(a)};
    for (double& v : n.value.data()) v += s;
    n.scalar = s;
    return push(std::move(n), "add_scalar");
}

Var Tape::hadamard(Var a, Var b) {
    Node n{Op::Hadamard, {check(a), check(b)}, samn::hadamard(value(a), value(b))};
    return push(std::move(n), "hadamard");
}

Var Tape::mask(Var a, Matrix constant) {
    Node n{Op::Mask, {check(a)}, samn::hadamard(value(a), constant)};
    n.aux = std::move(constant);
    return push(std::move(n), "mask");
}

Var Tape::sigmoid(Var a) {
    return push(Node{Op::Sigmoid, {check(a)}, samn::sigmoid(value(a))}, "sigmoid");
}

Var Tape::tanh(Var a) {
    return push(Node{Op::Tanh, {check(a)}, samn::tanh_elem(value(a))}, "tanh");
}

Var Tape::relu(Var a) {
    return push(Node{Op::Relu, {check(a)}, samn::relu(value(a))}, "relu");
}

Var Tape::row_softmax(Var a) {
    return push(Node{Op::RowSoftmax, {check(a)}, samn::row_softmax(value(a))},
                "row_softmax");
}

Var Tape::row_mean(Var a) {
    if (value(a).rows() == 0) throw DimensionError("row_mean over zero rows");
    return push(Node{Op::RowMean, {check(a)}, samn::row_mean(value(a))}, "row_mean");
}

Var Tape::gather_rows(Var a, std::vector<std::size_t> rows) {
    Node n{Op::GatherRows, {check(a)}, samn::gather_rows(value(a), rows)};
    n.indices = std::move(rows);
    return push(std::move(n), "gather_rows");
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw DimensionError("concat_rows of nothing");
    std::size_t rows = 0;
    const std::size_t cols = value(parts.front()).cols();
    Node n{Op::ConcatRows, {}, Matrix()};
    for (Var p : parts) {
        const Matrix& m = value(p);
        if (m.cols() != cols) {
            throw DimensionError("concat_rows column mismatch: " + m.shape_str());
        }
        rows += m.rows();
        n.inputs.push_back(check(p));
    }
    Matrix out(rows, cols);
    std::size_t r = 0;
    for (Var p : parts) {
        const Matrix& m = value(p);
        for (std::size_t i = 0; i < m.rows(); ++i, ++r)
            for (std::size_t j = 0; j < cols; ++j) out(r, j) = m(i, j);
    }
    n.value = std::move(out);
    return push(std::move(n), "concat_rows");
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols of nothing");
    std::size_t cols = 0;
    const std::size_t rows = value(parts.front()).rows();
    Node n{Op::ConcatCols, {}, Matrix()};
    for (Var p : parts) {
        const Matrix& m = value(p);
        if (m.rows() != rows) {
            throw DimensionError("concat_cols row mismatch: " + m.shape_str());
        }
        cols += m.cols();
        n.inputs.push_back(check(p));
    }
    Matrix out(rows, cols);
    std::size_t c = 0;
    for (Var p : parts) {
        const Matrix& m = value(p);
        for (std::size_t j = 0; j < m.cols(); ++j, ++c)
            for (std::size_t i = 0; i < rows; ++i) out(i, c) = m(i, j);
    }
    n.value = std::move(out);
    return push(std::move(n), "concat_cols");
}

Var Tape::cosine_rows(Var m, Var v, double eps) {
    const Matrix& mm = value(m);
    const Matrix& vv = value(v);
    if (vv.rows() != 1 || vv.cols() != mm.cols()) {
        throw DimensionError("cosine_rows shape mismatch: " + mm.shape_str() +
                             " vs " + vv.shape_str());
    }
    Matrix out(mm.rows(), 1);
    for (std::size_t i = 0; i < mm.rows(); ++i) {
        out(i, 0) = samn::cosine(mm.row(i), vv.row(0), eps);
    }
    Node n{Op::CosineRows, {check(m), check(v)}, std::move(out)};
    n.scalar = eps;
    return push(std::move(n), "cosine_rows");
}

Var Tape::cosine(Var u, Var v, double eps) {
    if (value(u).rows() != 1) {
        throw DimensionError("cosine expects 1-row vectors, got " +
                             value(u).shape_str());
    }
    return cosine_rows(u, v, eps);
}

Var Tape::log_clip(Var a) {
    Node n{Op::LogClip, {check(a)}, value(a)};
    for (double& v : n.value.data()) {
        double x = v;
        if (x < 1e-12) x = 1e-12;
        if (x > 1.0) x = 1.0;
        v = std::log(x);
    }
    return push(std::move(n), "log_clip");
}

Var Tape::sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = samn::sum_all(value(a));
    return push(Node{Op::SumAll, {check(a)}, std::move(out)}, "sum");
}

std::size_t Tape::count(Op op) const {
    std::size_t n = 0;
    for (const Node& node : nodes_) n += node.op == op ? 1 : 0;
    return n;
}

void Tape::backward(Var root) {
    const int r = check(root);
    if (nodes_[r].value.rows() != 1 || nodes_[r].value.cols() != 1) {
        throw DimensionError("backward root must be 1x1, got " +
                             nodes_[r].value.shape_str());
    }
    for (Node& n : nodes_) {
        for (double& g : n.grad.data()) g = 0.0;
    }
    nodes_[r].grad(0, 0) = 1.0;
    for (int i = r; i >= 0; --i) backprop(nodes_[i]);
}

void Tape::backprop(const Node& node) {
    const Matrix& dy = node.grad;
    switch (node.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            Node& a = nodes_[node.inputs[0]];
            Node& b = nodes_[node.inputs[1]];
            // dA += dY B^T ; dB += A^T dY
            const Matrix da = samn::matmul(dy, samn::transpose(b.value));
            const Matrix db = samn::matmul(samn::transpose(a.value), dy);
            for (std::size_t i = 0; i < da.size(); ++i) a.grad.data()[i] += da.data()[i];
            for (std::size_t i = 0; i < db.size(); ++i) b.grad.data()[i] += db.data()[i];
            break;
        }
        case Op::Transpose: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.rows(); ++i)
                for (std::size_t j = 0; j < dy.cols(); ++j) a.grad(j, i) += dy(i, j);
            break;
        }
        case Op::Add: {
            Node& a = nodes_[node.inputs[0]];
            Node& b = nodes_[node.inputs[1]];
            for (std::size_t i = 0; i < dy.size(); ++i) {
                a.grad.data()[i] += dy.data()[i];
                b.grad.data()[i] += dy.data()[i];
            }
            break;
        }
        case Op::Sub: {
            Node& a = nodes_[node.inputs[0]];
            Node& b = nodes_[node.inputs[1]];
            for (std::size_t i = 0; i < dy.size(); ++i) {
                a.grad.data()[i] += dy.data()[i];
                b.grad.data()[i] -= dy.data()[i];
            }
            break;
        }
        case Op::AddRowVec: {
            Node& m = nodes_[node.inputs[0]];
            Node& v = nodes_[node.inputs[1]];
            for (std::size_t i = 0; i < dy.rows(); ++i)
                for (std::size_t j = 0; j < dy.cols(); ++j) {
                    m.grad(i, j) += dy(i, j);
                    v.grad(0, j) += dy(i, j);
                }
            break;
        }
        case Op::Scale: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.size(); ++i)
                a.grad.data()[i] += node.scalar * dy.data()[i];
            break;
        }
        case Op::AddScalar: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.size(); ++i)
                a.grad.data()[i] += dy.data()[i];
            break;
        }
        case Op::Hadamard: {
            Node& a = nodes_[node.inputs[0]];
            Node& b = nodes_[node.inputs[1]];
            for (std::size_t i = 0; i < dy.size(); ++i) {
                a.grad.data()[i] += dy.data()[i] * b.value.data()[i];
                b.grad.data()[i] += dy.data()[i] * a.value.data()[i];
            }
            break;
        }
        case Op::Mask: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.size(); ++i)
                a.grad.data()[i] += dy.data()[i] * node.aux.data()[i];
            break;
        }
        case Op::Sigmoid: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.size(); ++i) {
                const double y = node.value.data()[i];
                a.grad.data()[i] += dy.data()[i] * y * (1.0 - y);
            }
            break;
        }
        case Op::Tanh: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.size(); ++i) {
                const double y = node.value.data()[i];
                a.grad.data()[i] += dy.data()[i] * (1.0 - y * y);
            }
            break;
        }
        case Op::Relu: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.size(); ++i) {
                if (a.value.data()[i] > 0.0) a.grad.data()[i] += dy.data()[i];
            }
            break;
        }
        case Op::RowSoftmax: {
            // dx_row = y_row * (dy_row - <dy_row, y_row>)
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.rows(); ++i) {
                double inner = 0.0;
                for (std::size_t j = 0; j < dy.cols(); ++j)
                    inner += dy(i, j) * node.value(i, j);
                for (std::size_t j = 0; j < dy.cols(); ++j)
                    a.grad(i, j) += node.value(i, j) * (dy(i, j) - inner);
            }
            break;
        }
        case Op::RowMean: {
            Node& a = nodes_[node.inputs[0]];
            const double inv = 1.0 / static_cast<double>(a.value.rows());
            for (std::size_t i = 0; i < a.value.rows(); ++i)
                for (std::size_t j = 0; j < a.value.cols(); ++j)
                    a.grad(i, j) += inv * dy(0, j);
            break;
        }
        case Op::GatherRows: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < node.indices.size(); ++i)
                for (std::size_t j = 0; j < dy.cols(); ++j)
                    a.grad(node.indices[i], j) += dy(i, j);
            break;
        }
        case Op::ConcatRows: {
            std::size_t r = 0;
            for (int id : node.inputs) {
                Node& p = nodes_[id];
                for (std::size_t i = 0; i < p.value.rows(); ++i, ++r)
                    for (std::size_t j = 0; j < dy.cols(); ++j)
                        p.grad(i, j) += dy(r, j);
            }
            break;
        }
        case Op::ConcatCols: {
            std::size_t c = 0;
            for (int id : node.inputs) {
                Node& p = nodes_[id];
                for (std::size_t j = 0; j < p.value.cols(); ++j, ++c)
                    for (std::size_t i = 0; i < dy.rows(); ++i)
                        p.grad(i, j) += dy(i, c);
            }
            break;
        }
        case Op::CosineRows: {
            Node& m = nodes_[node.inputs[0]];
            Node& v = nodes_[node.inputs[1]];
            const double eps = node.scalar;
            const auto s = v.value.row(0);
            const double ns_raw = norm2(s);
            const double ns = std::max(ns_raw, eps);
            for (std::size_t i = 0; i < m.value.rows(); ++i) {
                const double dc = dy(i, 0);
                if (dc == 0.0) continue;
                const auto u = m.value.row(i);
                const double nu_raw = norm2(u);
                const double nu = std::max(nu_raw, eps);
                const double c = node.value(i, 0);
                const double inv = 1.0 / (nu * ns);
                for (std::size_t j = 0; j < u.size(); ++j) {
                    double du = s[j] * inv;
                    if (nu_raw > eps) du -= c * u[j] / (nu * nu);
                    m.grad(i, j) += dc * du;
                    double dv = u[j] * inv;
                    if (ns_raw > eps) dv -= c * s[j] / (ns * ns);
                    v.grad(0, j) += dc * dv;
                }
            }
            break;
        }
        case Op::LogClip: {
            Node& a = nodes_[node.inputs[0]];
            for (std::size_t i = 0; i < dy.size(); ++i) {
                const double x = a.value.data()[i];
                if (x >= 1e-12 && x <= 1.0) a.grad.data()[i] += dy.data()[i] / x;
            }
            break;
        }
        case Op::SumAll: {
            Node& a = nodes_[node.inputs[0]];
            const double g = dy(0, 0);
            for (double& ag : a.grad.data()) ag += g;
            break;
        }
    }
}

}  // namespace samn
