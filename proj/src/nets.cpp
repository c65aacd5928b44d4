#include "samn/nets.hpp"

#include <cmath>

#include "samn/rng.hpp"

namespace samn {

namespace {

Matrix glorot_matrix(std::size_t fan_in, std::size_t fan_out, rng::Engine& eng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (double& v : m.data()) v = rng::uniform(eng, -limit, limit);
    return m;
}

Matrix conditioned_layer(std::size_t fan_in, std::size_t fan_out,
                         rng::Engine& eng) {
    if (fan_in != fan_out) return glorot_matrix(fan_in, fan_out, eng);
    Matrix m(fan_in, fan_out);
    for (std::size_t i = 0; i < fan_in; ++i)
        for (std::size_t j = 0; j < fan_out; ++j)
            m(i, j) = (i == j ? 0.7 : 0.0) + rng::uniform(eng, -0.05, 0.05);
    return m;
}

Var apply_activation(Tape& tape, Activation act, Var x) {
    switch (act) {
        case Activation::Relu: return tape.relu(x);
        case Activation::Sigmoid: return tape.sigmoid(x);
        case Activation::Tanh: return tape.tanh(x);
    }
    return tape.relu(x);
}

Matrix apply_activation_plain(Activation act, const Matrix& x) {
    switch (act) {
        case Activation::Relu: return relu(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Tanh: return tanh_elem(x);
    }
    return relu(x);
}

Var hidden_stack(Tape& tape, const std::vector<Var>& weights,
                 const std::vector<Var>& biases, Activation act, Var x) {
    for (std::size_t j = 0; j < weights.size(); ++j) {
        x = apply_activation(
            tape, act, tape.add_row_vector(tape.matmul(x, weights[j]), biases[j]));
    }
    return x;
}

Matrix hidden_stack_plain(const std::vector<Matrix>& weights,
                          const std::vector<Matrix>& biases, Activation act,
                          Matrix x) {
    for (std::size_t j = 0; j < weights.size(); ++j) {
        x = apply_activation_plain(act, add_row_vector(matmul(x, weights[j]),
                                                       biases[j]));
    }
    return x;
}

}  // namespace

CenetModel CenetModel::init(std::size_t input_dim, std::size_t width,
                            int hidden_layers, int classes,
                            unsigned long seed) {
    if (hidden_layers < 1) throw ConfigError("cenet needs at least one layer");
    if (classes < 2) throw ConfigError("cenet needs at least two classes");
    rng::Engine eng(rng::derive_seed(seed, 0xce9e7ULL));
    CenetModel m;
    for (int j = 0; j < hidden_layers; ++j) {
        m.weights.push_back(
            conditioned_layer(j == 0 ? input_dim : width, width, eng));
        m.biases.emplace_back(1, width);
    }
    m.w_out = glorot_matrix(width, static_cast<std::size_t>(classes), eng);
    m.b_out = Matrix(1, static_cast<std::size_t>(classes));
    return m;
}

std::vector<Matrix*> CenetModel::trainable() {
    std::vector<Matrix*> out;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        out.push_back(&weights[j]);
        out.push_back(&biases[j]);
    }
    out.push_back(&w_out);
    out.push_back(&b_out);
    return out;
}

CenetVars inject_params(Tape& tape, const CenetModel& model) {
    CenetVars v;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        v.weights.push_back(tape.leaf(model.weights[j]));
        v.biases.push_back(tape.leaf(model.biases[j]));
    }
    v.w_out = tape.leaf(model.w_out);
    v.b_out = tape.leaf(model.b_out);
    return v;
}

std::vector<const Matrix*> trainable_grads(const Tape& tape,
                                           const CenetVars& vars) {
    std::vector<const Matrix*> out;
    for (std::size_t j = 0; j < vars.weights.size(); ++j) {
        out.push_back(&tape.grad(vars.weights[j]));
        out.push_back(&tape.grad(vars.biases[j]));
    }
    out.push_back(&tape.grad(vars.w_out));
    out.push_back(&tape.grad(vars.b_out));
    return out;
}

Var cenet_loss(Tape& tape, const CenetVars& vars, Activation activation,
               const Matrix& features, const std::vector<int>& labels,
               int classes) {
    if (features.rows() != labels.size()) {
        throw DimensionError("cenet_loss features/labels mismatch");
    }
    const Var h = hidden_stack(tape, vars.weights, vars.biases, activation,
                               tape.leaf(features));
    const Var logits =
        tape.add_row_vector(tape.matmul(h, vars.w_out), vars.b_out);
    const Var probs = tape.row_softmax(logits);
    Matrix one_hot(features.rows(), static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            throw DataError("cenet label out of range: " +
                            std::to_string(labels[i]));
        }
        one_hot(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    const Var picked = tape.mask(tape.log_clip(probs), std::move(one_hot));
    return tape.scale(tape.sum(picked),
                      -1.0 / static_cast<double>(features.rows()));
}

Matrix cenet_logits(const CenetModel& model, const Matrix& features) {
    const Matrix h = hidden_stack_plain(model.weights, model.biases,
                                        model.activation, features);
    return add_row_vector(matmul(h, model.w_out), model.b_out);
}

std::vector<int> cenet_predict(const CenetModel& model, const Matrix& features) {
    const Matrix logits = cenet_logits(model, features);
    std::vector<int> out(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        int best = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c) {
            if (logits(i, c) > logits(i, static_cast<std::size_t>(best))) {
                best = static_cast<int>(c);
            }
        }
        out[i] = best;
    }
    return out;
}

DnmsvmModel DnmsvmModel::init(std::size_t input_dim, std::size_t width,
                              int hidden_layers, unsigned long seed) {
    if (hidden_layers < 0) throw ConfigError("negative layer count");
    rng::Engine eng(rng::derive_seed(seed, 0xd35f1ULL));
    DnmsvmModel m;
    for (int j = 0; j < hidden_layers; ++j) {
        m.weights.push_back(
            conditioned_layer(j == 0 ? input_dim : width, width, eng));
        m.biases.emplace_back(1, width);
    }
    const std::size_t head_in = hidden_layers == 0 ? input_dim : width;
    m.w_head = glorot_matrix(head_in, 1, eng);
    m.b_head = Matrix(1, 1);
    return m;
}

std::vector<Matrix*> DnmsvmModel::trainable() {
    std::vector<Matrix*> out;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        out.push_back(&weights[j]);
        out.push_back(&biases[j]);
    }
    out.push_back(&w_head);
    out.push_back(&b_head);
    return out;
}

DnmsvmVars inject_params(Tape& tape, const DnmsvmModel& model) {
    DnmsvmVars v;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        v.weights.push_back(tape.leaf(model.weights[j]));
        v.biases.push_back(tape.leaf(model.biases[j]));
    }
    v.w_head = tape.leaf(model.w_head);
    v.b_head = tape.leaf(model.b_head);
    return v;
}

std::vector<const Matrix*> trainable_grads(const Tape& tape,
                                           const DnmsvmVars& vars) {
    std::vector<const Matrix*> out;
    for (std::size_t j = 0; j < vars.weights.size(); ++j) {
        out.push_back(&tape.grad(vars.weights[j]));
        out.push_back(&tape.grad(vars.biases[j]));
    }
    out.push_back(&tape.grad(vars.w_head));
    out.push_back(&tape.grad(vars.b_head));
    return out;
}

Var dnmsvm_loss(Tape& tape, const DnmsvmVars& vars, Activation activation,
                const Matrix& features, const std::vector<double>& y,
                double penalty) {
    if (features.rows() != y.size()) {
        throw DimensionError("dnmsvm_loss features/labels mismatch");
    }
    if (penalty <= 0.0) throw ConfigError("dnmsvm penalty must be positive");
    for (double v : y) {
        if (v != 1.0 && v != -1.0) {
            throw DataError("dnmsvm labels must be +1 or -1");
        }
    }
    const Var phi = hidden_stack(tape, vars.weights, vars.biases, activation,
                                 tape.leaf(features));
    const Var f = tape.add_row_vector(tape.matmul(phi, vars.w_head), vars.b_head);
    Matrix y_col(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i) y_col(i, 0) = y[i];
    // max(1 - y f, 0)^2
    const Var margin = tape.add_scalar(tape.scale(tape.mask(f, y_col), -1.0), 1.0);
    const Var hinge = tape.relu(margin);
    const Var hinge_sq = tape.hadamard(hinge, hinge);
    const Var reg = tape.scale(tape.sum(tape.hadamard(vars.w_head, vars.w_head)),
                               0.5);
    return tape.add(reg, tape.scale(tape.sum(hinge_sq), penalty));
}

Matrix dnmsvm_scores(const DnmsvmModel& model, const Matrix& features) {
    const Matrix phi = hidden_stack_plain(model.weights, model.biases,
                                          model.activation, features);
    return add_row_vector(matmul(phi, model.w_head), model.b_head);
}

std::vector<double> dnmsvm_predict(const DnmsvmModel& model,
                                   const Matrix& features) {
    const Matrix scores = dnmsvm_scores(model, features);
    std::vector<double> out(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        out[i] = scores(i, 0) >= 0.0 ? 1.0 : -1.0;
    }
    return out;
}

}  // namespace samn
