// Network baselines: CENet (fully connected layers + softmax cross-entropy)
// and DNMSVM (deep extractor feeding a squared-hinge SVM head).
#pragma once

#include <vector>

#include "samn/matrix.hpp"
#include "samn/model.hpp"
#include "samn/tape.hpp"

namespace samn {

struct CenetModel {
    std::vector<Matrix> weights, biases;  // hidden layers, width d
    Matrix w_out, b_out;                  // d x C head, linear before softmax
    Activation activation = Activation::Relu;

    // Square width-n layers start near a scaled identity plus noise, the
    // rest Glorot-uniform; mirrors the SAMN extractor initialization.
    static CenetModel init(std::size_t input_dim, std::size_t width,
                           int hidden_layers, int classes, unsigned long seed);
    std::vector<Matrix*> trainable();
};

struct CenetVars {
    std::vector<Var> weights, biases;
    Var w_out, b_out;
};

CenetVars inject_params(Tape& tape, const CenetModel& model);
std::vector<const Matrix*> trainable_grads(const Tape& tape, const CenetVars& vars);

// Mean negative log softmax probability of the true class.
Var cenet_loss(Tape& tape, const CenetVars& vars, Activation activation,
               const Matrix& features, const std::vector<int>& labels,
               int classes);
Matrix cenet_logits(const CenetModel& model, const Matrix& features);
std::vector<int> cenet_predict(const CenetModel& model, const Matrix& features);

struct DnmsvmModel {
    std::vector<Matrix> weights, biases;  // extractor; may be empty (identity)
    Matrix w_head;                        // d x 1
    Matrix b_head;                        // 1 x 1
    Activation activation = Activation::Relu;
    double penalty = 1.0;  // C weight of the squared hinge term

    static DnmsvmModel init(std::size_t input_dim, std::size_t width,
                            int hidden_layers, unsigned long seed);
    std::vector<Matrix*> trainable();
};

struct DnmsvmVars {
    std::vector<Var> weights, biases;
    Var w_head, b_head;
};

DnmsvmVars inject_params(Tape& tape, const DnmsvmModel& model);
std::vector<const Matrix*> trainable_grads(const Tape& tape,
                                           const DnmsvmVars& vars);

// 1/2 ||W_head||^2 + penalty * Sum_i max(1 - y_i f(x_i), 0)^2 over the batch,
// with f = extractor(x) W_head + b_head and y in {+1,-1}.
Var dnmsvm_loss(Tape& tape, const DnmsvmVars& vars, Activation activation,
                const Matrix& features, const std::vector<double>& y,
                double penalty);
Matrix dnmsvm_scores(const DnmsvmModel& model, const Matrix& features);
// +1/-1 per row; sign(0) = +1.
std::vector<double> dnmsvm_predict(const DnmsvmModel& model,
                                   const Matrix& features);

}  // namespace samn
