// Kernel SVM trained by sequential minimal optimization (maximal violating
// pair selection, full kernel cache) plus five-fold cross-validated grid
// search over (gamma, C). The summed decision form Sum_i y_i a*_i k(x_i, x) + b
// is the fixed-coefficient sample-attention view the rest of the project
// builds on.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "samn/matrix.hpp"

namespace samn {

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    double gamma = 1.0;  // rbf only

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SvmModel {
    KernelSpec kernel;
    double c_box = 1.0;
    double bias = 0.0;
    Matrix support_vectors;         // rows with alpha > 1e-8
    std::vector<double> alpha;      // dual coefficients of the stored rows
    std::vector<double> sv_labels;  // +1 / -1
};

struct SmoResult {
    SvmModel model;
    std::vector<double> alpha;  // full alpha over the training set
    double dual_objective = 0.0;  // maximization form: e'a - 1/2 a'Qa
    long iterations = 0;
};

// y must hold +1/-1 with both classes present; tol is the maximal-violating-
// pair gap at which optimization stops (default 1e-3).
SmoResult smo_train(const Matrix& features, const std::vector<double>& y,
                    KernelSpec kernel, double c_box, double tol = 1e-3,
                    long max_iterations = 10'000'000);

double svm_decision(const SvmModel& model, std::span<const double> x);
// sign(score) with sign(0) = +1.
double svm_predict_label(const SvmModel& model, std::span<const double> x);

// Largest KKT residual of a solution over its full training set:
// alpha=0 rows want y f >= 1, free rows want y f = 1, bound rows want y f <= 1.
double kkt_max_violation(const SvmModel& model, const Matrix& features,
                         const std::vector<double>& y,
                         const std::vector<double>& alpha_full);

struct GridSearchResult {
    double gamma = 1.0;
    double c_box = 1.0;
    double cv_accuracy = 0.0;
    int folds_used = 0;
};

// Paper protocol grids: gamma in 2^{-15},2^{-13},...,2^3 and C in
// 2^{-5},...,2^{15}.
std::vector<double> default_gamma_grid();
std::vector<double> default_c_grid();

// Mean fold accuracy per cell; ties break to smaller C then smaller gamma.
// Folds are stratified and seeded; a rarest class smaller than `folds`
// reduces the fold count with a warning.
GridSearchResult grid_search_cv(const Matrix& features,
                                const std::vector<double>& y,
                                const std::vector<double>& gamma_grid,
                                const std::vector<double>& c_grid, int folds,
                                unsigned long seed,
                                KernelKind kind = KernelKind::Rbf,
                                double tol = 1e-3);

}  // namespace samn
