#include "samn/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "samn/dataio.hpp"

namespace samn {

double KernelSpec::operator()(std::span<const double> a,
                              std::span<const double> b) const {
    if (a.size() != b.size()) {
        throw DimensionError("kernel operand length mismatch: " +
                             std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    switch (kind) {
        case KernelKind::Linear:
            return dot(a, b);
        case KernelKind::Rbf: {
            double d2 = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                d2 += d * d;
            }
            return std::exp(-gamma * d2);
        }
    }
    return 0.0;
}

namespace {

constexpr double kTau = 1e-12;
constexpr double kSvThreshold = 1e-8;

struct Problem {
    const Matrix& x;
    const std::vector<double>& y;
    std::vector<double> kernel_cache;  // N*N
    std::size_t n;

    Problem(const Matrix& features, const std::vector<double>& labels,
            const KernelSpec& kernel)
        : x(features), y(labels), n(features.rows()) {
        kernel_cache.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double k = kernel(x.row(i), x.row(j));
                kernel_cache[i * n + j] = k;
                kernel_cache[j * n + i] = k;
            }
        }
    }
    double k(std::size_t i, std::size_t j) const { return kernel_cache[i * n + j]; }
    double q(std::size_t i, std::size_t j) const { return y[i] * y[j] * k(i, j); }
};

}  // namespace

SmoResult smo_train(const Matrix& features, const std::vector<double>& y,
                    KernelSpec kernel, double c_box, double tol,
                    long max_iterations) {
    const std::size_t n = features.rows();
    if (y.size() != n) throw DimensionError("smo_train features/labels mismatch");
    if (c_box <= 0.0) throw ConfigError("box constraint must be positive");
    if (tol <= 0.0) throw ConfigError("tolerance must be positive");
    bool has_pos = false, has_neg = false;
    for (double v : y) {
        if (v == 1.0) has_pos = true;
        else if (v == -1.0) has_neg = true;
        else throw DataError("smo_train labels must be +1 or -1, got " +
                             std::to_string(v));
    }
    if (!has_pos || !has_neg) {
        throw DataError("smo_train needs both classes present");
    }

    const Problem prob(features, y, kernel);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a at a=0

    long iterations = 0;
    while (iterations < max_iterations) {
        // maximal violating pair
        int i = -1, j = -1;
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool in_up = (y[t] > 0 && alpha[t] < c_box) ||
                               (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] > 0 && alpha[t] > 0) ||
                                (y[t] < 0 && alpha[t] < c_box);
            if (in_up && v > up_max) {
                up_max = v;
                i = static_cast<int>(t);
            }
            if (in_low && v < low_min) {
                low_min = v;
                j = static_cast<int>(t);
            }
        }
        if (i < 0 || j < 0 || up_max - low_min <= tol) break;
        ++iterations;

        const std::size_t ii = static_cast<std::size_t>(i);
        const std::size_t jj = static_cast<std::size_t>(j);
        double quad = prob.k(ii, ii) + prob.k(jj, jj) - 2.0 * prob.k(ii, jj);
        if (quad <= 0.0) quad = kTau;
        const double old_ai = alpha[ii];
        const double old_aj = alpha[jj];

        if (y[ii] != y[jj]) {
            const double delta = (-grad[ii] - grad[jj]) / quad;
            const double diff = alpha[ii] - alpha[jj];
            alpha[ii] += delta;
            alpha[jj] += delta;
            if (diff > 0.0 && alpha[jj] < 0.0) {
                alpha[jj] = 0.0;
                alpha[ii] = diff;
            } else if (diff <= 0.0 && alpha[ii] < 0.0) {
                alpha[ii] = 0.0;
                alpha[jj] = -diff;
            }
            if (diff > 0.0 && alpha[ii] > c_box) {
                alpha[ii] = c_box;
                alpha[jj] = c_box - diff;
            } else if (diff <= 0.0 && alpha[jj] > c_box) {
                alpha[jj] = c_box;
                alpha[ii] = c_box + diff;
            }
        } else {
            const double delta = (grad[ii] - grad[jj]) / quad;
            const double sum = alpha[ii] + alpha[jj];
            alpha[ii] -= delta;
            alpha[jj] += delta;
            if (sum > c_box && alpha[ii] > c_box) {
                alpha[ii] = c_box;
                alpha[jj] = sum - c_box;
            } else if (sum <= c_box && alpha[jj] < 0.0) {
                alpha[jj] = 0.0;
                alpha[ii] = sum;
            }
            if (sum > c_box && alpha[jj] > c_box) {
                alpha[jj] = c_box;
                alpha[ii] = sum - c_box;
            } else if (sum <= c_box && alpha[ii] < 0.0) {
                alpha[ii] = 0.0;
                alpha[jj] = sum;
            }
        }

        const double dai = alpha[ii] - old_ai;
        const double daj = alpha[jj] - old_aj;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += prob.q(t, ii) * dai + prob.q(t, jj) * daj;
        }
    }
    if (iterations >= max_iterations) {
        throw NumericError("smo_train failed to converge within " +
                           std::to_string(max_iterations) + " pair updates");
    }

    // rho as the mean of y*G over free vectors, else the midpoint of the
    // feasible interval; decision bias b = -rho.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c_box) {
            if (y[t] < 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free)
                                  : (upper + lower) / 2.0;

    SmoResult result;
    result.iterations = iterations;
    result.alpha = alpha;
    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (1.0 - 0.5 * (grad[t] + 1.0));
    result.dual_objective = obj;

    std::vector<std::size_t> sv_rows;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > kSvThreshold) sv_rows.push_back(t);
    }
    result.model.kernel = kernel;
    result.model.c_box = c_box;
    result.model.bias = -rho;
    result.model.support_vectors = gather_rows(features, sv_rows);
    for (std::size_t t : sv_rows) {
        result.model.alpha.push_back(alpha[t]);
        result.model.sv_labels.push_back(y[t]);
    }
    return result;
}

double svm_decision(const SvmModel& model, std::span<const double> x) {
    double score = model.bias;
    for (std::size_t i = 0; i < model.alpha.size(); ++i) {
        score += model.sv_labels[i] * model.alpha[i] *
                 model.kernel(model.support_vectors.row(i), x);
    }
    return score;
}

double svm_predict_label(const SvmModel& model, std::span<const double> x) {
    return svm_decision(model, x) >= 0.0 ? 1.0 : -1.0;
}

double kkt_max_violation(const SvmModel& model, const Matrix& features,
                         const std::vector<double>& y,
                         const std::vector<double>& alpha_full) {
    double worst = 0.0;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const double margin = y[i] * svm_decision(model, features.row(i));
        const double a = alpha_full[i];
        double violation = 0.0;
        if (a <= kSvThreshold) {
            violation = std::max(0.0, 1.0 - margin);
        } else if (a >= model.c_box - kSvThreshold) {
            violation = std::max(0.0, margin - 1.0);
        } else {
            violation = std::abs(margin - 1.0);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

std::vector<double> default_gamma_grid() {
    std::vector<double> grid;
    for (int e = -15; e <= 3; e += 2) grid.push_back(std::ldexp(1.0, e));
    return grid;
}

std::vector<double> default_c_grid() {
    std::vector<double> grid;
    for (int e = -5; e <= 15; e += 2) grid.push_back(std::ldexp(1.0, e));
    return grid;
}

GridSearchResult grid_search_cv(const Matrix& features,
                                const std::vector<double>& y,
                                const std::vector<double>& gamma_grid,
                                const std::vector<double>& c_grid, int folds,
                                unsigned long seed, KernelKind kind, double tol) {
    if (gamma_grid.empty() || c_grid.empty()) {
        throw ConfigError("grid_search_cv needs nonempty grids");
    }
    // Reuse the stratified fold machinery through a label-only dataset view.
    Dataset view;
    view.name = "gridsearch";
    view.features = Matrix(features.rows(), 0);
    view.labels.reserve(y.size());
    for (double v : y) view.labels.push_back(v > 0 ? 1 : 0);
    view.label_names = {"-1", "+1"};
    std::vector<std::size_t> all(features.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    int folds_used = 0;
    const auto fold_sets = stratified_kfold(view, all, folds, seed, &folds_used);

    GridSearchResult best;
    bool have_best = false;
    for (double c_box : c_grid) {
        for (double gamma : gamma_grid) {
            double correct = 0.0;
            for (const auto& hold : fold_sets) {
                std::vector<char> held(features.rows(), 0);
                for (std::size_t idx : hold) held[idx] = 1;
                std::vector<std::size_t> train_rows;
                std::vector<double> train_y;
                for (std::size_t i = 0; i < features.rows(); ++i) {
                    if (!held[i]) {
                        train_rows.push_back(i);
                        train_y.push_back(y[i]);
                    }
                }
                const Matrix train_x = gather_rows(features, train_rows);
                const SmoResult fit =
                    smo_train(train_x, train_y, KernelSpec{kind, gamma}, c_box, tol);
                for (std::size_t idx : hold) {
                    if (svm_predict_label(fit.model, features.row(idx)) == y[idx]) {
                        correct += 1.0;
                    }
                }
            }
            const double acc = correct / static_cast<double>(features.rows());
            const bool better =
                !have_best || acc > best.cv_accuracy ||
                (acc == best.cv_accuracy &&
                 (c_box < best.c_box ||
                  (c_box == best.c_box && gamma < best.gamma)));
            if (better) {
                best = GridSearchResult{gamma, c_box, acc, folds_used};
                have_best = true;
            }
        }
    }
    return best;
}

}  // namespace samn
