// Shared test utilities: seeded random matrices and the central
// finite-difference gradient oracle used across the unit and acceptance
// suites. The oracle evaluates the graph value only and never reads the
// tape's analytic gradients, so it stays independent of the backward pass
// it checks.
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "samn/dataio.hpp"
#include "samn/matrix.hpp"
#include "samn/rng.hpp"
#include "samn/tape.hpp"

namespace testsupport {

inline samn::Matrix random_matrix(std::size_t rows, std::size_t cols,
                                  samn::rng::Engine& eng, double lo = -1.0,
                                  double hi = 1.0) {
    samn::Matrix m(rows, cols);
    for (double& v : m.data()) v = samn::rng::uniform(eng, lo, hi);
    return m;
}

// Builds a scalar graph from leaves; returns the root variable.
using GraphBuilder =
    std::function<samn::Var(samn::Tape&, const std::vector<samn::Var>&)>;

// Max relative error between analytic gradients and central finite
// differences over every element of every input. rel = |a-n| / max(|a|,|n|,1e-6).
inline double gradcheck(std::vector<samn::Matrix> inputs, const GraphBuilder& build,
                        double h = 1e-5) {
    auto eval = [&](const std::vector<samn::Matrix>& params) {
        samn::Tape tape;
        std::vector<samn::Var> leaves;
        leaves.reserve(params.size());
        for (const samn::Matrix& p : params) leaves.push_back(tape.leaf(p));
        const samn::Var root = build(tape, leaves);
        return tape.value(root)(0, 0);
    };

    samn::Tape tape;
    std::vector<samn::Var> leaves;
    for (const samn::Matrix& p : inputs) leaves.push_back(tape.leaf(p));
    const samn::Var root = build(tape, leaves);
    tape.backward(root);

    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const samn::Matrix& analytic = tape.grad(leaves[k]);
        for (std::size_t i = 0; i < inputs[k].size(); ++i) {
            std::vector<samn::Matrix> shifted = inputs;
            shifted[k].data()[i] += h;
            const double fp = eval(shifted);
            shifted[k].data()[i] -= 2.0 * h;
            const double fm = eval(shifted);
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic.data()[i];
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-6});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

// Gaussian blobs for synthetic end-to-end experiments.
inline samn::Dataset make_blobs(
    const std::vector<std::pair<double, double>>& centers,
    std::size_t per_class, double sigma, unsigned long seed) {
    samn::rng::Engine eng(samn::rng::derive_seed(seed, 0xb10b5ULL));
    samn::Dataset ds;
    ds.name = "blobs";
    ds.features = samn::Matrix(per_class * centers.size(), 2);
    for (std::size_t c = 0; c < centers.size(); ++c) {
        ds.label_names.push_back("blob" + std::to_string(c));
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = c * per_class + i;
            ds.features(r, 0) = centers[c].first + sigma * samn::rng::normal(eng);
            ds.features(r, 1) = centers[c].second + sigma * samn::rng::normal(eng);
            ds.labels.push_back(static_cast<int>(c));
        }
    }
    return ds;
}

struct OpCheck {
    std::string name;
    double max_rel_err = 0.0;
};

// Finite-difference check of every differentiable tape operation on
// `seeds` random shapes/seeds each. Used verbatim by acceptance criterion 1.
inline std::vector<OpCheck> fd_check_core_ops(int seeds = 10) {
    using samn::Matrix;
    using samn::Tape;
    using samn::Var;
    std::vector<OpCheck> out;

    auto run = [&](const std::string& name, auto&& make_case) {
        OpCheck check{name, 0.0};
        for (int s = 1; s <= seeds; ++s) {
            samn::rng::Engine eng(samn::rng::derive_seed(2025, 1000 * s));
            auto [inputs, builder] = make_case(eng);
            check.max_rel_err =
                std::max(check.max_rel_err, gradcheck(std::move(inputs), builder));
        }
        out.push_back(check);
    };

    auto dims = [](samn::rng::Engine& eng) {
        return std::pair<std::size_t, std::size_t>{1 + samn::rng::below(eng, 4),
                                                   1 + samn::rng::below(eng, 4)};
    };

    run("matmul", [&](samn::rng::Engine& eng) {
        auto [r, k] = dims(eng);
        auto [c, _] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, k, eng), random_matrix(k, c, eng)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.matmul(l[0], l[1]));
        };
        return std::pair(in, b);
    });
    run("transpose", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng), random_matrix(c, r, eng)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.hadamard(t.transpose(l[0]), l[1]));
        };
        return std::pair(in, b);
    });
    run("add/sub/scale/add_scalar", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng), random_matrix(r, c, eng)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            Var x = t.add_scalar(t.scale(t.sub(t.add(l[0], l[1]), l[1]), 1.7), 0.3);
            return t.sum(t.hadamard(x, l[1]));
        };
        return std::pair(in, b);
    });
    run("add_row_vector", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng), random_matrix(1, c, eng)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.tanh(t.add_row_vector(l[0], l[1])));
        };
        return std::pair(in, b);
    });
    run("hadamard/mask", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        Matrix weights = random_matrix(r, c, eng);
        std::vector<Matrix> in{random_matrix(r, c, eng), random_matrix(r, c, eng)};
        GraphBuilder b = [weights](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.mask(t.hadamard(l[0], l[1]), weights));
        };
        return std::pair(in, b);
    });
    run("sigmoid", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng, -2.0, 2.0)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.sigmoid(l[0]));
        };
        return std::pair(in, b);
    });
    run("tanh", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng, -2.0, 2.0)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.tanh(l[0]));
        };
        return std::pair(in, b);
    });
    run("relu", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng, -2.0, 2.0)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.relu(l[0]));
        };
        return std::pair(in, b);
    });
    run("row_softmax", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        Matrix probe = random_matrix(r, c, eng);
        std::vector<Matrix> in{random_matrix(r, c, eng, -2.0, 2.0)};
        GraphBuilder b = [probe](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.mask(t.row_softmax(l[0]), probe));
        };
        return std::pair(in, b);
    });
    run("row_mean", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        Matrix probe = random_matrix(1, c, eng);
        std::vector<Matrix> in{random_matrix(r, c, eng)};
        GraphBuilder b = [probe](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.mask(t.row_mean(l[0]), probe));
        };
        return std::pair(in, b);
    });
    run("gather_rows", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < r + 1; ++i)
            idx.push_back(samn::rng::below(eng, r));
        std::vector<Matrix> in{random_matrix(r, c, eng)};
        GraphBuilder b = [idx](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.sigmoid(t.gather_rows(l[0], idx)));
        };
        return std::pair(in, b);
    });
    run("concat_rows/concat_cols", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng), random_matrix(r, c, eng)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            Var rows = t.concat_rows({l[0], l[1]});
            Var cols = t.concat_cols({l[0], l[1]});
            return t.add(t.sum(t.tanh(rows)), t.sum(t.sigmoid(cols)));
        };
        return std::pair(in, b);
    });
    run("cosine_rows", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng, 0.2, 1.0),
                               random_matrix(1, c, eng, 0.2, 1.0)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.cosine_rows(l[0], l[1]));
        };
        return std::pair(in, b);
    });
    run("log_clip", [&](samn::rng::Engine& eng) {
        auto [r, c] = dims(eng);
        std::vector<Matrix> in{random_matrix(r, c, eng, 0.05, 0.95)};
        GraphBuilder b = [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.log_clip(l[0]));
        };
        return std::pair(in, b);
    });

    return out;
}

}  // namespace testsupport
