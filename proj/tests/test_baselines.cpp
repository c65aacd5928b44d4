#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "samn/adam.hpp"
#include "samn/nets.hpp"
#include "samn/rng.hpp"
#include "samn/svm.hpp"
#include "support.hpp"
#include "svm_oracle.hpp"

using namespace samn;
using testsupport::random_matrix;

namespace {

// w = Sum_i y_i a_i x_i for a linear-kernel model.
std::vector<double> primal_weights(const SvmModel& model) {
    std::vector<double> w(model.support_vectors.cols(), 0.0);
    for (std::size_t i = 0; i < model.alpha.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] += model.sv_labels[i] * model.alpha[i] *
                    model.support_vectors(i, j);
    return w;
}

}  // namespace

TEST_CASE("smo on the symmetric 2-point toy recovers x1+x2=0") {
    const Matrix x{{1, 1}, {-1, -1}};
    const std::vector<double> y{1, -1};
    const SmoResult fit = smo_train(x, y, {KernelKind::Linear, 0}, 100.0, 1e-6);

    REQUIRE(fit.model.alpha.size() == 2);
    CHECK(fit.model.alpha[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(fit.model.alpha[1] == doctest::Approx(0.25).epsilon(1e-6));
    const auto w = primal_weights(fit.model);
    CHECK(std::abs(w[0] - 0.5) <= 1e-6);
    CHECK(std::abs(w[1] - 0.5) <= 1e-6);
    CHECK(std::abs(fit.model.bias) <= 1e-6);

    // decision values from the summed (attention) form
    CHECK(svm_decision(fit.model, std::vector<double>{1, 1}) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(svm_predict_label(fit.model, std::vector<double>{1, 1}) == 1.0);
    CHECK(std::abs(svm_decision(fit.model, std::vector<double>{0, 0})) <= 1e-9);
}

TEST_CASE("duplicated separable dataset keeps the same boundary") {
    const Matrix x{{1, 1}, {-1, -1}, {1, 1}, {-1, -1}};
    const std::vector<double> y{1, -1, 1, -1};
    const SmoResult fit = smo_train(x, y, {KernelKind::Linear, 0}, 100.0, 1e-8);
    const auto w = primal_weights(fit.model);
    CHECK(std::abs(w[0] - 0.5) <= 1e-6);
    CHECK(std::abs(w[1] - 0.5) <= 1e-6);
    CHECK(std::abs(fit.model.bias) <= 1e-6);
}

TEST_CASE("kernels") {
    rng::Engine eng(3);
    const Matrix p = random_matrix(1, 5, eng);
    const KernelSpec rbf{KernelKind::Rbf, 0.7};
    CHECK(rbf(p.row(0), p.row(0)) == 1.0);
    const KernelSpec lin{KernelKind::Linear, 0};
    CHECK(lin(p.row(0), p.row(0)) == doctest::Approx(dot(p.row(0), p.row(0))));
}

TEST_CASE("smo satisfies its optimality conditions") {
    rng::Engine eng(5);
    for (int rep = 0; rep < 4; ++rep) {
        // overlapping blobs: some alphas at the box, some free
        const std::size_t n = 14;
        Matrix x(n, 2);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double cls = i % 2 == 0 ? 1.0 : -1.0;
            y[i] = cls;
            x(i, 0) = cls * 0.7 + rng::uniform(eng, -1.0, 1.0);
            x(i, 1) = cls * 0.7 + rng::uniform(eng, -1.0, 1.0);
        }
        const KernelSpec kernel = rep % 2 == 0
                                      ? KernelSpec{KernelKind::Linear, 0}
                                      : KernelSpec{KernelKind::Rbf, 0.5};
        const double c_box = rep < 2 ? 1.0 : 10.0;
        const SmoResult fit = smo_train(x, y, kernel, c_box, 1e-3);

        double balance = 0.0;
        for (std::size_t i = 0; i < n; ++i) balance += fit.alpha[i] * y[i];
        CHECK(std::abs(balance) <= 1e-6);
        for (double a : fit.alpha) {
            CHECK(a >= 0.0);
            CHECK(a <= c_box + 1e-12);
        }
        for (double a : fit.model.alpha) CHECK(a > 1e-8);  // stored SVs only
        CHECK(kkt_max_violation(fit.model, x, y, fit.alpha) <= 1e-3);
    }
}

TEST_CASE("smo rejects bad inputs") {
    const Matrix x{{1, 1}, {-1, -1}};
    CHECK_THROWS_AS(smo_train(x, {1, 2}, {KernelKind::Linear, 0}, 1.0), DataError);
    CHECK_THROWS_AS(smo_train(x, {1, 1}, {KernelKind::Linear, 0}, 1.0), DataError);
    CHECK_THROWS_AS(smo_train(x, {1, -1}, {KernelKind::Linear, 0}, 0.0),
                    ConfigError);
}

TEST_CASE("summed decision form equals the primal form for linear kernels") {
    rng::Engine eng(7);
    const std::size_t n = 20;
    Matrix x(n, 3);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double cls = i < n / 2 ? 1.0 : -1.0;
        y[i] = cls;
        for (int j = 0; j < 3; ++j) x(i, j) = cls + rng::uniform(eng, -0.8, 0.8);
    }
    const SmoResult fit = smo_train(x, y, {KernelKind::Linear, 0}, 5.0, 1e-4);
    const auto w = primal_weights(fit.model);
    for (int rep = 0; rep < 100; ++rep) {
        const Matrix probe = random_matrix(1, 3, eng, -3.0, 3.0);
        const double summed = svm_decision(fit.model, probe.row(0)) - fit.model.bias;
        const double primal = dot(std::span<const double>(w), probe.row(0));
        CHECK(std::abs(summed - primal) <= 1e-9);
    }
}

TEST_CASE("decision is invariant to support-vector storage order") {
    rng::Engine eng(9);
    const Matrix x{{2, 1}, {1, 2}, {-1, -2}, {-2, -1}};
    const std::vector<double> y{1, 1, -1, -1};
    const SmoResult fit = smo_train(x, y, {KernelKind::Rbf, 0.3}, 10.0, 1e-6);
    REQUIRE(fit.model.alpha.size() >= 2);

    SvmModel shuffled = fit.model;
    const std::size_t m = shuffled.alpha.size();
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = m - 1 - i;
    shuffled.support_vectors = gather_rows(fit.model.support_vectors, perm);
    for (std::size_t i = 0; i < m; ++i) {
        shuffled.alpha[i] = fit.model.alpha[perm[i]];
        shuffled.sv_labels[i] = fit.model.sv_labels[perm[i]];
    }
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix probe = random_matrix(1, 2, eng, -3.0, 3.0);
        CHECK(svm_decision(fit.model, probe.row(0)) ==
              doctest::Approx(svm_decision(shuffled, probe.row(0)))
                  .epsilon(1e-12));
    }
}

TEST_CASE("smo dual objective matches the QP oracle on 2D instances") {
    for (const auto& inst : testsupport::separable_instances()) {
        const KernelSpec kernel{KernelKind::Linear, 0};
        const SmoResult fit = smo_train(inst.x, inst.y, kernel, inst.c_box, 1e-4);
        const auto oracle =
            testsupport::qp_dual_oracle(inst.x, inst.y, kernel, inst.c_box);
        CHECK(std::abs(fit.dual_objective - oracle.objective) <= 1e-3);
        CHECK(kkt_max_violation(fit.model, inst.x, inst.y, fit.alpha) <= 1e-3);
    }
}

TEST_CASE("grid search") {
    rng::Engine eng(11);
    const std::size_t n = 30;
    Matrix x(n, 2);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double cls = i % 2 == 0 ? 1.0 : -1.0;
        y[i] = cls;
        x(i, 0) = 3.0 * cls + rng::uniform(eng, -1.0, 1.0);
        x(i, 1) = 3.0 * cls + rng::uniform(eng, -1.0, 1.0);
    }

    SUBCASE("single-cell grid returns that cell") {
        const GridSearchResult r = grid_search_cv(x, y, {0.5}, {2.0}, 5, 1);
        CHECK(r.gamma == 0.5);
        CHECK(r.c_box == 2.0);
        CHECK(r.folds_used == 5);
    }
    SUBCASE("deterministic given the seed") {
        const auto a = grid_search_cv(x, y, {0.1, 0.5}, {1.0, 4.0}, 5, 3);
        const auto b = grid_search_cv(x, y, {0.1, 0.5}, {1.0, 4.0}, 5, 3);
        CHECK(a.gamma == b.gamma);
        CHECK(a.c_box == b.c_box);
        CHECK(a.cv_accuracy == b.cv_accuracy);
    }
    SUBCASE("separable blobs reach CV accuracy 1.0") {
        const auto r =
            grid_search_cv(x, y, {0.125, 0.5, 2.0}, {1.0, 8.0, 64.0}, 5, 1);
        CHECK(r.cv_accuracy == 1.0);
    }
}

TEST_CASE("cenet") {
    SUBCASE("uniform outputs give loss log C") {
        CenetModel m = CenetModel::init(3, 3, 3, 4, 1);
        for (Matrix* p : m.trainable())
            for (double& v : p->data()) v = 0.0;
        rng::Engine eng(13);
        const Matrix x = random_matrix(5, 3, eng);
        Tape t;
        const Var loss = cenet_loss(t, inject_params(t, m), m.activation, x,
                                    {0, 1, 2, 3, 0}, 4);
        CHECK(t.value(loss)(0, 0) ==
              doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }
    SUBCASE("gradients match finite differences") {
        rng::Engine eng(14);
        CenetModel m = CenetModel::init(3, 3, 3, 2, 2);
        for (Matrix& b : m.biases)
            for (double& v : b.data()) v += rng::uniform(eng, -0.3, 0.3);
        const Matrix x = random_matrix(6, 3, eng);
        const std::vector<int> labels{0, 1, 0, 1, 1, 0};
        std::vector<Matrix> inits;
        for (Matrix* p : m.trainable()) inits.push_back(*p);
        const double err = testsupport::gradcheck(
            inits, [&](Tape& t, const std::vector<Var>& l) {
                CenetVars v;
                std::size_t i = 0;
                for (int j = 0; j < 3; ++j) {
                    v.weights.push_back(l[i++]);
                    v.biases.push_back(l[i++]);
                }
                v.w_out = l[i++];
                v.b_out = l[i++];
                return cenet_loss(t, v, m.activation, x, labels, 2);
            });
        CHECK(err <= 1e-4);
    }
    SUBCASE("predict picks the argmax class deterministically") {
        CenetModel m = CenetModel::init(2, 2, 3, 3, 3);
        rng::Engine eng(15);
        const Matrix x = random_matrix(4, 2, eng);
        const auto a = cenet_predict(m, x);
        const auto b = cenet_predict(m, x);
        CHECK(a == b);
        for (int label : a) CHECK((label >= 0 && label < 3));
    }
}

TEST_CASE("dnmsvm") {
    SUBCASE("satisfied margin contributes zero hinge") {
        DnmsvmModel m = DnmsvmModel::init(2, 2, 0, 4);  // identity extractor
        m.w_head = Matrix{{1.0}, {1.0}};
        m.b_head = Matrix{{0.0}};
        const Matrix x{{1.0, 1.0}};  // y f = 2
        Tape t;
        const Var loss =
            dnmsvm_loss(t, inject_params(t, m), m.activation, x, {1.0}, 10.0);
        CHECK(t.value(loss)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));  // reg only
    }
    SUBCASE("gradients match finite differences") {
        rng::Engine eng(16);
        DnmsvmModel m = DnmsvmModel::init(3, 3, 3, 5);
        for (Matrix& b : m.biases)
            for (double& v : b.data()) v += rng::uniform(eng, -0.3, 0.3);
        const Matrix x = random_matrix(6, 3, eng);
        const std::vector<double> y{1, -1, 1, -1, 1, -1};
        std::vector<Matrix> inits;
        for (Matrix* p : m.trainable()) inits.push_back(*p);
        const double err = testsupport::gradcheck(
            inits, [&](Tape& t, const std::vector<Var>& l) {
                DnmsvmVars v;
                std::size_t i = 0;
                for (int j = 0; j < 3; ++j) {
                    v.weights.push_back(l[i++]);
                    v.biases.push_back(l[i++]);
                }
                v.w_head = l[i++];
                v.b_head = l[i++];
                return dnmsvm_loss(t, v, m.activation, x, y, 2.0);
            });
        CHECK(err <= 1e-4);
    }
    SUBCASE("identity extractor converges to the smo boundary on the toy") {
        const Matrix x{{1, 1}, {-1, -1}};
        const std::vector<double> y{1, -1};
        DnmsvmModel m = DnmsvmModel::init(2, 2, 0, 6);
        m.penalty = 100.0;
        AdamState opt;
        for (int step = 0; step < 8000; ++step) {
            Tape t;
            const DnmsvmVars vars = inject_params(t, m);
            const Var loss = dnmsvm_loss(t, vars, m.activation, x, y, m.penalty);
            t.backward(loss);
            adam_step(m.trainable(), trainable_grads(t, vars), opt, 0.01);
        }
        CHECK(std::abs(m.w_head(0, 0) - 0.5) <= 1e-2);
        CHECK(std::abs(m.w_head(1, 0) - 0.5) <= 1e-2);
        CHECK(std::abs(m.b_head(0, 0)) <= 1e-2);
        CHECK(dnmsvm_predict(m, x) == std::vector<double>{1.0, -1.0});
    }
}
