#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "samn/adam.hpp"
#include "samn/matrix.hpp"
#include "samn/rng.hpp"
#include "samn/tape.hpp"
#include "support.hpp"

using namespace samn;
using testsupport::gradcheck;
using testsupport::random_matrix;

TEST_CASE("matmul basics") {
    rng::Engine eng(7);
    const Matrix m = random_matrix(3, 5, eng);
    CHECK(matmul(Matrix::identity(3), m) == m);

    const Matrix prod = matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{1}, {1}});
    CHECK(prod(0, 0) == doctest::Approx(3.0));
    CHECK(prod(1, 0) == doctest::Approx(7.0));

    CHECK_THROWS_WITH_AS(matmul(Matrix(2, 3), Matrix(2, 3)),
                         doctest::Contains("2x3"), DimensionError);
}

TEST_CASE("row_softmax basics") {
    const Matrix uniform = row_softmax(Matrix{{0, 0, 0}});
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(uniform(0, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const Matrix hot = row_softmax(Matrix{{1000, 0}});
    CHECK(hot.all_finite());
    CHECK(hot(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hot(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

    rng::Engine eng(3);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t r = 1 + rng::below(eng, 5);
        const std::size_t c = 1 + rng::below(eng, 6);
        const Matrix p = row_softmax(random_matrix(r, c, eng, -50.0, 50.0));
        for (std::size_t i = 0; i < r; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                CHECK(p(i, j) >= 0.0);
                sum += p(i, j);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("activation analytic values") {
    CHECK(sigmoid(Matrix{{0}})(0, 0) == doctest::Approx(0.5));
    CHECK(tanh_elem(Matrix{{0}})(0, 0) == doctest::Approx(0.0));
    CHECK(relu(Matrix{{-2}})(0, 0) == 0.0);
    CHECK(relu(Matrix{{3}})(0, 0) == 3.0);

    rng::Engine eng(11);
    const Matrix x = random_matrix(4, 4, eng, -5.0, 5.0);
    const Matrix sg = sigmoid(x), th = tanh_elem(x), re = relu(x);
    for (double v : sg.data()) CHECK((v > 0.0 && v < 1.0));
    for (double v : th.data()) CHECK((v > -1.0 && v < 1.0));
    for (double v : re.data()) CHECK(v >= 0.0);

    // Extreme inputs saturate to the closed interval without overflowing.
    const Matrix wild = random_matrix(4, 4, eng, -900.0, 900.0);
    const Matrix sgw = sigmoid(wild), thw = tanh_elem(wild);
    for (double v : sgw.data()) CHECK((v >= 0.0 && v <= 1.0));
    for (double v : thw.data()) CHECK((v >= -1.0 && v <= 1.0));
}

TEST_CASE("row_mean basics") {
    const Matrix single{{1.5, -2.0, 4.0}};
    CHECK(row_mean(single) == single);
    const Matrix sym = row_mean(Matrix{{0, 2}, {2, 0}});
    CHECK(sym(0, 0) == doctest::Approx(1.0));
    CHECK(sym(0, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(row_mean(Matrix(0, 3)), DimensionError);
}

TEST_CASE("cosine basics") {
    rng::Engine eng(5);
    const Matrix v = random_matrix(1, 6, eng, 0.1, 1.0);
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(Matrix{{1, 0}}, Matrix{{0, 1}}) == 0.0);
    CHECK(cosine(Matrix{{0, 0}}, Matrix{{0, 0}}) == 0.0);

    for (int rep = 0; rep < 50; ++rep) {
        const Matrix a = random_matrix(1, 4, eng);
        const Matrix b = random_matrix(1, 4, eng);
        const double ab = cosine(a, b);
        CHECK(ab == cosine(b, a));  // bit-exact symmetry
        CHECK(ab >= -1.0 - 1e-9);
        CHECK(ab <= 1.0 + 1e-9);
    }
}

TEST_CASE("backward contract") {
    Tape tape;
    rng::Engine eng(13);

    SUBCASE("sum of a leaf gives all-ones gradient") {
        const Var a = tape.leaf(random_matrix(3, 2, eng));
        tape.backward(tape.sum(a));
        for (double g : tape.grad(a).data()) CHECK(g == 1.0);
    }
    SUBCASE("non-scalar root is rejected") {
        const Var a = tape.leaf(random_matrix(2, 2, eng));
        CHECK_THROWS_AS(tape.backward(a), DimensionError);
    }
    SUBCASE("fan-out accumulates both path gradients") {
        const Var a = tape.leaf(random_matrix(2, 2, eng));
        tape.backward(tape.sum(tape.add(a, a)));
        for (double g : tape.grad(a).data()) CHECK(g == 2.0);
    }
    SUBCASE("sum(sigmoid(xW+b)) matches finite differences") {
        std::vector<Matrix> in{random_matrix(4, 3, eng), random_matrix(3, 2, eng),
                               random_matrix(1, 2, eng)};
        const double err = gradcheck(in, [](Tape& t, const std::vector<Var>& l) {
            return t.sum(t.sigmoid(t.add_row_vector(t.matmul(l[0], l[1]), l[2])));
        });
        CHECK(err <= 1e-4);
    }
    SUBCASE("identical seeds give bit-identical gradients") {
        auto run = [] {
            Tape t;
            rng::Engine e(rng::derive_seed(42, 0));
            const Var w = t.leaf(random_matrix(3, 3, e));
            const Var x = t.leaf(random_matrix(5, 3, e));
            const Var root =
                t.sum(t.row_softmax(t.matmul(x, t.sigmoid(w))));
            t.backward(root);
            return std::pair(t.value(root), t.grad(w));
        };
        const auto [v1, g1] = run();
        const auto [v2, g2] = run();
        CHECK(v1 == v2);
        CHECK(g1 == g2);
    }
}

TEST_CASE("every differentiable op passes finite differences on 10 seeds") {
    for (const auto& check : testsupport::fd_check_core_ops(10)) {
        INFO(check.name);
        CHECK(check.max_rel_err <= 1e-4);
    }
}

TEST_CASE("adam") {
    SUBCASE("zero gradient from zero state is a fixed point") {
        Matrix p{{1.0, -2.0}};
        const Matrix before = p;
        const Matrix g(1, 2);
        AdamState st;
        adam_step({&p}, {&g}, st, 0.01);
        CHECK(p == before);
        CHECK(st.step == 1);
    }
    SUBCASE("first bias-corrected step moves by ~lr") {
        Matrix p{{0.0}};
        const Matrix g{{1.0}};
        AdamState st;
        adam_step({&p}, {&g}, st, 0.01);
        CHECK(std::abs(-p(0, 0) - 0.01) < 1e-9);
    }
    SUBCASE("two steps match an independently computed trajectory") {
        Matrix p{{0.5}};
        AdamState st;
        const Matrix g1{{0.3}};
        const Matrix g2{{-0.7}};
        adam_step({&p}, {&g1}, st, 0.01);
        adam_step({&p}, {&g2}, st, 0.01);

        // Hand-rolled scalar Adam, same defaults.
        double hp = 0.5, m = 0.0, v = 0.0;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.01;
        int t = 0;
        for (double g : {0.3, -0.7}) {
            t += 1;
            m = b1 * m + (1 - b1) * g;
            v = b2 * v + (1 - b2) * g * g;
            const double mhat = m / (1 - std::pow(b1, t));
            const double vhat = v / (1 - std::pow(b2, t));
            hp -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        CHECK(std::abs(p(0, 0) - hp) <= 1e-12);
    }
    SUBCASE("non-positive learning rate is rejected") {
        Matrix p{{1.0}};
        const Matrix g{{1.0}};
        AdamState st;
        CHECK_THROWS_AS(adam_step({&p}, {&g}, st, 0.0), ConfigError);
        CHECK_THROWS_AS(adam_step({&p}, {&g}, st, -1.0), ConfigError);
    }
}
