#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "samn/dataio.hpp"
#include "samn/rng.hpp"
#include "support.hpp"

using namespace samn;

#ifndef SAMN_DATA_DIR
#define SAMN_DATA_DIR "data"
#endif

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = "samn_test_" + std::to_string(counter++) + ".tmp";
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

Dataset toy_dataset(std::size_t per_class, int classes, unsigned long seed) {
    rng::Engine eng(seed);
    Dataset ds;
    ds.name = "toy";
    ds.features = Matrix(per_class * classes, 2);
    for (int c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = c * per_class + i;
            ds.features(r, 0) = c + rng::uniform(eng, -0.3, 0.3);
            ds.features(r, 1) = -c + rng::uniform(eng, -0.3, 0.3);
            ds.labels.push_back(c);
        }
    }
    for (int c = 0; c < classes; ++c) ds.label_names.push_back("c" + std::to_string(c));
    return ds;
}

}  // namespace

TEST_CASE("csv labels are encoded in first-appearance order") {
    TempFile f("1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n");
    const Dataset ds = load_csv(f.path, "2");
    CHECK(ds.size() == 3);
    CHECK(ds.feature_count() == 2);
    CHECK(ds.class_count() == 2);
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
    CHECK(ds.label_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.features(2, 1) == 6.0);
}

TEST_CASE("csv header handling and errors") {
    SUBCASE("header-only file is an empty-dataset error") {
        TempFile f("x,y,label\n");
        CHECK_THROWS_AS(load_csv(f.path, "label"), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv("no_such_file.csv", "0"), DataError);
    }
    SUBCASE("label column by name requires matching header") {
        TempFile f("x,y,label\n1,2,a\n3,4,b\n");
        const Dataset ds = load_csv(f.path, "label");
        CHECK(ds.size() == 2);
        CHECK_THROWS_WITH_AS(load_csv(f.path, "nope"),
                             doctest::Contains("not found"), DataError);
    }
    SUBCASE("unparseable cell reports row and column") {
        TempFile f("x,y,label\n1,2,a\n3,oops,b\n");
        CHECK_THROWS_WITH_AS(load_csv(f.path, "label"),
                             doctest::Contains("row 3, column 2"), DataError);
    }
    SUBCASE("missing values are rejected") {
        TempFile f("x,y,label\n1,,a\n");
        CHECK_THROWS_AS(load_csv(f.path, "label"), DataError);
    }
    SUBCASE("numeric-looking labels are canonicalized") {
        TempFile f("1,+1\n2,1.0\n3,-1\n");
        const Dataset ds = load_csv(f.path, "1");
        CHECK(ds.class_count() == 2);
        CHECK(ds.labels == std::vector<int>{0, 0, 1});
    }
}

TEST_CASE("iris loads with the standard UCI dimensions") {
    const Dataset iris = load_csv(std::string(SAMN_DATA_DIR) + "/iris.csv", "label");
    CHECK(iris.size() == 150);
    CHECK(iris.feature_count() == 4);
    CHECK(iris.class_count() == 3);
}

TEST_CASE("svmlight parsing") {
    SUBCASE("absent indices are zero") {
        TempFile f("1 1:0.5 3:2.0\n-1 2:1.0 3:0.25\n");
        const Dataset ds = load_svmlight(f.path);
        CHECK(ds.feature_count() == 3);
        CHECK(ds.features(0, 0) == 0.5);
        CHECK(ds.features(0, 1) == 0.0);
        CHECK(ds.features(0, 2) == 2.0);
        CHECK(ds.class_count() == 2);
    }
    SUBCASE("labels +1/-1 give two classes; comments ignored") {
        TempFile f("# a comment line\n+1 1:1.0 # trailing\n-1 1:2.0\n");
        const Dataset ds = load_svmlight(f.path);
        CHECK(ds.size() == 2);
        CHECK(ds.class_count() == 2);
        CHECK(ds.label_names == std::vector<std::string>{"1", "-1"});
    }
    SUBCASE("non-increasing indices are rejected with the line number") {
        TempFile f("1 1:1.0\n1 2:1.0 2:3.0\n");
        CHECK_THROWS_WITH_AS(load_svmlight(f.path), doctest::Contains("line 2"),
                             DataError);
    }
    SUBCASE("malformed token is rejected") {
        TempFile f("1 nonsense\n");
        CHECK_THROWS_AS(load_svmlight(f.path), DataError);
    }
    SUBCASE("write-then-read reproduces the dense matrix exactly") {
        rng::Engine eng(99);
        Dataset ds = toy_dataset(5, 3, 4);
        // sprinkle exact zeros to exercise the dense writer
        ds.features(0, 0) = 0.0;
        ds.features(7, 1) = 0.0;
        TempFile f("");
        save_svmlight(ds, f.path);
        const Dataset back = load_svmlight(f.path);
        CHECK(back.features == ds.features);
        CHECK(back.labels == ds.labels);
    }
}

TEST_CASE("standardization") {
    SUBCASE("two-point column maps to -1,+1 and constants to zero") {
        const Matrix train{{0.0, 5.0}, {2.0, 5.0}};
        const StandardizationParams p = standardize_fit(train);
        const Matrix out = standardize_apply(p, train);
        CHECK(out(0, 0) == doctest::Approx(-1.0));
        CHECK(out(1, 0) == doctest::Approx(1.0));
        CHECK(out(0, 1) == 0.0);
        CHECK(out(1, 1) == 0.0);
        CHECK(p.stddev[1] >= 1e-8);
    }
    SUBCASE("training features standardize to mean 0, sigma 1") {
        rng::Engine eng(21);
        const Matrix train = testsupport::random_matrix(40, 3, eng, -4.0, 9.0);
        const StandardizationParams p = standardize_fit(train);
        const Matrix out = standardize_apply(p, train);
        for (std::size_t j = 0; j < 3; ++j) {
            double mu = 0.0;
            for (std::size_t i = 0; i < out.rows(); ++i) mu += out(i, j);
            mu /= static_cast<double>(out.rows());
            CHECK(std::abs(mu) <= 1e-9);
            double var = 0.0;
            for (std::size_t i = 0; i < out.rows(); ++i)
                var += (out(i, j) - mu) * (out(i, j) - mu);
            var /= static_cast<double>(out.rows());
            CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-6);
        }
    }
    SUBCASE("held-out rows use training statistics only") {
        rng::Engine eng(22);
        const Matrix train = testsupport::random_matrix(20, 2, eng, 0.0, 1.0);
        const Matrix held = testsupport::random_matrix(6, 2, eng, 5.0, 9.0);
        const StandardizationParams p = standardize_fit(train);
        const Matrix out = standardize_apply(p, held);
        for (std::size_t i = 0; i < held.rows(); ++i)
            for (std::size_t j = 0; j < held.cols(); ++j) {
                const double expect = (held(i, j) - p.mean[j]) / p.stddev[j];
                CHECK(out(i, j) == expect);
            }
        // recomputing the fit on train alone gives identical parameters
        const StandardizationParams again = standardize_fit(train);
        CHECK(again.mean == p.mean);
        CHECK(again.stddev == p.stddev);
    }
}

TEST_CASE("stratified split") {
    SUBCASE("10 samples, 2 balanced classes, 8:2 puts one of each in test") {
        const Dataset ds = toy_dataset(5, 2, 7);
        const SplitPlan plan = stratified_split(ds, 1);
        CHECK(plan.test.size() == 2);
        std::set<int> test_classes;
        for (std::size_t idx : plan.test) test_classes.insert(ds.labels[idx]);
        CHECK(test_classes.size() == 2);
    }
    SUBCASE("partitions are disjoint and cover everything") {
        const Dataset ds = toy_dataset(17, 3, 8);
        const SplitPlan plan = stratified_split(ds, 3);
        std::set<std::size_t> seen;
        for (const auto* part : {&plan.train, &plan.val, &plan.test})
            for (std::size_t idx : *part) CHECK(seen.insert(idx).second);
        CHECK(seen.size() == ds.size());
    }
    SUBCASE("same seed twice gives identical index lists") {
        const Dataset ds = toy_dataset(20, 2, 9);
        const SplitPlan a = stratified_split(ds, 5);
        const SplitPlan b = stratified_split(ds, 5);
        CHECK(a.train == b.train);
        CHECK(a.val == b.val);
        CHECK(a.test == b.test);
    }
    SUBCASE("five seeds give five distinct test sets on N=100") {
        const Dataset ds = toy_dataset(50, 2, 10);
        std::set<std::vector<std::size_t>> tests;
        for (unsigned long seed = 1; seed <= 5; ++seed)
            tests.insert(stratified_split(ds, seed).test);
        CHECK(tests.size() == 5);
    }
    SUBCASE("class below three members is rejected by name") {
        Dataset ds = toy_dataset(5, 2, 11);
        ds.features = Matrix(7, 2);
        ds.labels = {0, 0, 0, 0, 0, 1, 1};
        CHECK_THROWS_WITH_AS(stratified_split(ds, 1), doctest::Contains("c1"),
                             DataError);
    }
    SUBCASE("per-class proportions stay within one sample of the ratio") {
        const Dataset ds = toy_dataset(23, 3, 12);
        const SplitPlan plan = stratified_split(ds, 2);
        for (int c = 0; c < 3; ++c) {
            const auto count = [&](const std::vector<std::size_t>& part) {
                std::size_t n = 0;
                for (std::size_t idx : part) n += ds.labels[idx] == c ? 1 : 0;
                return static_cast<double>(n);
            };
            CHECK(std::abs(count(plan.test) - 0.2 * 23) <= 1.0);
        }
    }
}

TEST_CASE("class-grouped batches") {
    const Dataset ds = toy_dataset(50, 2, 13);
    std::vector<std::size_t> indices(ds.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    SUBCASE("batch size >= N gives a single batch with every class group") {
        const auto batches = class_grouped_batches(ds, indices, 500, 1);
        CHECK(batches.size() == 1);
        CHECK(batches[0].indices.size() == 100);
        CHECK(batches[0].by_class.size() == 2);
    }
    SUBCASE("batch size 32 on N=100 gives 32/32/32/4") {
        const auto batches = class_grouped_batches(ds, indices, 32, 1);
        REQUIRE(batches.size() == 4);
        CHECK(batches[0].indices.size() == 32);
        CHECK(batches[1].indices.size() == 32);
        CHECK(batches[2].indices.size() == 32);
        CHECK(batches[3].indices.size() == 4);
    }
    SUBCASE("batches partition the input indices") {
        const auto batches = class_grouped_batches(ds, indices, 7, 3);
        std::set<std::size_t> seen;
        for (const Batch& b : batches) {
            std::size_t grouped = 0;
            for (const auto& [c, members] : b.by_class) {
                grouped += members.size();
                for (std::size_t idx : members) CHECK(ds.labels[idx] == c);
            }
            CHECK(grouped == b.indices.size());
            for (std::size_t idx : b.indices) CHECK(seen.insert(idx).second);
        }
        CHECK(seen.size() == indices.size());
    }
}

TEST_CASE("stratified k-fold") {
    const Dataset ds = toy_dataset(10, 2, 14);
    std::vector<std::size_t> indices(ds.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    int used = 0;
    const auto folds = stratified_kfold(ds, indices, 5, 1, &used);
    CHECK(used == 5);
    CHECK(folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& fold : folds)
        for (std::size_t idx : fold) CHECK(seen.insert(idx).second);
    CHECK(seen.size() == 20);

    // rarest class smaller than the fold count reduces the fold count
    Dataset tiny = toy_dataset(4, 2, 15);
    std::vector<std::size_t> tiny_idx(tiny.size());
    for (std::size_t i = 0; i < tiny_idx.size(); ++i) tiny_idx[i] = i;
    stratified_kfold(tiny, tiny_idx, 5, 1, &used);
    CHECK(used == 4);
}
