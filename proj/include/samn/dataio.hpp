// Tabular dataset loading, standardization, reproducible splits and
// class-grouped batching.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "samn/matrix.hpp"

namespace samn {

struct Dataset {
    std::string name;
    Matrix features;                       // N x n
    std::vector<int> labels;               // dense ids in {0..C-1}
    std::vector<std::string> label_names;  // id -> original label text

    std::size_t size() const { return features.rows(); }
    std::size_t feature_count() const { return features.cols(); }
    int class_count() const { return static_cast<int>(label_names.size()); }
};

// CSV with comma delimiter. The first line is treated as a header when any
// cell outside the label column fails to parse as a number (or always, when
// the label column is referenced by name). Label values may be arbitrary
// strings; they are encoded densely in first-appearance order. Numeric-looking
// labels are canonicalized ("+1" and "1.0" both mean "1").
Dataset load_csv(const std::string& path, const std::string& label_col);

// `<label> <idx>:<val> ...` with 1-based strictly increasing indices;
// absent indices are zero; `#` starts a comment.
Dataset load_svmlight(const std::string& path);

// Dense writer (every index emitted) so a write-then-read round trip
// reproduces the feature matrix exactly.
void save_svmlight(const Dataset& ds, const std::string& path);

struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> stddev;  // population sigma, clamped to >= 1e-8
};

StandardizationParams standardize_fit(const Matrix& train_features);
Matrix standardize_apply(const StandardizationParams& params, const Matrix& features);

struct SplitRatios {
    double test = 0.2;  // fraction of N
    double val = 0.2;   // fraction of train+val
};

struct SplitPlan {
    unsigned long seed = 0;
    int repetition = 1;  // 1..repetitions
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

// Stratified split: per-class proportions in each partition stay within one
// sample of the global ratio and every class lands at least once in each
// partition. Deterministic in (dataset, seed). Classes need >= 3 members.
SplitPlan stratified_split(const Dataset& ds, unsigned long seed,
                           SplitRatios ratios = {});

struct Batch {
    std::vector<std::size_t> indices;                    // dataset row ids
    std::map<int, std::vector<std::size_t>> by_class;    // class id -> row ids
};

// Seeded shuffle of `indices` cut into consecutive batches; each batch also
// carries its indices grouped per class for per-class attention.
std::vector<Batch> class_grouped_batches(const Dataset& ds,
                                         const std::vector<std::size_t>& indices,
                                         std::size_t batch_size,
                                         unsigned long seed);

// Stratified k folds over `indices` (labels taken from ds). When the rarest
// class has fewer than `folds` members the fold count is reduced (min 2) and
// a warning is printed to stderr. Returns the folds actually used.
std::vector<std::vector<std::size_t>> stratified_kfold(
    const Dataset& ds, const std::vector<std::size_t>& indices, int folds,
    unsigned long seed, int* folds_used = nullptr);

}  // namespace samn
