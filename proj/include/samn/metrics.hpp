// Classification metrics: accuracy plus macro-averaged precision/recall/F1
// from the confusion matrix, with 0/0 defined as 0.
#pragma once

#include <vector>

#include "samn/matrix.hpp"

namespace samn {

struct ConfusionMatrix {
    int classes = 0;
    std::vector<long> counts;  // row = truth, col = prediction

    long& at(int truth, int pred) { return counts[truth * classes + pred]; }
    long at(int truth, int pred) const { return counts[truth * classes + pred]; }
    long total() const;
    long trace() const;
};

ConfusionMatrix confusion(const std::vector<int>& predictions,
                          const std::vector<int>& truth, int classes);

struct MetricsEntry {
    double accuracy = 0.0;
    double precision = 0.0;  // macro
    double recall = 0.0;     // macro
    double f1 = 0.0;         // macro of per-class harmonic means
};

MetricsEntry compute_metrics(const std::vector<int>& predictions,
                             const std::vector<int>& truth, int classes);

struct MetricsReport {
    std::vector<MetricsEntry> per_repetition;
    MetricsEntry mean;
    MetricsEntry stddev;  // sample (n-1); zero for a single repetition
};

MetricsReport aggregate(const std::vector<MetricsEntry>& entries);

}  // namespace samn
