#include "samn/metrics.hpp"

#include <cmath>

namespace samn {

long ConfusionMatrix::total() const {
    long t = 0;
    for (long v : counts) t += v;
    return t;
}

long ConfusionMatrix::trace() const {
    long t = 0;
    for (int c = 0; c < classes; ++c) t += at(c, c);
    return t;
}

ConfusionMatrix confusion(const std::vector<int>& predictions,
                          const std::vector<int>& truth, int classes) {
    if (predictions.size() != truth.size()) {
        throw DimensionError("confusion: prediction/truth length mismatch");
    }
    if (classes < 1) throw ConfigError("confusion needs at least one class");
    ConfusionMatrix cm;
    cm.classes = classes;
    cm.counts.assign(static_cast<std::size_t>(classes) * classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= classes || predictions[i] < 0 ||
            predictions[i] >= classes) {
            throw DataError("confusion: label out of range at index " +
                            std::to_string(i));
        }
        cm.at(truth[i], predictions[i]) += 1;
    }
    return cm;
}

MetricsEntry compute_metrics(const std::vector<int>& predictions,
                             const std::vector<int>& truth, int classes) {
    const ConfusionMatrix cm = confusion(predictions, truth, classes);
    MetricsEntry m;
    const long total = cm.total();
    m.accuracy = total > 0
                     ? static_cast<double>(cm.trace()) / static_cast<double>(total)
                     : 0.0;
    for (int c = 0; c < classes; ++c) {
        long tp = cm.at(c, c);
        long predicted = 0, actual = 0;
        for (int o = 0; o < classes; ++o) {
            predicted += cm.at(o, c);
            actual += cm.at(c, o);
        }
        const double prec =
            predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
        const double rec = actual > 0 ? static_cast<double>(tp) / actual : 0.0;
        const double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        m.precision += prec;
        m.recall += rec;
        m.f1 += f1;
    }
    m.precision /= classes;
    m.recall /= classes;
    m.f1 /= classes;
    return m;
}

MetricsReport aggregate(const std::vector<MetricsEntry>& entries) {
    if (entries.empty()) throw ConfigError("aggregate of zero repetitions");
    MetricsReport report;
    report.per_repetition = entries;
    const double n = static_cast<double>(entries.size());
    for (const MetricsEntry& e : entries) {
        report.mean.accuracy += e.accuracy;
        report.mean.precision += e.precision;
        report.mean.recall += e.recall;
        report.mean.f1 += e.f1;
    }
    report.mean.accuracy /= n;
    report.mean.precision /= n;
    report.mean.recall /= n;
    report.mean.f1 /= n;
    if (entries.size() > 1) {
        for (const MetricsEntry& e : entries) {
            const auto sq = [](double d) { return d * d; };
            report.stddev.accuracy += sq(e.accuracy - report.mean.accuracy);
            report.stddev.precision += sq(e.precision - report.mean.precision);
            report.stddev.recall += sq(e.recall - report.mean.recall);
            report.stddev.f1 += sq(e.f1 - report.mean.f1);
        }
        const double denom = n - 1.0;
        report.stddev.accuracy = std::sqrt(report.stddev.accuracy / denom);
        report.stddev.precision = std::sqrt(report.stddev.precision / denom);
        report.stddev.recall = std::sqrt(report.stddev.recall / denom);
        report.stddev.f1 = std::sqrt(report.stddev.f1 / denom);
    }
    return report;
}

}  // namespace samn
