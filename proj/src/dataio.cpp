#include "samn/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "samn/rng.hpp"

namespace samn {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

// "+1", "1.0" and "1" all name the same class.
std::string canonical_label(const std::string& raw) {
    double v;
    if (parse_double(raw, v)) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
    return trim(raw);
}

int encode_label(const std::string& raw, std::vector<std::string>& names) {
    const std::string key = canonical_label(raw);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == key) return static_cast<int>(i);
    }
    names.push_back(key);
    return static_cast<int>(names.size()) - 1;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string stem_of(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

std::map<int, std::vector<std::size_t>> group_by_class(
    const Dataset& ds, const std::vector<std::size_t>& indices) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t idx : indices) groups[ds.labels[idx]].push_back(idx);
    return groups;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_col) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) lines.push_back(line);
    }
    if (lines.empty()) throw DataError(path + ": empty file");

    // Label column reference: integer means 0-based position, anything else
    // is a header name (which requires a header line).
    long label_idx = -1;
    bool by_name = true;
    {
        char* end = nullptr;
        const long v = std::strtol(label_col.c_str(), &end, 10);
        if (!label_col.empty() && end == label_col.c_str() + label_col.size()) {
            label_idx = v;
            by_name = false;
        }
    }

    const std::vector<std::string> first = split_csv_line(lines[0]);
    bool has_header = by_name;
    if (!by_name) {
        if (label_idx < 0 || static_cast<std::size_t>(label_idx) >= first.size()) {
            throw DataError(path + ": label column index " + label_col +
                            " out of range for " + std::to_string(first.size()) +
                            " columns");
        }
        for (std::size_t c = 0; c < first.size(); ++c) {
            double v;
            if (c != static_cast<std::size_t>(label_idx) &&
                !parse_double(first[c], v)) {
                has_header = true;
                break;
            }
        }
    } else {
        for (std::size_t c = 0; c < first.size(); ++c) {
            if (trim(first[c]) == label_col) {
                label_idx = static_cast<long>(c);
                break;
            }
        }
        if (label_idx < 0) {
            throw DataError(path + ": label column \"" + label_col +
                            "\" not found in header");
        }
    }

    const std::size_t ncols = first.size();
    const std::size_t start = has_header ? 1 : 0;
    if (lines.size() <= start) throw DataError(path + ": no data rows");

    const std::size_t nrows = lines.size() - start;
    Matrix features(nrows, ncols - 1);
    std::vector<int> labels(nrows);
    std::vector<std::string> names;

    for (std::size_t r = 0; r < nrows; ++r) {
        const std::vector<std::string> cells = split_csv_line(lines[start + r]);
        if (cells.size() != ncols) {
            throw DataError(path + ": row " + std::to_string(start + r + 1) +
                            " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(ncols));
        }
        std::size_t f = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (c == static_cast<std::size_t>(label_idx)) {
                if (trim(cells[c]).empty()) {
                    throw DataError(path + ": empty label at row " +
                                    std::to_string(start + r + 1));
                }
                labels[r] = encode_label(cells[c], names);
                continue;
            }
            double v;
            if (!parse_double(cells[c], v)) {
                throw DataError(path + ": unparseable cell at row " +
                                std::to_string(start + r + 1) + ", column " +
                                std::to_string(c + 1) + ": \"" + trim(cells[c]) +
                                "\"");
            }
            features(r, f++) = v;
        }
    }

    Dataset ds;
    ds.name = stem_of(path);
    ds.features = std::move(features);
    ds.labels = std::move(labels);
    ds.label_names = std::move(names);
    return ds;
}

Dataset load_svmlight(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    struct Row {
        int label;
        std::vector<std::pair<std::size_t, double>> entries;  // 1-based indices
    };
    std::vector<Row> rows;
    std::vector<std::string> names;
    std::size_t max_index = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        std::istringstream ls(trim(line));
        std::string token;
        if (!(ls >> token)) continue;  // blank or comment-only line

        Row row;
        row.label = encode_label(token, names);
        std::size_t prev = 0;
        while (ls >> token) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos) {
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": malformed token \"" + token + "\"");
            }
            char* end = nullptr;
            const std::string idx_s = token.substr(0, colon);
            const long idx = std::strtol(idx_s.c_str(), &end, 10);
            if (end != idx_s.c_str() + idx_s.size() || idx < 1) {
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": bad feature index \"" + idx_s + "\"");
            }
            if (static_cast<std::size_t>(idx) <= prev) {
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": non-increasing feature index " +
                                std::to_string(idx));
            }
            double v;
            if (!parse_double(token.substr(colon + 1), v)) {
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": bad feature value in \"" + token + "\"");
            }
            prev = static_cast<std::size_t>(idx);
            row.entries.emplace_back(prev, v);
        }
        max_index = std::max(max_index, prev);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    Dataset ds;
    ds.name = stem_of(path);
    ds.features = Matrix(rows.size(), max_index);
    ds.labels.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ds.labels[r] = rows[r].label;
        for (const auto& [idx, v] : rows[r].entries) ds.features(r, idx - 1) = v;
    }
    ds.label_names = std::move(names);
    return ds;
}

void save_svmlight(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    char buf[40];
    for (std::size_t r = 0; r < ds.size(); ++r) {
        out << ds.label_names[ds.labels[r]];
        for (std::size_t c = 0; c < ds.feature_count(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(r, c));
            out << ' ' << (c + 1) << ':' << buf;
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing " + path);
}

StandardizationParams standardize_fit(const Matrix& train_features) {
    if (train_features.rows() == 0) {
        throw DataError("standardize_fit on empty training features");
    }
    const std::size_t n = train_features.cols();
    const double inv = 1.0 / static_cast<double>(train_features.rows());
    StandardizationParams params;
    params.mean.assign(n, 0.0);
    params.stddev.assign(n, 0.0);
    for (std::size_t i = 0; i < train_features.rows(); ++i)
        for (std::size_t j = 0; j < n; ++j) params.mean[j] += train_features(i, j);
    for (double& m : params.mean) m *= inv;
    for (std::size_t i = 0; i < train_features.rows(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = train_features(i, j) - params.mean[j];
            params.stddev[j] += d * d;
        }
    for (double& s : params.stddev) s = std::max(std::sqrt(s * inv), 1e-8);
    return params;
}

Matrix standardize_apply(const StandardizationParams& params, const Matrix& features) {
    if (features.cols() != params.mean.size()) {
        throw DimensionError("standardize_apply: " + std::to_string(features.cols()) +
                             " features vs " + std::to_string(params.mean.size()) +
                             " fitted columns");
    }
    Matrix out = features;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j)
            out(i, j) = (out(i, j) - params.mean[j]) / params.stddev[j];
    return out;
}

SplitPlan stratified_split(const Dataset& ds, unsigned long seed, SplitRatios ratios) {
    if (ratios.test <= 0.0 || ratios.test >= 1.0 || ratios.val <= 0.0 ||
        ratios.val >= 1.0) {
        throw ConfigError("split ratios must lie in (0,1)");
    }
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto groups = group_by_class(ds, all);
    if (static_cast<int>(groups.size()) != ds.class_count()) {
        throw DataError(ds.name + ": some class has no samples");
    }
    for (const auto& [c, members] : groups) {
        if (members.size() < 3) {
            throw DataError(ds.name + ": class \"" + ds.label_names[c] +
                            "\" has only " + std::to_string(members.size()) +
                            " samples (need >= 3 to split)");
        }
    }

    rng::Engine eng(rng::derive_seed(seed, 0xdadaULL));
    SplitPlan plan;
    plan.seed = seed;
    for (auto& [c, members] : groups) {
        rng::shuffle(members, eng);
        const std::size_t n_c = members.size();
        std::size_t n_test = static_cast<std::size_t>(
            std::floor(static_cast<double>(n_c) * ratios.test));
        n_test = std::clamp<std::size_t>(n_test, 1, n_c - 2);
        const std::size_t rest = n_c - n_test;
        std::size_t n_val = static_cast<std::size_t>(
            std::floor(static_cast<double>(rest) * ratios.val));
        n_val = std::clamp<std::size_t>(n_val, 1, rest - 1);

        std::size_t i = 0;
        for (; i < n_test; ++i) plan.test.push_back(members[i]);
        for (; i < n_test + n_val; ++i) plan.val.push_back(members[i]);
        for (; i < n_c; ++i) plan.train.push_back(members[i]);
    }
    std::sort(plan.train.begin(), plan.train.end());
    std::sort(plan.val.begin(), plan.val.end());
    std::sort(plan.test.begin(), plan.test.end());
    return plan;
}

std::vector<Batch> class_grouped_batches(const Dataset& ds,
                                         const std::vector<std::size_t>& indices,
                                         std::size_t batch_size,
                                         unsigned long seed) {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    std::vector<std::size_t> shuffled = indices;
    rng::Engine eng(rng::derive_seed(seed, 0xba7cULL));
    rng::shuffle(shuffled, eng);

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < shuffled.size(); start += batch_size) {
        Batch b;
        const std::size_t stop = std::min(start + batch_size, shuffled.size());
        b.indices.assign(shuffled.begin() + start, shuffled.begin() + stop);
        for (std::size_t idx : b.indices) b.by_class[ds.labels[idx]].push_back(idx);
        batches.push_back(std::move(b));
    }
    return batches;
}

std::vector<std::vector<std::size_t>> stratified_kfold(
    const Dataset& ds, const std::vector<std::size_t>& indices, int folds,
    unsigned long seed, int* folds_used) {
    if (folds < 2) throw ConfigError("fold count must be >= 2");
    auto groups = group_by_class(ds, indices);
    std::size_t min_class = indices.size();
    for (const auto& [c, members] : groups) min_class = std::min(min_class, members.size());
    int k = folds;
    if (min_class < static_cast<std::size_t>(folds)) {
        k = std::max<int>(2, static_cast<int>(min_class));
        std::cerr << "warning: reducing cross-validation folds from " << folds
                  << " to " << k << " (rarest class has " << min_class
                  << " members)\n";
    }
    if (folds_used) *folds_used = k;

    rng::Engine eng(rng::derive_seed(seed, 0xf01dULL));
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
    std::size_t next = 0;
    for (auto& [c, members] : groups) {
        rng::shuffle(members, eng);
        for (std::size_t idx : members) {
            out[next % k].push_back(idx);
            ++next;
        }
    }
    for (auto& fold : out) std::sort(fold.begin(), fold.end());
    return out;
}

}  // namespace samn
