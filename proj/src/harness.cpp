#include "samn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "samn/adam.hpp"
#include "samn/rng.hpp"

namespace samn {

namespace {

const std::set<std::string> kModels = {"samn", "san", "mbn",
                                       "cenet", "dnmsvm", "svc"};

Matrix rows_of(const Matrix& m, const std::vector<std::size_t>& idx) {
    return gather_rows(m, idx);
}

std::vector<int> labels_of(const Dataset& ds, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(ds.labels[i]);
    return out;
}

double accuracy_of(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
    return pred.empty() ? 0.0
                        : static_cast<double>(hit) / static_cast<double>(pred.size());
}

// label id -> signed label for the binary-only models: class 1 is +1.
std::vector<double> signed_labels(const std::vector<int>& labels) {
    std::vector<double> out;
    out.reserve(labels.size());
    for (int l : labels) out.push_back(l == 1 ? 1.0 : -1.0);
    return out;
}

SamnConfig samn_config_for(const ExperimentConfig& config, std::size_t input_dim) {
    SamnConfig cfg;
    cfg.total_layers = config.layers;
    cfg.pre_attention_layers = config.layers - 1;
    cfg.variant = variant_from_string(config.model);
    cfg.blocknum = cfg.variant == Variant::Mbn ? 0 : config.blocknum;
    cfg.hidden_width = config.hidden_width == 0 ? input_dim : config.hidden_width;
    cfg.activation = activation_from_string(config.activation);
    cfg.learned_projections = config.learned_projections;
    cfg.validate();
    return cfg;
}

TrainOutcome train_samn(const ExperimentConfig& config, const Dataset& ds,
                        const SplitPlan& split) {
    const int classes = ds.class_count();
    const SamnConfig cfg = samn_config_for(config, ds.feature_count());
    const std::size_t width = cfg.width_for(ds.feature_count());
    SamnParams params =
        SamnParams::init(cfg, ds.feature_count(), rng::derive_seed(split.seed, 1));
    PrototypeState state = PrototypeState::zeros(classes, width);
    AdamState opt;

    const Matrix val_x = rows_of(ds.features, split.val);
    const std::vector<int> val_y = labels_of(ds, split.val);

    // Warm-up: one pass over the training batches updating prototypes only,
    // so every class has a stored prototype before the first loss.
    {
        const auto batches = class_grouped_batches(
            ds, split.train, config.batch_size, rng::derive_seed(split.seed, 0));
        std::vector<Matrix> sum(classes, Matrix(1, width));
        std::vector<long> count(classes, 0);
        for (const Batch& batch : batches) {
            const Matrix bx = rows_of(ds.features, batch.indices);
            const std::vector<int> by = labels_of(ds, batch.indices);
            if (cfg.variant == Variant::San) {
                for (const auto& [c, m] :
                     batch_class_means_plain(params, cfg, bx, by)) {
                    sum[c] = count[c] == 0 ? m : add(sum[c], m);
                    count[c] += 1;
                }
            } else {
                warmup_update(params, cfg, state, bx, by);
            }
        }
        if (cfg.variant == Variant::San) {
            for (int c = 0; c < classes; ++c) {
                if (count[c] == 0) continue;
                state.prototype[c] = scale(sum[c], 1.0 / count[c]);
                state.seen[c] = true;
            }
        }
        if (!state.all_seen()) {
            throw StateError(ds.name + ": warm-up left a class without prototype");
        }
        if (cfg.variant != Variant::San) {
            recenter_prototype_offset(params, state);
        }
    }

    TrainOutcome outcome;
    outcome.best_val_accuracy = -1.0;
    SamnTrained best{cfg, params, state};
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto batches =
            class_grouped_batches(ds, split.train, config.batch_size,
                                  rng::derive_seed(split.seed, epoch));
        std::vector<Matrix> san_sum(classes, Matrix(1, width));
        std::vector<long> san_count(classes, 0);
        double epoch_loss = 0.0;
        for (const Batch& batch : batches) {
            const Matrix bx = rows_of(ds.features, batch.indices);
            const std::vector<int> by = labels_of(ds, batch.indices);
            try {
                Tape tape;
                const ParamVars vars = inject_params(tape, params, cfg);
                const BatchForward fw =
                    forward_batch(tape, vars, cfg, state, bx, by, classes);
                if (!std::isfinite(fw.total)) {
                    throw NumericError("non-finite loss");
                }
                epoch_loss += fw.total;
                tape.backward(fw.total_var);
                adam_step(params.trainable(cfg), trainable_grads(tape, vars, cfg),
                          opt, config.lr);
                if (cfg.variant == Variant::San) {
                    for (const auto& [c, m] : fw.class_mean) {
                        san_sum[c] = san_count[c] == 0 ? m : add(san_sum[c], m);
                        san_count[c] += 1;
                    }
                } else {
                    commit_memory(state, tape, fw);
                }
            } catch (const NumericError& e) {
                throw NumericError(ds.name + "/" + config.model +
                                   " diverged at epoch " + std::to_string(epoch) +
                                   ": " + e.what());
            }
        }
        if (cfg.variant == Variant::San) {
            for (int c = 0; c < classes; ++c) {
                if (san_count[c] == 0) continue;
                state.prototype[c] = scale(san_sum[c], 1.0 / san_count[c]);
            }
            state.batches_seen += static_cast<long>(batches.size());
        }
        outcome.loss_history.push_back(epoch_loss /
                                       static_cast<double>(batches.size()));

        const double val_acc =
            accuracy_of(samn_predict(params, cfg, state, val_x).labels, val_y);
        outcome.val_history.push_back(val_acc);
        if (val_acc >= outcome.best_val_accuracy) {
            outcome.best_val_accuracy = val_acc;
            outcome.best_epoch = epoch;
            best = SamnTrained{cfg, params, state};
        }
    }
    outcome.model = std::move(best);
    return outcome;
}

TrainOutcome train_cenet(const ExperimentConfig& config, const Dataset& ds,
                         const SplitPlan& split) {
    const int classes = ds.class_count();
    const std::size_t width =
        config.hidden_width == 0 ? ds.feature_count() : config.hidden_width;
    CenetModel model =
        CenetModel::init(ds.feature_count(), width, config.layers, classes,
                         rng::derive_seed(split.seed, 2));
    model.activation = activation_from_string(config.activation);
    AdamState opt;

    const Matrix val_x = rows_of(ds.features, split.val);
    const std::vector<int> val_y = labels_of(ds, split.val);

    TrainOutcome outcome;
    outcome.best_val_accuracy = -1.0;
    CenetTrained best{model};
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto batches =
            class_grouped_batches(ds, split.train, config.batch_size,
                                  rng::derive_seed(split.seed, epoch));
        double epoch_loss = 0.0;
        for (const Batch& batch : batches) {
            const Matrix bx = rows_of(ds.features, batch.indices);
            const std::vector<int> by = labels_of(ds, batch.indices);
            try {
                Tape tape;
                const CenetVars vars = inject_params(tape, model);
                const Var loss =
                    cenet_loss(tape, vars, model.activation, bx, by, classes);
                epoch_loss += tape.value(loss)(0, 0);
                tape.backward(loss);
                adam_step(model.trainable(), trainable_grads(tape, vars), opt,
                          config.lr);
            } catch (const NumericError& e) {
                throw NumericError(ds.name + "/cenet diverged at epoch " +
                                   std::to_string(epoch) + ": " + e.what());
            }
        }
        outcome.loss_history.push_back(epoch_loss /
                                       static_cast<double>(batches.size()));
        const double val_acc = accuracy_of(cenet_predict(model, val_x), val_y);
        outcome.val_history.push_back(val_acc);
        if (val_acc >= outcome.best_val_accuracy) {
            outcome.best_val_accuracy = val_acc;
            outcome.best_epoch = epoch;
            best = CenetTrained{model};
        }
    }
    outcome.model = std::move(best);
    return outcome;
}

TrainOutcome train_dnmsvm(const ExperimentConfig& config, const Dataset& ds,
                          const SplitPlan& split) {
    if (ds.class_count() != 2) {
        throw DataError("dnmsvm is binary-only; dataset " + ds.name + " has " +
                        std::to_string(ds.class_count()) + " classes");
    }
    const std::size_t width =
        config.hidden_width == 0 ? ds.feature_count() : config.hidden_width;
    const Matrix val_x = rows_of(ds.features, split.val);
    const std::vector<int> val_y = labels_of(ds, split.val);

    TrainOutcome outcome;
    outcome.best_val_accuracy = -1.0;
    for (std::size_t pi = 0; pi < config.dnmsvm_penalties.size(); ++pi) {
        const double penalty = config.dnmsvm_penalties[pi];
        DnmsvmModel model =
            DnmsvmModel::init(ds.feature_count(), width, config.layers - 1,
                              rng::derive_seed(split.seed, 3 + pi));
        model.activation = activation_from_string(config.activation);
        model.penalty = penalty;
        AdamState opt;
        double run_best_acc = -1.0;
        int run_best_epoch = 0;
        DnmsvmModel run_best = model;
        std::vector<double> losses, vals;
        for (int epoch = 1; epoch <= config.epochs; ++epoch) {
            const auto batches =
                class_grouped_batches(ds, split.train, config.batch_size,
                                      rng::derive_seed(split.seed, epoch));
            double epoch_loss = 0.0;
            for (const Batch& batch : batches) {
                const Matrix bx = rows_of(ds.features, batch.indices);
                const std::vector<double> by =
                    signed_labels(labels_of(ds, batch.indices));
                try {
                    Tape tape;
                    const DnmsvmVars vars = inject_params(tape, model);
                    const Var loss = dnmsvm_loss(tape, vars, model.activation, bx,
                                                 by, penalty);
                    epoch_loss += tape.value(loss)(0, 0);
                    tape.backward(loss);
                    adam_step(model.trainable(), trainable_grads(tape, vars), opt,
                              config.lr);
                } catch (const NumericError& e) {
                    throw NumericError(ds.name + "/dnmsvm diverged at epoch " +
                                       std::to_string(epoch) + ": " + e.what());
                }
            }
            losses.push_back(epoch_loss / static_cast<double>(batches.size()));
            const std::vector<double> pred = dnmsvm_predict(model, val_x);
            std::size_t hit = 0;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                hit += (pred[i] > 0 ? 1 : 0) == val_y[i];
            }
            const double val_acc =
                static_cast<double>(hit) / static_cast<double>(val_y.size());
            vals.push_back(val_acc);
            if (val_acc >= run_best_acc) {
                run_best_acc = val_acc;
                run_best_epoch = epoch;
                run_best = model;
            }
        }
        if (run_best_acc > outcome.best_val_accuracy) {
            outcome.best_val_accuracy = run_best_acc;
            outcome.best_epoch = run_best_epoch;
            outcome.model = DnmsvmTrained{run_best};
            outcome.loss_history = losses;
            outcome.val_history = vals;
        }
    }
    return outcome;
}

TrainOutcome train_svc(const ExperimentConfig& config, const Dataset& ds,
                       const SplitPlan& split) {
    if (ds.class_count() != 2) {
        throw DataError("svc is binary-only; dataset " + ds.name + " has " +
                        std::to_string(ds.class_count()) + " classes");
    }
    // The full 80% training portion (train + val) feeds the cross-validated
    // grid search and the final fit.
    std::vector<std::size_t> rows = split.train;
    rows.insert(rows.end(), split.val.begin(), split.val.end());
    std::sort(rows.begin(), rows.end());
    const Matrix x = rows_of(ds.features, rows);
    const std::vector<double> y = signed_labels(labels_of(ds, rows));

    const std::vector<double> gammas =
        config.gamma_grid.empty() ? default_gamma_grid() : config.gamma_grid;
    const std::vector<double> cs =
        config.c_grid.empty() ? default_c_grid() : config.c_grid;
    const GridSearchResult search = grid_search_cv(
        x, y, gammas, cs, config.cv_folds, split.seed, KernelKind::Rbf,
        config.svm_tol);
    const SmoResult fit =
        smo_train(x, y, KernelSpec{KernelKind::Rbf, search.gamma}, search.c_box,
                  config.svm_tol);

    TrainOutcome outcome;
    outcome.model = SvcTrained{fit.model, search, fit.alpha, fit.dual_objective};
    outcome.best_val_accuracy = search.cv_accuracy;
    outcome.best_epoch = 0;
    return outcome;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!kModels.count(model)) throw ConfigError("unknown model \"" + model + "\"");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (lr <= 0.0) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (test_ratio <= 0.0 || test_ratio >= 1.0 || val_ratio <= 0.0 ||
        val_ratio >= 1.0) {
        throw ConfigError("split ratios must lie in (0,1)");
    }
    if (!seeds.empty() && seeds.size() < static_cast<std::size_t>(repetitions)) {
        throw ConfigError("seed list shorter than the repetition count");
    }
    if (format != "csv" && format != "svmlight") {
        throw ConfigError("unknown dataset format \"" + format + "\"");
    }
}

std::vector<unsigned long> ExperimentConfig::seed_list() const {
    if (!seeds.empty()) return seeds;
    std::vector<unsigned long> out;
    for (int r = 1; r <= repetitions; ++r) out.push_back(r);
    return out;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid config: " + e.what());
    }
    ExperimentConfig c;
    try {
        c.dataset_path = j.at("dataset").get<std::string>();
        c.format = j.value("format", c.format);
        c.label_col = j.value("label_col", c.label_col);
        c.dataset_name = j.value("dataset_name", c.dataset_name);
        c.model = j.value("model", c.model);
        c.epochs = j.value("epochs", c.epochs);
        c.lr = j.value("lr", c.lr);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.repetitions = j.value("repetitions", c.repetitions);
        c.test_ratio = j.value("test_ratio", c.test_ratio);
        c.val_ratio = j.value("val_ratio", c.val_ratio);
        c.seeds = j.value("seeds", c.seeds);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.layers = j.value("layers", c.layers);
        c.blocknum = j.value("blocknum", c.blocknum);
        c.hidden_width = j.value("hidden_width", c.hidden_width);
        c.activation = j.value("activation", c.activation);
        c.learned_projections =
            j.value("learned_projections", c.learned_projections);
        c.cv_folds = j.value("cv_folds", c.cv_folds);
        c.svm_tol = j.value("svm_tol", c.svm_tol);
        c.gamma_grid = j.value("gamma_grid", c.gamma_grid);
        c.c_grid = j.value("c_grid", c.c_grid);
        c.dnmsvm_penalties = j.value("dnmsvm_penalties", c.dnmsvm_penalties);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": bad config value: " + e.what());
    }
    c.validate();
    return c;
}

void apply_seed_env_override(ExperimentConfig& config) {
    const char* env = std::getenv("SAMN_SEEDS");
    if (!env || !*env) return;
    std::vector<unsigned long> seeds;
    std::string token;
    for (const char* p = env;; ++p) {
        if (*p == ',' || *p == '\0') {
            if (!token.empty()) {
                seeds.push_back(std::strtoul(token.c_str(), nullptr, 10));
                token.clear();
            }
            if (*p == '\0') break;
        } else {
            token += *p;
        }
    }
    if (seeds.empty()) throw ConfigError("SAMN_SEEDS is set but holds no seeds");
    config.seeds = seeds;
    config.repetitions = static_cast<int>(seeds.size());
}

TrainOutcome run_training(const ExperimentConfig& config, const Dataset& ds,
                          const SplitPlan& split) {
    config.validate();
    if (config.model == "cenet") return train_cenet(config, ds, split);
    if (config.model == "dnmsvm") return train_dnmsvm(config, ds, split);
    if (config.model == "svc") return train_svc(config, ds, split);
    return train_samn(config, ds, split);
}

std::vector<int> predict_labels(const TrainOutcome& outcome,
                                const Matrix& features) {
    if (const auto* samn = std::get_if<SamnTrained>(&outcome.model)) {
        return samn_predict(samn->params, samn->config, samn->state, features)
            .labels;
    }
    if (const auto* cenet = std::get_if<CenetTrained>(&outcome.model)) {
        return cenet_predict(cenet->model, features);
    }
    if (const auto* dnm = std::get_if<DnmsvmTrained>(&outcome.model)) {
        const std::vector<double> pred = dnmsvm_predict(dnm->model, features);
        std::vector<int> out;
        out.reserve(pred.size());
        for (double v : pred) out.push_back(v > 0 ? 1 : 0);
        return out;
    }
    const auto& svc = std::get<SvcTrained>(outcome.model);
    std::vector<int> out;
    out.reserve(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        out.push_back(svm_predict_label(svc.model, features.row(i)) > 0 ? 1 : 0);
    }
    return out;
}

void audit_split(const SplitPlan& split, std::size_t n) {
    std::vector<char> seen(n, 0);
    for (const auto* part : {&split.train, &split.val, &split.test}) {
        for (std::size_t idx : *part) {
            if (idx >= n) throw StateError("split index out of range");
            if (seen[idx]) {
                throw StateError("split partitions overlap at index " +
                                 std::to_string(idx));
            }
            seen[idx] = 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) {
            throw StateError("split misses index " + std::to_string(i));
        }
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const Dataset ds = config.format == "svmlight"
                           ? load_svmlight(config.dataset_path)
                           : load_csv(config.dataset_path, config.label_col);
    return run_experiment(config, ds);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& ds) {
    config.validate();
    ExperimentResult result;
    result.dataset = config.dataset_name.empty() ? ds.name : config.dataset_name;
    result.model = config.model;

    const std::vector<unsigned long> seeds = config.seed_list();
    for (int rep = 0; rep < config.repetitions; ++rep) {
        SplitPlan split = stratified_split(
            ds, seeds[rep], SplitRatios{config.test_ratio, config.val_ratio});
        split.repetition = rep + 1;
        audit_split(split, ds.size());

        const StandardizationParams std_params =
            standardize_fit(rows_of(ds.features, split.train));
        Dataset standardized = ds;
        standardized.features = standardize_apply(std_params, ds.features);

        const TrainOutcome outcome = run_training(config, standardized, split);
        const std::vector<int> pred = predict_labels(
            outcome, rows_of(standardized.features, split.test));
        RepetitionResult rr;
        rr.seed = seeds[rep];
        rr.metrics =
            compute_metrics(pred, labels_of(ds, split.test), ds.class_count());
        rr.best_val_accuracy = outcome.best_val_accuracy;
        rr.best_epoch = outcome.best_epoch;
        rr.split = std::move(split);
        rr.standardization = std_params;
        result.repetitions.push_back(std::move(rr));

        if (!config.out_dir.empty()) {  // partial results survive an abort
            std::filesystem::create_directories(config.out_dir);
            ExperimentResult partial = result;
            std::vector<MetricsEntry> entries;
            for (const auto& r : partial.repetitions) entries.push_back(r.metrics);
            partial.report = aggregate(entries);
            emit_csv(config.out_dir + "/" + result.dataset + "_" + result.model +
                         "_repetitions.csv",
                     {partial});
        }
    }
    std::vector<MetricsEntry> entries;
    for (const auto& r : result.repetitions) entries.push_back(r.metrics);
    result.report = aggregate(entries);

    if (!config.out_dir.empty()) {
        emit_markdown(config.out_dir + "/" + result.dataset + "_" + result.model +
                          "_summary.md",
                      {result});
    }
    return result;
}

std::string format_percent_cell(double mean, double stddev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f±%.2f", mean * 100.0,
                  stddev * 100.0);
    return buf;
}

namespace {

void atomic_write(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write " + tmp);
        out << contents;
        if (!out) throw DataError("failed writing " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw DataError("cannot move " + tmp + " to " + path);
    }
}

}  // namespace

void emit_csv(const std::string& path,
              const std::vector<ExperimentResult>& results) {
    std::string out = "dataset,model,seed,accuracy,precision,recall,f1\n";
    char buf[256];
    for (const ExperimentResult& res : results) {
        for (const RepetitionResult& rep : res.repetitions) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%lu,%.17g,%.17g,%.17g,%.17g\n",
                          res.dataset.c_str(), res.model.c_str(), rep.seed,
                          rep.metrics.accuracy, rep.metrics.precision,
                          rep.metrics.recall, rep.metrics.f1);
            out += buf;
        }
    }
    atomic_write(path, out);
}

void emit_markdown(const std::string& path,
                   const std::vector<ExperimentResult>& results) {
    std::string out =
        "| Dataset | Model | Accuracy | Precision | Recall | F1-score |\n"
        "|---|---|---|---|---|---|\n";
    for (const ExperimentResult& res : results) {
        const MetricsReport& r = res.report;
        out += "| " + res.dataset + " | " + res.model + " | " +
               format_percent_cell(r.mean.accuracy, r.stddev.accuracy) + " | " +
               format_percent_cell(r.mean.precision, r.stddev.precision) + " | " +
               format_percent_cell(r.mean.recall, r.stddev.recall) + " | " +
               format_percent_cell(r.mean.f1, r.stddev.f1) + " |\n";
    }
    atomic_write(path, out);
}

}  // namespace samn
