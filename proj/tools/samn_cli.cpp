// Command-line front end: train single models, run full experiments from a
// JSON config, predict from checkpoints and grid-search SVC hyperparameters.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
// divergence.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "samn/checkpoint.hpp"
#include "samn/harness.hpp"

namespace {

using namespace samn;

Dataset load_dataset(const std::string& path, const std::string& format,
                     const std::string& label_col) {
    if (format == "svmlight") return load_svmlight(path);
    if (format == "csv") return load_csv(path, label_col);
    throw ConfigError("unknown dataset format \"" + format + "\"");
}

// Features-only CSV (for predict --input without labels). Header detected as
// in load_csv: any non-numeric cell in line 1.
Matrix load_feature_csv(const std::string& path) {
    Dataset labeled;
    // Reuse the loader by treating the first column as a throwaway label is
    // wrong for pure feature files; parse directly instead.
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::string cell;
        std::stringstream ss(line);
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw DataError(path + ": unparseable cell at line " +
                            std::to_string(line_no));
        }
        first = false;
        if (cols == 0) cols = row.size();
        if (row.size() != cols) {
            throw DataError(path + ": ragged row at line " + std::to_string(line_no));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    return m;
}

void print_metrics(const MetricsEntry& m) {
    std::printf("accuracy  %.4f\nprecision %.4f\nrecall    %.4f\nf1        %.4f\n",
                m.accuracy, m.precision, m.recall, m.f1);
}

int cmd_train(const ExperimentConfig& base, unsigned long seed) {
    ExperimentConfig config = base;
    config.repetitions = 1;
    config.seeds = {seed};
    config.validate();

    const Dataset ds = load_dataset(config.dataset_path, config.format,
                                    config.label_col);
    SplitPlan split = stratified_split(
        ds, seed, SplitRatios{config.test_ratio, config.val_ratio});
    audit_split(split, ds.size());
    const StandardizationParams std_params =
        standardize_fit(gather_rows(ds.features, split.train));
    Dataset standardized = ds;
    standardized.features = standardize_apply(std_params, ds.features);

    const TrainOutcome outcome = run_training(config, standardized, split);
    const std::vector<int> pred =
        predict_labels(outcome, gather_rows(standardized.features, split.test));
    std::vector<int> truth;
    for (std::size_t i : split.test) truth.push_back(ds.labels[i]);
    const MetricsEntry metrics = compute_metrics(pred, truth, ds.class_count());

    std::printf("dataset   %s (N=%zu, n=%zu, C=%d)\n", ds.name.c_str(), ds.size(),
                ds.feature_count(), ds.class_count());
    std::printf("model     %s  seed %lu\n", config.model.c_str(), seed);
    if (config.model != "svc") {
        std::printf("best validation accuracy %.4f at epoch %d\n",
                    outcome.best_val_accuracy, outcome.best_epoch);
    } else {
        const auto& svc = std::get<SvcTrained>(outcome.model);
        std::printf("grid search: gamma %.6g, C %.6g, CV accuracy %.4f\n",
                    svc.search.gamma, svc.search.c_box, svc.search.cv_accuracy);
    }
    print_metrics(metrics);

    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        const std::string stem =
            config.out_dir + "/" + ds.name + "_" + config.model + "_seed" +
            std::to_string(seed);
        if (const auto* samn = std::get_if<SamnTrained>(&outcome.model)) {
            SamnCheckpoint ckpt{samn->config, samn->params, samn->state,
                                std_params, ds.label_names, ds.name};
            save_checkpoint(stem + ".ckpt.json", ckpt);
            std::printf("checkpoint written to %s.ckpt.json\n", stem.c_str());
        } else if (const auto* svc = std::get_if<SvcTrained>(&outcome.model)) {
            SvmCheckpoint ckpt{svc->model, std_params, ds.label_names, ds.name};
            save_checkpoint(stem + ".ckpt.json", ckpt);
            std::printf("checkpoint written to %s.ckpt.json\n", stem.c_str());
        }
        ExperimentResult res;
        res.dataset = ds.name;
        res.model = config.model;
        RepetitionResult rep;
        rep.seed = seed;
        rep.metrics = metrics;
        rep.best_val_accuracy = outcome.best_val_accuracy;
        rep.best_epoch = outcome.best_epoch;
        res.repetitions.push_back(rep);
        res.report = aggregate({metrics});
        emit_csv(stem + "_metrics.csv", {res});
        std::printf("metrics written to %s_metrics.csv\n", stem.c_str());
    }
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_override) {
    ExperimentConfig config = config_from_json_file(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    apply_seed_env_override(config);
    const ExperimentResult result = run_experiment(config);
    std::printf("%s / %s over %zu repetitions\n", result.dataset.c_str(),
                result.model.c_str(), result.repetitions.size());
    std::printf("accuracy  %s\n",
                format_percent_cell(result.report.mean.accuracy,
                                    result.report.stddev.accuracy)
                    .c_str());
    std::printf("precision %s\n",
                format_percent_cell(result.report.mean.precision,
                                    result.report.stddev.precision)
                    .c_str());
    std::printf("recall    %s\n",
                format_percent_cell(result.report.mean.recall,
                                    result.report.stddev.recall)
                    .c_str());
    std::printf("f1        %s\n",
                format_percent_cell(result.report.mean.f1, result.report.stddev.f1)
                    .c_str());
    if (!config.out_dir.empty()) {
        std::printf("tables written to %s/\n", config.out_dir.c_str());
    }
    return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& input,
                const std::string& format, const std::string& label_col) {
    const std::string kind = checkpoint_kind(ckpt_path);

    Matrix features;
    std::vector<int> truth;
    std::vector<std::string> truth_names;
    if (format == "svmlight" || !label_col.empty()) {
        const Dataset ds = load_dataset(input, format, label_col);
        features = ds.features;
        truth = ds.labels;
        truth_names = ds.label_names;
    } else {
        features = load_feature_csv(input);
    }

    std::vector<std::string> predicted;
    std::vector<int> predicted_ids;
    std::vector<std::string> label_names;
    if (kind == "samn") {
        const SamnCheckpoint ckpt = load_samn_checkpoint(ckpt_path);
        label_names = ckpt.label_names;
        const Matrix x = standardize_apply(ckpt.standardization, features);
        const Prediction pred =
            samn_predict(ckpt.params, ckpt.config, ckpt.state, x);
        predicted_ids = pred.labels;
    } else if (kind == "svm") {
        const SvmCheckpoint ckpt = load_svm_checkpoint(ckpt_path);
        label_names = ckpt.label_names;
        const Matrix x = standardize_apply(ckpt.standardization, features);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            predicted_ids.push_back(
                svm_predict_label(ckpt.model, x.row(i)) > 0 ? 1 : 0);
        }
    } else {
        throw DataError(ckpt_path + ": unsupported checkpoint kind \"" + kind +
                        "\"");
    }
    for (int id : predicted_ids) {
        predicted.push_back(id >= 0 && id < static_cast<int>(label_names.size())
                                ? label_names[id]
                                : std::to_string(id));
    }
    for (const std::string& p : predicted) std::printf("%s\n", p.c_str());

    if (!truth.empty()) {
        // map truth ids (input file encoding) onto checkpoint label names
        std::size_t hits = 0, known = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const std::string& name = truth_names[truth[i]];
            ++known;
            hits += name == predicted[i] ? 1 : 0;
        }
        std::fprintf(stderr, "accuracy %.4f over %zu labeled rows\n",
                     known ? static_cast<double>(hits) / known : 0.0, known);
    }
    return 0;
}

int cmd_gridsearch(const std::string& dataset, const std::string& format,
                   const std::string& label_col, int folds, unsigned long seed,
                   const std::vector<double>& gammas, const std::vector<double>& cs,
                   double tol) {
    const Dataset ds = load_dataset(dataset, format, label_col);
    if (ds.class_count() != 2) {
        throw DataError("gridsearch requires a binary dataset; " + ds.name +
                        " has " + std::to_string(ds.class_count()) + " classes");
    }
    const StandardizationParams std_params = standardize_fit(ds.features);
    const Matrix x = standardize_apply(std_params, ds.features);
    std::vector<double> y;
    for (int l : ds.labels) y.push_back(l == 1 ? 1.0 : -1.0);
    const GridSearchResult best = grid_search_cv(
        x, y, gammas.empty() ? default_gamma_grid() : gammas,
        cs.empty() ? default_c_grid() : cs, folds, seed, KernelKind::Rbf, tol);
    std::printf("best gamma %.10g\nbest C     %.10g\nCV accuracy %.4f (%d folds)\n",
                best.gamma, best.c_box, best.cv_accuracy, best.folds_used);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample-attention prototype classifier and baselines"};
    app.require_subcommand(1);

    samn::ExperimentConfig base;
    unsigned long seed = 1;

    CLI::App* train = app.add_subcommand("train", "Train one model on one split");
    train->add_option("--dataset", base.dataset_path, "Dataset file")->required();
    train->add_option("--format", base.format, "csv or svmlight");
    train->add_option("--label-col", base.label_col,
                      "CSV label column (name or 0-based index)");
    train->add_option("--model", base.model,
                      "samn | san | mbn | cenet | dnmsvm | svc");
    train->add_option("--epochs", base.epochs, "Training epochs");
    train->add_option("--lr", base.lr, "Learning rate");
    train->add_option("--batch-size", base.batch_size, "Batch size");
    train->add_option("--seed", seed, "Split/init seed");
    train->add_option("--out", base.out_dir, "Output directory");
    train->add_option("--layers", base.layers, "Weight layers (K)");
    train->add_option("--blocknum", base.blocknum, "Attention blocks");
    train->add_option("--hidden-width", base.hidden_width,
                      "Hidden width (0 = input dimension)");
    train->add_option("--activation", base.activation, "relu | sigmoid | tanh");
    train->add_option("--test-ratio", base.test_ratio, "Test fraction");
    train->add_option("--val-ratio", base.val_ratio,
                      "Validation fraction of the training portion");
    train->add_option("--cv-folds", base.cv_folds, "Grid-search folds (svc)");
    train->add_option("--svm-tol", base.svm_tol, "SMO stopping tolerance (svc)");

    std::string config_path, out_override;
    CLI::App* experiment =
        app.add_subcommand("experiment", "Run a multi-repetition experiment");
    experiment->add_option("--config", config_path, "JSON experiment config")
        ->required();
    experiment->add_option("--out", out_override,
                           "Override the config's output directory");

    std::string ckpt_path, input_path, pred_format = "csv", pred_label;
    CLI::App* predict =
        app.add_subcommand("predict", "Predict labels from a checkpoint");
    predict->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    predict->add_option("--input", input_path, "Input file")->required();
    predict->add_option("--format", pred_format, "csv or svmlight");
    predict->add_option("--label-col", pred_label,
                        "Label column if the input carries labels "
                        "(prints accuracy to stderr)");

    std::string gs_dataset, gs_format = "csv", gs_label = "label";
    int gs_folds = 5;
    unsigned long gs_seed = 1;
    double gs_tol = 1e-3;
    std::vector<double> gs_gammas, gs_cs;
    CLI::App* gridsearch = app.add_subcommand(
        "gridsearch", "Cross-validated (gamma, C) search for the rbf SVC");
    gridsearch->add_option("--dataset", gs_dataset, "Dataset file")->required();
    gridsearch->add_option("--format", gs_format, "csv or svmlight");
    gridsearch->add_option("--label-col", gs_label, "CSV label column");
    gridsearch->add_option("--folds", gs_folds, "Cross-validation folds");
    gridsearch->add_option("--seed", gs_seed, "Fold shuffle seed");
    gridsearch->add_option("--gamma-grid", gs_gammas,
                           "Gamma candidates (default: paper grid)");
    gridsearch->add_option("--c-grid", gs_cs, "C candidates (default: paper grid)");
    gridsearch->add_option("--svm-tol", gs_tol, "SMO stopping tolerance");

    try {
        app.parse(argc, argv);
        if (*train) return cmd_train(base, seed);
        if (*experiment) return cmd_experiment(config_path, out_override);
        if (*predict) return cmd_predict(ckpt_path, input_path, pred_format,
                                         pred_label);
        if (*gridsearch) {
            return cmd_gridsearch(gs_dataset, gs_format, gs_label, gs_folds,
                                  gs_seed, gs_gammas, gs_cs, gs_tol);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const samn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const samn::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
