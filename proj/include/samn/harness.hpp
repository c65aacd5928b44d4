// Experiment orchestration: the shared training scheme (Adam over
// class-grouped batches with per-epoch validation snapshots), five-repetition
// aggregation and result tables.
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "samn/dataio.hpp"
#include "samn/metrics.hpp"
#include "samn/model.hpp"
#include "samn/nets.hpp"
#include "samn/svm.hpp"

namespace samn {

struct ExperimentConfig {
    std::string dataset_path;
    std::string format = "csv";  // csv | svmlight
    std::string label_col = "label";
    std::string dataset_name;  // defaults to the loaded dataset's name
    std::string model = "samn";  // samn | san | mbn | cenet | dnmsvm | svc

    int epochs = 1000;
    double lr = 0.01;
    int batch_size = 64;
    int repetitions = 5;
    double test_ratio = 0.2;
    double val_ratio = 0.2;
    std::vector<unsigned long> seeds;  // empty -> 1..repetitions
    std::string out_dir;               // empty -> no files written

    // network structure (paper scheme: 3 weight layers, width = input
    // dimension; cenet/dnmsvm use layers-1 hidden layers plus their head)
    int layers = 3;
    int blocknum = 1;
    std::size_t hidden_width = 0;  // 0 -> input dimension
    std::string activation = "tanh";
    bool learned_projections = false;

    // svc
    int cv_folds = 5;
    double svm_tol = 1e-3;
    std::vector<double> gamma_grid;  // empty -> paper defaults
    std::vector<double> c_grid;

    // dnmsvm penalty candidates, selected on the validation split
    std::vector<double> dnmsvm_penalties = {0.1, 1.0, 10.0};

    void validate() const;
    std::vector<unsigned long> seed_list() const;
};

ExperimentConfig config_from_json_file(const std::string& path);

// Comma-separated SAMN_SEEDS overrides the configured seed list (CLI hook).
void apply_seed_env_override(ExperimentConfig& config);

struct SamnTrained {
    SamnConfig config;
    SamnParams params;
    PrototypeState state;
};
struct CenetTrained {
    CenetModel model;
};
struct DnmsvmTrained {
    DnmsvmModel model;
};
struct SvcTrained {
    SvmModel model;
    GridSearchResult search;
    std::vector<double> alpha_full;
    double dual_objective = 0.0;
};

struct TrainOutcome {
    std::variant<SamnTrained, CenetTrained, DnmsvmTrained, SvcTrained> model;
    double best_val_accuracy = 0.0;
    int best_epoch = 0;                // 1-based; 0 for svc
    std::vector<double> loss_history;  // mean batch loss per epoch
    std::vector<double> val_history;   // validation accuracy per epoch
};

// Trains one model on an already-standardized dataset. Network models run the
// Adam loop with per-epoch validation and keep the best snapshot; svc runs
// grid search + SMO on train+val. Divergence raises NumericError naming the
// epoch.
TrainOutcome run_training(const ExperimentConfig& config, const Dataset& ds,
                          const SplitPlan& split);

std::vector<int> predict_labels(const TrainOutcome& outcome,
                                const Matrix& features);

struct RepetitionResult {
    unsigned long seed = 0;
    MetricsEntry metrics;
    double best_val_accuracy = 0.0;
    int best_epoch = 0;
    SplitPlan split;
    StandardizationParams standardization;
};

struct ExperimentResult {
    std::string dataset;
    std::string model;
    std::vector<RepetitionResult> repetitions;
    MetricsReport report;
};

// Full protocol per repetition seed: stratified split, train-only
// standardization fit, training, test evaluation. Emits per-repetition CSV
// rows after every repetition (so partial results survive an abort) plus a
// Markdown summary when out_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& ds);

// Throws if the partitions overlap or fail to cover {0..N-1}.
void audit_split(const SplitPlan& split, std::size_t n);

// "92.82±3.40" from fractional mean/std.
std::string format_percent_cell(double mean, double stddev);

void emit_csv(const std::string& path, const std::vector<ExperimentResult>& results);
void emit_markdown(const std::string& path,
                   const std::vector<ExperimentResult>& results);

}  // namespace samn
