#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "equiflow/features.hpp"
#include "equiflow/instance.hpp"
#include "equiflow/mlp.hpp"
#include "equiflow/perturbation.hpp"
#include "equiflow/scenarios.hpp"

namespace equiflow {

enum class Pipeline { fnn_baseline, cl, pl, er };

Pipeline parse_pipeline(const std::string& s);
std::string to_string(Pipeline p);

struct TrainConfig {
    Pipeline pipeline = Pipeline::cl;
    std::string optimizer = "adam";  // adam | sgd
    double lr = 1e-3;
    int batch_size = 1;     // instances per optimizer step
    int max_epochs = 50;
    double max_wall_clock_s = 1800.0;
    int patience = 0;       // early stopping on validation MAE; 0 = off
    PerturbationConfig perturb;   // training-time sampling (samples=0: unperturbed)
    int inference_samples = -1;   // M for validation/prediction; -1: same as training
    int copies = 1;               // extended-network copies for CL
    double we_tol = 1e-4;         // relative gap for PL layer solves
    int we_max_iter = 5000;
    std::uint64_t seed = 0;
    int threads = 1;
    bool zscore = false;
};

// A trained model plus everything needed to run it on fresh instances.
struct ModelBundle {
    Pipeline pipeline = Pipeline::fnn_baseline;
    MlpModel model;
    FeatureConfig feature_config;
    FeatureStats stats;
    int copies = 1;
    PerturbationConfig inference;  // sample count/epsilon used at prediction time
    double we_tol = 1e-4;
    int we_max_iter = 5000;
    double best_val_mae = 0.0;
};

struct TrainLogRow {
    int epoch = 0;
    int step = 0;
    double loss_surrogate = 0.0;
    double val_mae = 0.0;
    double wall_clock_s = 0.0;
};

struct TrainResult {
    ModelBundle bundle;
    std::vector<TrainLogRow> log;
    int skipped_steps = 0;
};

struct PredictResult {
    std::vector<double> report;      // report-space flow (arcs, or arcs x epochs)
    std::vector<double> solve_flow;  // layer output on the solve graph (empty for the baseline)
};

// Supervised baseline: the MLP imitates target flows directly (MSE), best
// validation-MAE checkpoint returned.
TrainResult train_baseline(const Dataset& ds, const TrainConfig& cfg);

// Fenchel-Young pipeline training (CL, PL or ER layer).
TrainResult train_pipeline(const Dataset& ds, const TrainConfig& cfg);

// Dispatches on cfg.pipeline.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

PredictResult predict(const ModelBundle& bundle, const Instance& inst, std::uint64_t seed,
                      int threads = 1);

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b);

struct EvalRecord {
    int index = 0;
    double mae = 0.0;
    double conservation_residual = -1.0;  // -1 when not applicable (time-variant baseline)
    double capacity_excess = 0.0;
    double wall_clock_s = 0.0;
};

// Predicts every instance in `idx` and scores it against the dataset target.
std::vector<EvalRecord> evaluate_split(const ModelBundle& bundle, const Dataset& ds,
                                       const std::vector<int>& idx, std::uint64_t seed,
                                       int threads = 1);

void save_checkpoint(const ModelBundle& bundle, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

void save_train_log(const std::vector<TrainLogRow>& log, const std::string& path);

}  // namespace equiflow
