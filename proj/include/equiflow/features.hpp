#pragma once

#include <string>
#include <vector>

#include "equiflow/instance.hpp"

namespace equiflow {

struct FeatureConfig {
    bool time_features = false;    // time-expanded instances
    bool capacity_index = false;   // capacity-expanded (extended) networks
    bool zscore = false;           // standardize as (x-mean)/std instead of x/mean
};

// Row-major n x d matrix of per-arc context features.
struct FeatureMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
};

std::vector<std::string> feature_names(const FeatureConfig& cfg);

// Raw (unstandardized) features for the base network's arcs, measured from
// arc midpoints: neighborhood counts of home/work locations, nodes, arcs and
// high-capacity arcs at radii maxdist/{1,2,5,10,15}, the arc attributes, and
// endpoint degree counts.
FeatureMatrix base_arc_features(const Instance& inst);

// Features for one (arc, epoch, copy) context row; used by the expansion-aware
// extractors in the training module.
struct TimeContext {
    int epoch = 0;
    int total_epochs = 1;
    double epoch_duration = 180.0;
    int morning_epoch = 0;
    int evening_epoch = 0;
};

void append_time_features(std::vector<double>& row, const TimeContext& ctx);

// Per-feature standardization statistics, fitted on the training split.
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

FeatureStats fit_feature_stats(const std::vector<FeatureMatrix>& mats);

// Divide-by-mean standardization (z-score behind cfg.zscore); features whose
// mean is within 1e-8 of zero pass through unscaled.
void standardize(FeatureMatrix& mat, const FeatureStats& stats, const FeatureConfig& cfg);

}  // namespace equiflow
