#pragma once

#include <cstdint>
#include <vector>

#include "equiflow/features.hpp"

namespace equiflow {

enum class Head { linear, softplus, neg_softplus };

const char* to_string(Head h);
Head parse_head(const std::string& s);

// One shared MLP applied per arc (weights shared across arcs). Branches are
// independent stacks over the same input, one per latency coefficient row.
struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden = {100, 500, 100, 10, 5};
    Head head = Head::linear;
    int branches = 1;
};

struct MlpModel {
    MlpSpec spec;
    std::vector<double> params;  // all branches concatenated, W row-major then b per layer

    struct Slice {
        int w_off = 0;
        int b_off = 0;
        int in = 0;
        int out = 0;
    };
    std::vector<std::vector<Slice>> layout;  // [branch][layer]

    static MlpModel create(const MlpSpec& spec, std::uint64_t seed);
    int num_params() const { return static_cast<int>(params.size()); }
};

struct ForwardCache {
    int rows = 0;
    // [branch][layer]: rows x out, row-major; pre-activations and activations
    std::vector<std::vector<std::vector<double>>> pre;
    std::vector<std::vector<std::vector<double>>> act;
};

// Outputs, branch-major: out[k * rows + i] = head(z) of branch k on row i.
std::vector<double> mlp_forward(const MlpModel& model, const FeatureMatrix& X,
                                ForwardCache* cache = nullptr);

// Parameter gradient for upstream dL/d(output), branch-major like the
// forward outputs. The cache must come from the matching forward pass.
std::vector<double> mlp_backward(const MlpModel& model, const FeatureMatrix& X,
                                 const ForwardCache& cache, const std::vector<double>& upstream);

struct AdamState {
    std::vector<double> m, v;
    int t = 0;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
void sgd_step(std::vector<double>& params, const std::vector<double>& grad, double lr);

double softplus(double x);

}  // namespace equiflow
