#pragma once

#include <cstdint>
#include <vector>

#include "equiflow/equilibrium.hpp"
#include "equiflow/mcmf.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

struct PerturbationConfig {
    int samples = 16;        // M; 0 = a single unperturbed solve
    double epsilon = 1.0;    // Z ~ epsilon * standard normal
    std::uint64_t seed = 0;
    bool antithetic = true;  // (Z, -Z) pairs
    int threads = 1;
    bool keep_samples = false;  // retain per-sample vertices in the result
};

// Monte-Carlo smoothing of the capacitated linear layer:
//     yhat(theta) = E[argmax_{y in Ybar_u} (theta + Z)' y],
// estimated by averaging LP vertices of min -(theta+Z)'y over the samples.
struct LinearPerturbed {
    std::vector<double> prediction;               // yhat, per arc
    double value_mean = 0.0;                      // Fhat = mean of sample max-values
    std::vector<std::vector<double>> sample_flows;  // filled when keep_samples
};

LinearPerturbed perturbed_linear_prediction(const std::vector<double>& theta,
                                            const RoadNetwork& net,
                                            const std::vector<double>& capacities,
                                            const std::vector<Commodity>& commodities,
                                            const PerturbationConfig& cfg,
                                            ColumnPool* pool = nullptr);

// grad_theta L = yhat(theta) - ybar (unbiased MC estimate).
std::vector<double> perturbed_fy_gradient(const std::vector<double>& theta,
                                          const std::vector<double>& target,
                                          const RoadNetwork& net,
                                          const std::vector<double>& capacities,
                                          const std::vector<Commodity>& commodities,
                                          const PerturbationConfig& cfg,
                                          ColumnPool* pool = nullptr);

// Fhat(theta) - theta'ybar: equals the Fenchel-Young loss up to the
// theta-independent (intractable) constant Omega(ybar).
double perturbed_fy_loss_surrogate(const std::vector<double>& theta,
                                   const std::vector<double>& target, const RoadNetwork& net,
                                   const std::vector<double>& capacities,
                                   const std::vector<Commodity>& commodities,
                                   const PerturbationConfig& cfg, ColumnPool* pool = nullptr);

// Feature-space image of a flow under the potential basis: the point
// mu[k][a] = y_a^(k+1)/(k+1), or a convex combination of such images.
struct FeatureSpacePoint {
    int degree = 0;
    int num_arcs = 0;
    std::vector<double> mu;  // degree x num_arcs, row-major

    double at(int k, int a) const { return mu[static_cast<std::size_t>(k) * num_arcs + a]; }
};

FeatureSpacePoint flow_feature_map(const LatencyParams& shape, const std::vector<double>& flow);

struct PolynomialPerturbed {
    FeatureSpacePoint mu;         // muhat, averaged over samples
    std::vector<double> flow;     // yhat = averaged WE flows
    double potential_mean = 0.0;  // mean of theta_m' sigma(y_m)
};

// Per sample the coefficients are perturbed (and clamped at zero to keep the
// potential convex), the WE is solved, and the feature images are averaged.
// samples == 0 means one unperturbed WE solve.
PolynomialPerturbed perturbed_polynomial_prediction(const LatencyParams& params,
                                                    const RoadNetwork& net,
                                                    const std::vector<Commodity>& commodities,
                                                    const PerturbationConfig& cfg,
                                                    const FwOptions& we_opts = {});

// muhat - sigma(ybar), flattened degree x |A|.
std::vector<double> perturbed_polynomial_fy_gradient(const LatencyParams& params,
                                                     const std::vector<double>& target,
                                                     const RoadNetwork& net,
                                                     const std::vector<Commodity>& commodities,
                                                     const PerturbationConfig& cfg,
                                                     const FwOptions& we_opts = {});

double perturbed_polynomial_loss_surrogate(const LatencyParams& params,
                                           const std::vector<double>& target,
                                           const RoadNetwork& net,
                                           const std::vector<Commodity>& commodities,
                                           const PerturbationConfig& cfg,
                                           const FwOptions& we_opts = {});

}  // namespace equiflow
