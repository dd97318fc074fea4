#pragma once

#include <vector>

#include "equiflow/equilibrium.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

struct LossReport {
    double loss = 0.0;
    std::vector<double> gradient;    // per theta component
    std::vector<double> prediction;  // yhat
    double bregman = 0.0;            // 0.5*||ybar - yhat||^2
};

// 0.5*||p - q||^2, the Bregman divergence of the squared Euclidean norm.
double bregman_divergence_euclidean(const std::vector<double>& p, const std::vector<double>& q);

struct EuclideanLossOptions {
    ProjectionOptions projection;
    // Targets with a conservation residual in (1e-9, dust_tol] are projected
    // onto the conservation affine hull first; larger residuals are errors.
    double dust_tol = 1e-6;
};

// Exact Fenchel-Young loss for the Euclidean regularization:
//     loss = [theta'yhat - 0.5||yhat||^2] - [theta'ybar - 0.5||ybar||^2],
//     yhat = euclidean_projection(theta),  gradient = yhat - ybar.
LossReport euclidean_fy_loss(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                             const std::vector<double>& theta, const std::vector<double>& target,
                             const EuclideanLossOptions& opts = {});

struct SandwichReport {
    double bregman = 0.0;
    double loss = 0.0;
    bool ok = false;  // 0 <= bregman <= loss + 1e-7
};

SandwichReport fy_sandwich_check(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                                 const std::vector<double>& theta, const std::vector<double>& target,
                                 const EuclideanLossOptions& opts = {});

// Least-squares correction of a flow vector onto {y : divergence(y) = b};
// used to scrub serialization dust off targets.
std::vector<double> project_to_conservation_hull(const RoadNetwork& net,
                                                 const std::vector<double>& flow,
                                                 const std::vector<Commodity>& commodities);

}  // namespace equiflow
