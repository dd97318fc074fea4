#pragma once

#include <vector>

#include "equiflow/graph.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

// Coefficients of per-arc monomial latency functions
//     ell_a(y) = sum_k theta[k][a] * y^k,   k = 0..K-1,
// stored as a K x |A| row-major matrix. The induced separable potential is
//     Phi(y) = sum_a sum_k theta[k][a] * y_a^(k+1) / (k+1),
// so ell_a = dPhi/dy_a. Nonnegative coefficients make Phi convex.
struct LatencyParams {
    int degree = 2;  // K
    int num_arcs = 0;
    std::vector<double> coef;  // degree * num_arcs

    LatencyParams() = default;
    LatencyParams(int k, int arcs) : degree(k), num_arcs(arcs), coef(static_cast<std::size_t>(k) * arcs, 0.0) {}

    double& at(int k, int a) { return coef[static_cast<std::size_t>(k) * num_arcs + a]; }
    double at(int k, int a) const { return coef[static_cast<std::size_t>(k) * num_arcs + a]; }
    const double* row(int k) const { return coef.data() + static_cast<std::size_t>(k) * num_arcs; }
    double* row(int k) { return coef.data() + static_cast<std::size_t>(k) * num_arcs; }

    void require_nonnegative() const;
};

// Convenience constructor for affine latencies ell = t0 + t1*y.
LatencyParams affine_latency_params(std::vector<double> theta0, std::vector<double> theta1);

// ell(y), per arc.
CostVector latencies(const LatencyParams& params, const std::vector<double>& flow);
double potential_value(const LatencyParams& params, const std::vector<double>& flow);

struct WeSolution {
    std::vector<double> flow;  // aggregated, per arc
    double gap = 0.0;          // variational certificate at the returned iterate
    int iterations = 0;
    double potential = 0.0;
    bool converged = false;
};

struct FwOptions {
    double tol = 1e-5;       // relative duality-gap stop
    double abs_tol = 0.0;    // additional absolute-gap stop when > 0
    int max_iter = 20000;
    // Away steps give linear convergence on strongly convex quadratics and
    // are used where very tight gaps are required (oracle targets).
    bool away_steps = false;
};

// Wardrop equilibrium as the minimizer of the potential over the aggregated
// flow polytope, by Frank-Wolfe with exact line search for K <= 2 (2/(k+2)
// steps otherwise). Returns the best-gap iterate, not the last one.
WeSolution solve_we(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                    const LatencyParams& params, const FwOptions& opts = {});

// Variational-inequality residual sum_j [ell(ybar)' y_j - D_j * sp_j(ell(ybar))]
// for an aggregated flow; nonnegative, zero exactly at a WE.
double equilibrium_gap(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                       const LatencyParams& params, const std::vector<double>& aggregated);
double equilibrium_gap_multiflow(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                                 const LatencyParams& params, const MultiFlow& mf);

struct ProjectionOptions {
    double tol = 1e-7;  // absolute Frank-Wolfe gap stop
    int max_iter = 50000;
    bool away_steps = true;
    int real_arcs = -1;  // regularize only the first `real_arcs` coordinates (-1: all)
};

// argmax_{y in Ybar} theta'y - 0.5*||y||^2, i.e. the orthogonal projection of
// theta onto the aggregated flow polytope. LMO costs y - theta may be
// negative, so pricing falls back to bellman_ford; negative-cost cycles are a
// hard error (use acyclic or parallel-arc topologies).
std::vector<double> euclidean_projection(const RoadNetwork& net,
                                         const std::vector<Commodity>& commodities,
                                         const std::vector<double>& theta,
                                         const ProjectionOptions& opts = {});

}  // namespace equiflow
