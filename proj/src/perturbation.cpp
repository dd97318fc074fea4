#include "equiflow/perturbation.hpp"

#include <cmath>

#include "equiflow/common.hpp"
#include "equiflow/kernels.hpp"
#include "equiflow/rng.hpp"

namespace equiflow {

namespace {

// Sample m of an antithetic scheme: pairs (2p, 2p+1) share one draw with
// flipped sign; without antithetic every sample draws fresh.
std::vector<double> gaussian_sample(std::size_t dim, const PerturbationConfig& cfg, int m) {
    const int pair = cfg.antithetic ? m / 2 : m;
    Rng rng(derive_seed(cfg.seed, "perturb-z", static_cast<std::uint64_t>(pair)));
    std::vector<double> z(dim);
    for (double& v : z) v = cfg.epsilon * rng.normal();
    if (cfg.antithetic && (m % 2 == 1))
        for (double& v : z) v = -v;
    return z;
}

}  // namespace

LinearPerturbed perturbed_linear_prediction(const std::vector<double>& theta,
                                            const RoadNetwork& net,
                                            const std::vector<double>& capacities,
                                            const std::vector<Commodity>& commodities,
                                            const PerturbationConfig& cfg, ColumnPool* pool) {
    if (static_cast<int>(theta.size()) != net.num_arcs())
        throw DataError("theta must cover every arc");
    const std::size_t n = theta.size();
    const int total = std::max(1, cfg.samples);
    const bool perturb = cfg.samples > 0;

    std::vector<std::vector<double>> flows(total);
    std::vector<double> values(total, 0.0);

    auto solve_one = [&](std::size_t m, ColumnPool* warm) {
        CostVector costs(n);
        std::vector<double> z;
        if (perturb) z = gaussian_sample(n, cfg, static_cast<int>(m));
        for (std::size_t a = 0; a < n; ++a) costs[a] = -(theta[a] + (perturb ? z[a] : 0.0));
        McmfOptions mo;
        mo.pool = warm;
        McmfSolution sol = linear_min_multiflow(net, costs, capacities, commodities, mo);
        if (sol.status != McmfStatus::optimal)
            throw SolverError("perturbed linear layer: flow problem infeasible");
        values[m] = -sol.objective;  // max-form value (theta+Z)'y
        flows[m] = std::move(sol.aggregated);
    };

    if (cfg.threads > 1 && total > 1) {
        // the shared pool is not thread-safe; samples run with local pools
        parallel_for(static_cast<std::size_t>(total), cfg.threads,
                     [&](std::size_t m) { solve_one(m, nullptr); });
    } else {
        for (int m = 0; m < total; ++m) solve_one(m, pool);
    }

    LinearPerturbed out;
    out.prediction.assign(n, 0.0);
    for (int m = 0; m < total; ++m) kernels::axpy(1.0, flows[m].data(), out.prediction.data(), n);
    kernels::scal(1.0 / total, out.prediction.data(), n);
    out.value_mean = kernels::sum(values.data(), total) / total;
    if (cfg.keep_samples) out.sample_flows = std::move(flows);
    return out;
}

std::vector<double> perturbed_fy_gradient(const std::vector<double>& theta,
                                          const std::vector<double>& target,
                                          const RoadNetwork& net,
                                          const std::vector<double>& capacities,
                                          const std::vector<Commodity>& commodities,
                                          const PerturbationConfig& cfg, ColumnPool* pool) {
    if (target.size() != theta.size()) throw DataError("target/theta dimension mismatch");
    LinearPerturbed p = perturbed_linear_prediction(theta, net, capacities, commodities, cfg, pool);
    std::vector<double> g(theta.size());
    kernels::vsub(p.prediction.data(), target.data(), g.data(), g.size());
    return g;
}

double perturbed_fy_loss_surrogate(const std::vector<double>& theta,
                                   const std::vector<double>& target, const RoadNetwork& net,
                                   const std::vector<double>& capacities,
                                   const std::vector<Commodity>& commodities,
                                   const PerturbationConfig& cfg, ColumnPool* pool) {
    LinearPerturbed p = perturbed_linear_prediction(theta, net, capacities, commodities, cfg, pool);
    return p.value_mean - kernels::dot(theta.data(), target.data(), theta.size());
}

FeatureSpacePoint flow_feature_map(const LatencyParams& shape, const std::vector<double>& flow) {
    FeatureSpacePoint pt;
    pt.degree = shape.degree;
    pt.num_arcs = shape.num_arcs;
    pt.mu.assign(static_cast<std::size_t>(shape.degree) * shape.num_arcs, 0.0);
    for (int k = 0; k < shape.degree; ++k) {
        double* row = pt.mu.data() + static_cast<std::size_t>(k) * shape.num_arcs;
        for (int a = 0; a < shape.num_arcs; ++a) row[a] = std::pow(flow[a], k + 1) / (k + 1);
    }
    return pt;
}

PolynomialPerturbed perturbed_polynomial_prediction(const LatencyParams& params,
                                                    const RoadNetwork& net,
                                                    const std::vector<Commodity>& commodities,
                                                    const PerturbationConfig& cfg,
                                                    const FwOptions& we_opts) {
    params.require_nonnegative();
    const std::size_t dim = params.coef.size();
    const int total = std::max(1, cfg.samples);
    const bool perturb = cfg.samples > 0;

    std::vector<std::vector<double>> flows(total);
    std::vector<double> potentials(total, 0.0);

    auto solve_one = [&](std::size_t m) {
        LatencyParams p = params;
        if (perturb) {
            const std::vector<double> z = gaussian_sample(dim, cfg, static_cast<int>(m));
            for (std::size_t i = 0; i < dim; ++i) p.coef[i] += z[i];
            // clamp at zero: keeps the potential convex and latencies nonnegative
            kernels::clamp_min_zero(p.coef.data(), dim);
        }
        WeSolution we = solve_we(net, commodities, p, we_opts);
        potentials[m] = we.potential;
        flows[m] = std::move(we.flow);
    };

    parallel_for(static_cast<std::size_t>(total), cfg.threads, solve_one);

    PolynomialPerturbed out;
    out.mu.degree = params.degree;
    out.mu.num_arcs = params.num_arcs;
    out.mu.mu.assign(dim, 0.0);
    out.flow.assign(params.num_arcs, 0.0);
    for (int m = 0; m < total; ++m) {
        const FeatureSpacePoint pt = flow_feature_map(params, flows[m]);
        kernels::axpy(1.0, pt.mu.data(), out.mu.mu.data(), dim);
        kernels::axpy(1.0, flows[m].data(), out.flow.data(), params.num_arcs);
    }
    kernels::scal(1.0 / total, out.mu.mu.data(), dim);
    kernels::scal(1.0 / total, out.flow.data(), params.num_arcs);
    out.potential_mean = kernels::sum(potentials.data(), total) / total;
    return out;
}

std::vector<double> perturbed_polynomial_fy_gradient(const LatencyParams& params,
                                                     const std::vector<double>& target,
                                                     const RoadNetwork& net,
                                                     const std::vector<Commodity>& commodities,
                                                     const PerturbationConfig& cfg,
                                                     const FwOptions& we_opts) {
    if (static_cast<int>(target.size()) != params.num_arcs)
        throw DataError("target does not match arc count");
    PolynomialPerturbed p = perturbed_polynomial_prediction(params, net, commodities, cfg, we_opts);
    const FeatureSpacePoint tgt = flow_feature_map(params, target);
    std::vector<double> g(params.coef.size());
    kernels::vsub(p.mu.mu.data(), tgt.mu.data(), g.data(), g.size());
    return g;
}

double perturbed_polynomial_loss_surrogate(const LatencyParams& params,
                                           const std::vector<double>& target,
                                           const RoadNetwork& net,
                                           const std::vector<Commodity>& commodities,
                                           const PerturbationConfig& cfg,
                                           const FwOptions& we_opts) {
    PolynomialPerturbed p = perturbed_polynomial_prediction(params, net, commodities, cfg, we_opts);
    const FeatureSpacePoint tgt = flow_feature_map(params, target);
    return kernels::dot(params.coef.data(), tgt.mu.data(), params.coef.size()) - p.potential_mean;
}

}  // namespace equiflow
