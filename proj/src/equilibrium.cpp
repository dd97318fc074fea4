#include "equiflow/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "equiflow/common.hpp"
#include "equiflow/kernels.hpp"

namespace equiflow {

void LatencyParams::require_nonnegative() const {
    for (double v : coef)
        if (v < 0.0) throw SolverError("latency coefficients must be nonnegative for WE solving");
}

LatencyParams affine_latency_params(std::vector<double> theta0, std::vector<double> theta1) {
    if (theta0.size() != theta1.size()) throw DataError("coefficient rows disagree on arc count");
    LatencyParams p(2, static_cast<int>(theta0.size()));
    std::copy(theta0.begin(), theta0.end(), p.row(0));
    std::copy(theta1.begin(), theta1.end(), p.row(1));
    return p;
}

CostVector latencies(const LatencyParams& params, const std::vector<double>& flow) {
    if (static_cast<int>(flow.size()) != params.num_arcs)
        throw DataError("flow length does not match latency parameters");
    const int n = params.num_arcs;
    CostVector out(n, 0.0);
    if (params.degree >= 1) std::copy(params.row(0), params.row(0) + n, out.begin());
    if (params.degree == 2) {
        kernels::affine_latency(params.row(0), params.row(1), flow.data(), out.data(), n);
        return out;
    }
    for (int k = 1; k < params.degree; ++k) {
        const double* row = params.row(k);
        for (int a = 0; a < n; ++a) out[a] += row[a] * std::pow(flow[a], k);
    }
    return out;
}

double potential_value(const LatencyParams& params, const std::vector<double>& flow) {
    if (static_cast<int>(flow.size()) != params.num_arcs)
        throw DataError("flow length does not match latency parameters");
    const int n = params.num_arcs;
    if (params.degree == 2)
        return kernels::quad_potential(params.row(0), params.row(1), flow.data(), n);
    double acc = 0.0;
    for (int k = 0; k < params.degree; ++k) {
        const double* row = params.row(k);
        for (int a = 0; a < n; ++a) acc += row[a] * std::pow(flow[a], k + 1) / (k + 1);
    }
    return acc;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AonResult {
    std::vector<double> flow;
    double total_sp_cost = 0.0;  // sum_j D_j * dist_j
};

// All-or-nothing assignment: one shortest-path tree per distinct origin.
AonResult all_or_nothing(const RoadNetwork& net, const CostVector& costs,
                         const std::vector<Commodity>& commodities) {
    AonResult res;
    res.flow.assign(net.num_arcs(), 0.0);
    bool negative = false;
    for (double c : costs)
        if (c < 0.0) {
            negative = true;
            break;
        }
    std::map<int, ShortestPathTree> trees;
    for (const Commodity& c : commodities) {
        auto it = trees.find(c.origin);
        if (it == trees.end()) {
            ShortestPathTree t =
                negative ? bellman_ford(net, costs, c.origin) : dijkstra(net, costs, c.origin);
            it = trees.emplace(c.origin, std::move(t)).first;
        }
        const ShortestPathTree& tree = it->second;
        if (tree.dist[c.destination] == kInf)
            throw SolverError("commodity destination unreachable from its origin");
        for (int a : extract_path(tree, net, c.origin, c.destination)) res.flow[a] += c.demand;
        res.total_sp_cost += c.demand * tree.dist[c.destination];
    }
    return res;
}

// Exact minimizer of the quadratic potential along y + gamma*d, gamma in
// [0, gamma_max]. `slope` is ell(y)'d (< 0 for descent directions) and
// `curv` is sum_a theta1_a d_a^2.
double quadratic_step(double slope, double curv, double gamma_max) {
    if (curv <= 0.0) return slope < 0.0 ? gamma_max : 0.0;
    return std::clamp(-slope / curv, 0.0, gamma_max);
}

struct AtomSet {
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;

    int find(const std::vector<double>& v) const {
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (atoms[i] == v) return static_cast<int>(i);
        return -1;
    }
    void prune() {
        for (std::size_t i = atoms.size(); i-- > 0;) {
            if (weights[i] <= 1e-12) {
                atoms[i] = std::move(atoms.back());
                weights[i] = weights.back();
                atoms.pop_back();
                weights.pop_back();
            }
        }
        double total = 0.0;
        for (double w : weights) total += w;
        if (total > 0.0)
            for (double& w : weights) w /= total;
    }
    std::vector<double> combine(std::size_t n) const {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < atoms.size(); ++i)
            kernels::axpy(weights[i], atoms[i].data(), y.data(), n);
        return y;
    }
};

}  // namespace

WeSolution solve_we(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                    const LatencyParams& params, const FwOptions& opts) {
    params.require_nonnegative();
    validate_commodities(net, commodities);
    if (params.num_arcs != net.num_arcs()) throw DataError("latency parameters do not cover the network");
    const int n = net.num_arcs();
    const bool quadratic = params.degree <= 2;

    // start from all-or-nothing under free-flow latencies ell(0)
    std::vector<double> zero(n, 0.0);
    AonResult init = all_or_nothing(net, latencies(params, zero), commodities);

    WeSolution best;
    best.flow = init.flow;
    best.gap = kInf;

    std::vector<double> y = std::move(init.flow);
    AtomSet atoms;
    if (opts.away_steps) {
        atoms.atoms.push_back(y);
        atoms.weights.push_back(1.0);
    }

    std::vector<double> d(n);
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const CostVector ell = latencies(params, y);
        AonResult aon = all_or_nothing(net, ell, commodities);
        const double ell_dot_y = kernels::dot(ell.data(), y.data(), n);
        const double gap = ell_dot_y - aon.total_sp_cost;

        if (gap < best.gap) {
            best.gap = gap;
            best.flow = y;
        }
        const double phi = potential_value(params, y);
        if (gap <= opts.tol * std::max(1.0, std::abs(phi)) ||
            (opts.abs_tol > 0.0 && gap <= opts.abs_tol)) {
            best.converged = true;
            ++it;
            break;
        }

        bool away = false;
        int away_idx = -1;
        double gamma_max = 1.0;
        if (opts.away_steps && quadratic && atoms.atoms.size() > 1) {
            double worst = -kInf;
            for (std::size_t i = 0; i < atoms.atoms.size(); ++i) {
                const double v = kernels::dot(ell.data(), atoms.atoms[i].data(), n);
                if (v > worst) {
                    worst = v;
                    away_idx = static_cast<int>(i);
                }
            }
            const double gap_away = worst - ell_dot_y;
            if (gap_away > gap && atoms.weights[away_idx] < 1.0) {
                away = true;
                gamma_max = atoms.weights[away_idx] / (1.0 - atoms.weights[away_idx]);
            }
        }

        if (away) {
            kernels::vsub(y.data(), atoms.atoms[away_idx].data(), d.data(), n);
        } else {
            kernels::vsub(aon.flow.data(), y.data(), d.data(), n);
        }

        double gamma;
        if (quadratic) {
            const double slope = kernels::dot(ell.data(), d.data(), n);
            double curv = 0.0;
            if (params.degree == 2) {
                const double* t1 = params.row(1);
                for (int a = 0; a < n; ++a) curv += t1[a] * d[a] * d[a];
            }
            gamma = quadratic_step(slope, curv, gamma_max);
        } else {
            gamma = 2.0 / (it + 2.0);
        }
        if (gamma <= 0.0 && !away) break;  // stalled at a vertex face

        kernels::axpy(gamma, d.data(), y.data(), n);
        kernels::clamp_min_zero(y.data(), n);

        if (opts.away_steps) {
            if (away) {
                for (double& w : atoms.weights) w *= (1.0 + gamma);
                atoms.weights[away_idx] -= gamma;
                if (atoms.weights[away_idx] <= 1e-12) atoms.prune();
            } else if (gamma >= 1.0) {
                atoms.atoms.assign(1, aon.flow);
                atoms.weights.assign(1, 1.0);
            } else {
                for (double& w : atoms.weights) w *= (1.0 - gamma);
                const int idx = atoms.find(aon.flow);
                if (idx >= 0)
                    atoms.weights[idx] += gamma;
                else {
                    atoms.atoms.push_back(aon.flow);
                    atoms.weights.push_back(gamma);
                }
            }
            if ((it + 1) % 256 == 0) {
                atoms.prune();
                y = atoms.combine(n);  // resync against drift
            }
        }
    }

    best.iterations = it;
    best.potential = potential_value(params, best.flow);
    return best;
}

double equilibrium_gap(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                       const LatencyParams& params, const std::vector<double>& aggregated) {
    const CostVector ell = latencies(params, aggregated);
    const AonResult aon = all_or_nothing(net, ell, commodities);
    return kernels::dot(ell.data(), aggregated.data(), aggregated.size()) - aon.total_sp_cost;
}

double equilibrium_gap_multiflow(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                                 const LatencyParams& params, const MultiFlow& mf) {
    if (mf.per_commodity.size() != commodities.size())
        throw DataError("multiflow does not match the commodity list");
    const AggregatedFlow agg = aggregate_flow(mf);
    const CostVector ell = latencies(params, agg.per_arc);
    double gap = 0.0;
    std::map<int, ShortestPathTree> trees;
    for (std::size_t j = 0; j < commodities.size(); ++j) {
        const Commodity& c = commodities[j];
        auto it = trees.find(c.origin);
        if (it == trees.end()) it = trees.emplace(c.origin, dijkstra(net, ell, c.origin)).first;
        gap += kernels::dot(ell.data(), mf.per_commodity[j].data(), ell.size()) -
               c.demand * it->second.dist[c.destination];
    }
    return gap;
}

std::vector<double> euclidean_projection(const RoadNetwork& net,
                                         const std::vector<Commodity>& commodities,
                                         const std::vector<double>& theta,
                                         const ProjectionOptions& opts) {
    validate_commodities(net, commodities);
    if (static_cast<int>(theta.size()) != net.num_arcs())
        throw DataError("theta must cover every arc");
    const int n = net.num_arcs();
    const int nr = opts.real_arcs < 0 ? n : opts.real_arcs;

    // f(y) = 0.5*||y_r||^2 - theta'y_r over the first nr coordinates.
    auto grad_costs = [&](const std::vector<double>& y) {
        CostVector g(n, 0.0);
        kernels::vsub(y.data(), theta.data(), g.data(), nr);
        return g;
    };

    std::vector<double> zero(n, 0.0);
    std::vector<double> y = all_or_nothing(net, grad_costs(zero), commodities).flow;

    AtomSet atoms;
    if (opts.away_steps) {
        atoms.atoms.push_back(y);
        atoms.weights.push_back(1.0);
    }
    std::vector<double> d(n);
    for (int it = 0; it < opts.max_iter; ++it) {
        const CostVector g = grad_costs(y);
        const AonResult aon = all_or_nothing(net, g, commodities);
        const double g_dot_y = kernels::dot(g.data(), y.data(), n);
        const double gap = g_dot_y - aon.total_sp_cost;
        if (gap <= opts.tol) break;

        bool away = false;
        int away_idx = -1;
        double gamma_max = 1.0;
        if (opts.away_steps && atoms.atoms.size() > 1) {
            double worst = -kInf;
            for (std::size_t i = 0; i < atoms.atoms.size(); ++i) {
                const double v = kernels::dot(g.data(), atoms.atoms[i].data(), n);
                if (v > worst) {
                    worst = v;
                    away_idx = static_cast<int>(i);
                }
            }
            if (worst - g_dot_y > gap && atoms.weights[away_idx] < 1.0) {
                away = true;
                gamma_max = atoms.weights[away_idx] / (1.0 - atoms.weights[away_idx]);
            }
        }
        if (away)
            kernels::vsub(y.data(), atoms.atoms[away_idx].data(), d.data(), n);
        else
            kernels::vsub(aon.flow.data(), y.data(), d.data(), n);

        const double slope = kernels::dot(g.data(), d.data(), n);
        const double curv = kernels::dot(d.data(), d.data(), nr);
        const double gamma = quadratic_step(slope, curv, gamma_max);
        if (gamma <= 0.0 && !away) break;

        kernels::axpy(gamma, d.data(), y.data(), n);
        kernels::clamp_min_zero(y.data(), n);

        if (opts.away_steps) {
            if (away) {
                for (double& w : atoms.weights) w *= (1.0 + gamma);
                atoms.weights[away_idx] -= gamma;
                if (atoms.weights[away_idx] <= 1e-12) atoms.prune();
            } else if (gamma >= 1.0) {
                atoms.atoms.assign(1, aon.flow);
                atoms.weights.assign(1, 1.0);
            } else {
                for (double& w : atoms.weights) w *= (1.0 - gamma);
                const int idx = atoms.find(aon.flow);
                if (idx >= 0)
                    atoms.weights[idx] += gamma;
                else {
                    atoms.atoms.push_back(aon.flow);
                    atoms.weights.push_back(gamma);
                }
            }
            if ((it + 1) % 256 == 0) {
                atoms.prune();
                y = atoms.combine(n);
            }
        }
    }
    return y;
}

}  // namespace equiflow
