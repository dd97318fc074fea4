#include "equiflow/mcmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "equiflow/common.hpp"
#include "equiflow/simplex.hpp"

namespace equiflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool ColumnPool::insert(int origin, int destination, const std::vector<int>& arcs) {
    auto& list = paths_[{origin, destination}];
    for (const auto& p : list)
        if (p == arcs) return false;
    list.push_back(arcs);
    return true;
}

std::size_t ColumnPool::size() const {
    std::size_t n = 0;
    for (const auto& [k, v] : paths_) n += v.size();
    return n;
}

namespace {

struct Group {
    int origin = 0;
    int destination = 0;
    double demand = 0.0;
    std::vector<int> members;  // commodity indices
};

std::vector<Group> group_commodities(const std::vector<Commodity>& commodities) {
    std::map<std::pair<int, int>, int> index;
    std::vector<Group> groups;
    for (std::size_t j = 0; j < commodities.size(); ++j) {
        const Commodity& c = commodities[j];
        auto [it, fresh] = index.try_emplace({c.origin, c.destination}, static_cast<int>(groups.size()));
        if (fresh) groups.push_back({c.origin, c.destination, 0.0, {}});
        Group& g = groups[it->second];
        g.demand += c.demand;
        g.members.push_back(static_cast<int>(j));
    }
    return groups;
}

// Restricted master over the active capacity rows. Rebuilt whenever a new
// capacity row is activated; columns are re-added from the pool.
struct Master {
    DenseSimplex lp;
    const std::vector<Group>& groups;
    const std::vector<int>& active_arcs;       // arc id per capacity row
    const std::vector<int>& capacity_row;      // arc id -> row or -1
    std::vector<int> overflow_col;             // per group
    std::vector<std::pair<int, int>> path_of_col;  // col -> (group, pool path index); (-1,-1) otherwise

    Master(const std::vector<double>& rhs, const std::vector<Group>& g, const std::vector<int>& act,
           const std::vector<int>& caprow)
        : lp(rhs), groups(g), active_arcs(act), capacity_row(caprow) {}
};

double column_cost(const CostVector& costs, const std::vector<int>& arcs) {
    double c = 0.0;
    for (int a : arcs) c += costs[a];
    return c;
}

int add_path_column(Master& master, const CostVector& costs, int group, int pool_index,
                    const std::vector<int>& arcs) {
    std::vector<std::pair<int, double>> entries;
    entries.emplace_back(group, 1.0);
    for (int a : arcs) {
        const int row = master.capacity_row[a];
        if (row >= 0) entries.emplace_back(row, 1.0);
    }
    const int col = master.lp.add_column(entries, column_cost(costs, arcs));
    master.path_of_col.emplace_back(group, pool_index);
    return col;
}

}  // namespace

McmfSolution linear_min_multiflow(const RoadNetwork& net, const CostVector& costs,
                                  const std::vector<double>& capacities,
                                  const std::vector<Commodity>& commodities,
                                  const McmfOptions& opts) {
    if (static_cast<int>(costs.size()) != net.num_arcs() ||
        static_cast<int>(capacities.size()) != net.num_arcs())
        throw DataError("costs/capacities must cover every arc");
    validate_commodities(net, commodities);
    for (double u : capacities)
        if (!(u > 0.0)) throw DataError("capacities must be strictly positive");

    McmfSolution sol;
    sol.multiflow.per_commodity.assign(commodities.size(),
                                       std::vector<double>(net.num_arcs(), 0.0));
    sol.aggregated.assign(net.num_arcs(), 0.0);
    sol.capacity_duals.assign(net.num_arcs(), 0.0);
    if (commodities.empty()) {
        sol.status = McmfStatus::optimal;
        return sol;
    }

    const std::vector<Group> groups = group_commodities(commodities);
    const int ng = static_cast<int>(groups.size());
    double total_demand = 0.0;
    for (const Group& g : groups) total_demand += g.demand;

    ColumnPool local_pool;
    ColumnPool& pool = opts.pool ? *opts.pool : local_pool;

    // Seed one column per group so the master can route something.
    for (const Group& g : groups) {
        auto& paths = pool.paths_for(g.origin, g.destination);
        if (paths.empty()) {
            Commodity probe{g.origin, g.destination, g.demand, 0};
            try {
                paths.push_back(shortest_path_lmo(net, costs, probe).arcs);
            } catch (const NegativeCycleError&) {
                throw;
            } catch (const SolverError&) {
                // unreachable destination: the overflow column absorbs the
                // demand and the solve reports infeasible
            }
        }
    }

    double cost_scale = 1.0;
    for (double c : costs) cost_scale += std::abs(c);
    const double big_m = 1e4 * cost_scale;

    std::vector<int> active_arcs;                       // capacity rows, in activation order
    std::vector<int> capacity_row(net.num_arcs(), -1);  // arc -> row (offset by ng)

    const double feas_tol = 1e-9 * std::max(1.0, total_demand);

    while (true) {
        // ---- build the master for the current active-row set ----
        std::vector<double> rhs(ng + active_arcs.size());
        for (int g = 0; g < ng; ++g) rhs[g] = groups[g].demand;
        for (std::size_t r = 0; r < active_arcs.size(); ++r) rhs[ng + r] = capacities[active_arcs[r]];

        Master master(rhs, groups, active_arcs, capacity_row);
        std::vector<int> init_basis;
        master.overflow_col.resize(ng);
        for (int g = 0; g < ng; ++g) {
            master.overflow_col[g] = master.lp.add_column({{g, 1.0}}, big_m);
            master.path_of_col.emplace_back(-1, -1);
            init_basis.push_back(master.overflow_col[g]);
        }
        for (std::size_t r = 0; r < active_arcs.size(); ++r) {
            const int col = master.lp.add_column({{ng + static_cast<int>(r), 1.0}}, 0.0);
            master.path_of_col.emplace_back(-1, -1);
            init_basis.push_back(col);
        }
        for (int g = 0; g < ng; ++g) {
            const auto& paths = pool.paths_for(groups[g].origin, groups[g].destination);
            for (std::size_t p = 0; p < paths.size(); ++p)
                add_path_column(master, costs, g, static_cast<int>(p), paths[p]);
        }
        master.lp.set_initial_basis(init_basis);

        // ---- column generation on this row set ----
        bool new_row = false;
        while (true) {
            master.lp.optimize();
            const std::vector<double>& y = master.lp.duals();

            CostVector reduced = costs;
            bool has_negative = false;
            for (std::size_t r = 0; r < active_arcs.size(); ++r) {
                const double dual = std::max(0.0, -y[ng + r]);
                reduced[active_arcs[r]] += dual;
            }
            for (double c : reduced)
                if (c < 0.0) {
                    has_negative = true;
                    break;
                }

            if (opts.log_iterations) {
                McmfIterationStat stat;
                stat.restricted_objective = master.lp.objective();
                double bound = 0.0;
                for (int g = 0; g < ng; ++g) {
                    Commodity probe{groups[g].origin, groups[g].destination, 1.0, 0};
                    const PathFlow pf = shortest_path_lmo(net, reduced, probe);
                    bound += groups[g].demand * column_cost(reduced, pf.arcs);
                }
                for (std::size_t r = 0; r < active_arcs.size(); ++r)
                    bound -= capacities[active_arcs[r]] * std::max(0.0, -y[ng + r]);
                stat.lagrangian_bound = bound;
                sol.iterations.push_back(stat);
            }

            // Price per distinct origin; one tree serves all its groups when
            // costs are nonnegative.
            int added = 0;
            std::map<int, ShortestPathTree> trees;
            for (int g = 0; g < ng; ++g) {
                const Group& grp = groups[g];
                auto it = trees.find(grp.origin);
                if (it == trees.end()) {
                    ShortestPathTree t = has_negative ? bellman_ford(net, reduced, grp.origin)
                                                      : dijkstra(net, reduced, grp.origin);
                    it = trees.emplace(grp.origin, std::move(t)).first;
                }
                const ShortestPathTree& tree = it->second;
                if (tree.dist[grp.destination] == kInf) continue;  // overflow handles it
                const double lambda = y[g];
                if (tree.dist[grp.destination] < lambda - opts.pricing_tol) {
                    std::vector<int> arcs = extract_path(tree, net, grp.origin, grp.destination);
                    if (pool.insert(grp.origin, grp.destination, arcs)) {
                        const auto& paths = pool.paths_for(grp.origin, grp.destination);
                        add_path_column(master, costs, g, static_cast<int>(paths.size()) - 1, arcs);
                        ++added;
                    }
                }
            }
            if (added == 0) break;
        }

        // ---- check capacity rows that are not in the master yet ----
        std::vector<double> ybar(net.num_arcs(), 0.0);
        const std::vector<double> x = master.lp.primal();
        for (int col = 0; col < master.lp.num_cols(); ++col) {
            const auto [g, p] = master.path_of_col[col];
            if (g < 0 || x[col] == 0.0) continue;
            const auto& arcs = pool.paths_for(groups[g].origin, groups[g].destination)[p];
            for (int a : arcs) ybar[a] += x[col];
        }
        std::vector<int> violated;
        for (int a = 0; a < net.num_arcs(); ++a) {
            if (capacity_row[a] >= 0 || capacities[a] == kInf) continue;
            if (ybar[a] > capacities[a] + 1e-9) violated.push_back(a);
        }
        if (!violated.empty()) {
            for (int a : violated) {
                capacity_row[a] = ng + static_cast<int>(active_arcs.size());
                active_arcs.push_back(a);
            }
            new_row = true;
        }
        if (new_row) continue;

        // ---- done: extract ----
        double overflow = 0.0;
        for (int g = 0; g < ng; ++g) overflow += master.lp.primal_value(master.overflow_col[g]);
        if (overflow > feas_tol) {
            sol.status = McmfStatus::infeasible;
            return sol;
        }
        sol.status = McmfStatus::optimal;
        sol.aggregated = ybar;
        sol.objective = 0.0;
        for (int a = 0; a < net.num_arcs(); ++a) sol.objective += costs[a] * ybar[a];
        const std::vector<double>& y = master.lp.duals();
        for (std::size_t r = 0; r < active_arcs.size(); ++r)
            sol.capacity_duals[active_arcs[r]] = std::max(0.0, -y[ng + r]);

        // Split group flows back to the original commodities in proportion
        // to demand (costs are commodity-independent, so this stays optimal).
        std::vector<std::vector<double>> group_flow(ng, std::vector<double>(net.num_arcs(), 0.0));
        for (int col = 0; col < master.lp.num_cols(); ++col) {
            const auto [g, p] = master.path_of_col[col];
            if (g < 0 || x[col] == 0.0) continue;
            const auto& arcs = pool.paths_for(groups[g].origin, groups[g].destination)[p];
            for (int a : arcs) group_flow[g][a] += x[col];
        }
        for (int g = 0; g < ng; ++g) {
            const Group& grp = groups[g];
            for (int j : grp.members) {
                const double share = commodities[j].demand / grp.demand;
                for (int a = 0; a < net.num_arcs(); ++a)
                    sol.multiflow.per_commodity[j][a] = share * group_flow[g][a];
            }
        }
        return sol;
    }
}

MultiFlow greedy_sequential_routing(const RoadNetwork& net, const CostVector& costs,
                                    const std::vector<double>& capacities,
                                    const std::vector<Commodity>& commodities,
                                    const std::vector<int>& order) {
    validate_commodities(net, commodities);
    std::vector<int> seq = order;
    if (seq.empty()) {
        seq.resize(commodities.size());
        for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<int>(i);
    }

    std::vector<double> residual = capacities;
    MultiFlow mf;
    mf.per_commodity.assign(commodities.size(), std::vector<double>(net.num_arcs(), 0.0));

    // Residual graph as masked costs: saturated arcs price at +inf for
    // dijkstra / get removed for bellman-ford via a filtered network copy.
    for (int j : seq) {
        const Commodity& c = commodities[j];
        double remaining = c.demand;
        while (remaining > 1e-12) {
            CostVector masked = costs;
            bool negative = false;
            for (int a = 0; a < net.num_arcs(); ++a) {
                if (residual[a] <= 1e-12) masked[a] = kInf;
                else if (masked[a] < 0.0) negative = true;
            }
            ShortestPathTree tree;
            if (!negative) {
                // +inf costs are fine for dijkstra's comparisons but fail the
                // nonnegativity precheck indirectly; mask by a huge finite cost.
                double huge = 1.0;
                for (double v : costs) huge += std::abs(v);
                huge *= net.num_arcs() + 1.0;
                for (double& v : masked)
                    if (v == kInf) v = huge;
                tree = dijkstra(net, masked, c.origin);
                if (tree.dist[c.destination] >= huge)
                    throw SolverError("greedy routing: no residual path to destination");
            } else {
                RoadNetwork sub;
                sub.vertices = net.vertices;
                std::vector<int> arc_map;
                for (const Arc& arc : net.arcs) {
                    if (residual[arc.id] <= 1e-12) continue;
                    Arc a = arc;
                    a.id = static_cast<int>(sub.arcs.size());
                    sub.arcs.push_back(a);
                    arc_map.push_back(arc.id);
                }
                sub.virtual_arc_start = static_cast<int>(sub.arcs.size());
                sub.finalize();
                CostVector subcosts(sub.num_arcs());
                for (int a = 0; a < sub.num_arcs(); ++a) subcosts[a] = costs[arc_map[a]];
                ShortestPathTree st = bellman_ford(sub, subcosts, c.origin);
                if (st.dist[c.destination] == kInf)
                    throw SolverError("greedy routing: no residual path to destination");
                std::vector<int> subpath = extract_path(st, sub, c.origin, c.destination);
                double chunk = remaining;
                for (int sa : subpath) chunk = std::min(chunk, residual[arc_map[sa]]);
                for (int sa : subpath) {
                    residual[arc_map[sa]] -= chunk;
                    mf.per_commodity[j][arc_map[sa]] += chunk;
                }
                remaining -= chunk;
                continue;
            }
            std::vector<int> path = extract_path(tree, net, c.origin, c.destination);
            double chunk = remaining;
            for (int a : path) chunk = std::min(chunk, residual[a]);
            if (chunk <= 1e-12) throw SolverError("greedy routing: residual bottleneck is zero");
            for (int a : path) {
                residual[a] -= chunk;
                mf.per_commodity[j][a] += chunk;
            }
            remaining -= chunk;
        }
    }
    return mf;
}

}  // namespace equiflow
